//! Physical pipe parameters and the scalar constants derived from them.
//!
//! Everything downstream (state-space matrices, spectra, transfer functions,
//! delay simulation) is driven by [`DerivedConstants`], which is computed once
//! from a validated [`PipeParameters`].

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gain printed alongside the case-study parameters in the original report.
///
/// The formula `c^2 / (A L)` with `A = pi D^2 / 4` and the case-study geometry
/// gives 5.2064 Pa/kg, about 2.8 % higher. The cross-sectional area behind
/// the printed number is not stated, so this value is kept for reference only.
pub const REFERENCE_GAIN_PRINTED: f64 = 5.064;

/// Friction constant printed alongside the case-study parameters (1/s).
pub const REFERENCE_ALPHA_PRINTED: f64 = 0.0051;

/// Geometry and operating point of a single pipe.
///
/// Field names follow the JSON config keys; unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipeParameters {
    /// Pipe length `L` in meters.
    #[serde(rename = "length_m")]
    pub length: f64,
    /// Inner diameter `D` in meters.
    #[serde(rename = "diameter_m")]
    pub diameter: f64,
    /// Dimensionless friction factor `f_c`.
    pub friction_factor: f64,
    /// Isothermal speed of sound `c` in m/s.
    #[serde(rename = "speed_of_sound_m_s")]
    pub speed_of_sound: f64,
    /// Nominal mass flow `q_m` in kg/s.
    #[serde(rename = "nominal_massflow_kg_s")]
    pub nominal_massflow: f64,
    /// Nominal (intake) pressure `p_m` in Pa.
    #[serde(rename = "nominal_pressure_pa")]
    pub nominal_pressure: f64,
}

impl PipeParameters {
    /// The 35 km, 793 mm pipe used as the running example throughout the crate.
    pub fn case_study() -> Self {
        Self {
            length: 35_000.0,
            diameter: 0.793,
            friction_factor: 0.0079,
            speed_of_sound: 300.0,
            nominal_massflow: 90.0,
            nominal_pressure: 8.0e6,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn validate(&self) -> Result<()> {
        positive("length_m", self.length)?;
        positive("diameter_m", self.diameter)?;
        positive("speed_of_sound_m_s", self.speed_of_sound)?;
        positive("nominal_pressure_pa", self.nominal_pressure)?;
        non_negative("friction_factor", self.friction_factor)?;
        non_negative("nominal_massflow_kg_s", self.nominal_massflow)?;
        Ok(())
    }

    /// Cross-sectional area `pi D^2 / 4`.
    pub fn area(&self) -> f64 {
        PI * self.diameter * self.diameter / 4.0
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be > 0, got {value}"),
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be >= 0, got {value}"),
        })
    }
}

/// Scalar constants shared by every model of the pipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Cross-sectional area `A` (m^2).
    pub area: f64,
    /// Linearized friction constant `alpha` (1/s); flows decay at `2 alpha`.
    pub alpha: f64,
    /// Transport delay `T_d = L / c` (s).
    pub t_d: f64,
    /// Quarter-wave frequency `pi / (2 T_d)` (rad/s).
    pub omega0: f64,
    /// Integrator gain `K_G = c^2 / (A L)` (Pa/kg).
    pub k_g: f64,
    /// Copies of the inputs that the models need directly.
    pub length: f64,
    pub speed_of_sound: f64,
}

impl DerivedConstants {
    /// `alpha * T_d`, the dimensionless damping over one transit.
    pub fn damping_per_transit(&self) -> f64 {
        self.alpha * self.t_d
    }

    /// Attenuation of one round trip, `exp(-2 alpha T_d)`.
    pub fn round_trip_attenuation(&self) -> f64 {
        (-2.0 * self.alpha * self.t_d).exp()
    }
}

pub fn derive_constants(params: &PipeParameters) -> Result<DerivedConstants> {
    params.validate()?;
    let area = params.area();
    let c = params.speed_of_sound;
    let alpha = params.friction_factor * c * c / (4.0 * params.diameter * area) * params.nominal_massflow
        / params.nominal_pressure;
    let t_d = params.length / c;
    Ok(DerivedConstants {
        area,
        alpha,
        t_d,
        omega0: PI / (2.0 * t_d),
        k_g: c * c / (area * params.length),
        length: params.length,
        speed_of_sound: c,
    })
}

/// Steady-state pressure along the pipe at the nominal flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProfile {
    pub positions: Vec<f64>,
    pub pressures: Vec<f64>,
}

impl SteadyProfile {
    pub fn intake(&self) -> f64 {
        self.pressures[0]
    }

    pub fn offtake(&self) -> f64 {
        *self.pressures.last().expect("profile has at least two points")
    }
}

/// Samples the steady pressure `p(l) = sqrt(p(0)^2 - f_c c^2 q_m^2 l / (2 D A^2))`
/// at `n_points` uniformly spaced positions in `[0, L]`, anchored at the intake.
pub fn steady_profile(params: &PipeParameters, n_points: usize) -> Result<SteadyProfile> {
    params.validate()?;
    if n_points < 2 {
        return Err(Error::InvalidParameter {
            name: "n_points",
            reason: format!("need at least 2 sample points, got {n_points}"),
        });
    }
    let area = params.area();
    let c = params.speed_of_sound;
    let q = params.nominal_massflow;
    let slope = params.friction_factor * c * c / (2.0 * params.diameter * area * area) * q * q;
    let p0 = params.nominal_pressure;
    let step = params.length / (n_points - 1) as f64;

    let mut positions = Vec::with_capacity(n_points);
    let mut pressures = Vec::with_capacity(n_points);
    for i in 0..n_points {
        // last point exactly at L
        let position = if i + 1 == n_points { params.length } else { i as f64 * step };
        let discriminant = p0 * p0 - slope * position;
        if discriminant <= 0.0 {
            return Err(Error::PressureCollapse {
                position,
                discriminant,
            });
        }
        positions.push(position);
        pressures.push(if i == 0 { p0 } else { discriminant.sqrt() });
    }
    Ok(SteadyProfile {
        positions,
        pressures,
    })
}
