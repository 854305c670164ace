//! Transfer functions from the boundary flows `(q1, q2)` to the boundary
//! pressures `(p1, p2)`.
//!
//! Three evaluators are available:
//!
//! * [`truncated_response`]: the exact infinite products cut at order `n`.
//!   With `sigma^2 = s (s + 2 alpha)` and `w0 = pi / (2 T_d)`,
//!
//!   ```text
//!   G11 = (K_G / s) prod_k (1 + sigma^2 / ((2k-1)^2 w0^2)) / (1 + sigma^2 / (4 k^2 w0^2))
//!   G21 = (K_G / s) prod_k 1 / (1 + sigma^2 / (4 k^2 w0^2))
//!   ```
//!
//! * [`compact_response`]: the closed delay forms with
//!   `e = exp(-2 (s + alpha) T_d)`,
//!
//!   ```text
//!   G11 = K11 (s + alpha) (1 + e) / (s (1 - e))
//!   G21 = K21 (s + alpha) exp(-s T_d) / (s (1 - e))
//!   ```
//!
//! * [`ResolventEvaluator`]: `C (sI - A)^{-1} B` of the state-space model.
//!
//! In every case `G22 = -G11` and `G12 = -G21`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::eig::ResolventSolver;
use crate::error::{Error, Result};
use crate::params::DerivedConstants;
use crate::statespace::{build_state_space, DiscretizationGrid, StateSpaceModel};
use crate::sum::Compensated;

/// Relative distance below which a sample counts as pole-adjacent.
pub const NEAR_POLE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    G11,
    G12,
    G21,
    G22,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::G11, Channel::G12, Channel::G21, Channel::G22];

    /// Same-end channels (`G11`, `G22`), as opposed to end-to-end ones.
    pub fn is_direct(self) -> bool {
        matches!(self, Channel::G11 | Channel::G22)
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::G11 => "g11",
            Channel::G12 => "g12",
            Channel::G21 => "g21",
            Channel::G22 => "g22",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g11" => Ok(Channel::G11),
            "g12" => Ok(Channel::G12),
            "g21" => Ok(Channel::G21),
            "g22" => Ok(Channel::G22),
            other => Err(Error::InvalidParameter {
                name: "channel",
                reason: format!("unknown channel `{other}`"),
            }),
        }
    }
}

/// 2x2 transfer matrix at one point `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub g11: Complex64,
    pub g12: Complex64,
    pub g21: Complex64,
    pub g22: Complex64,
    pub near_pole: bool,
}

impl Response {
    fn from_pair(g11: Complex64, g21: Complex64, near_pole: bool) -> Self {
        Self {
            g11,
            g12: -g21,
            g21,
            g22: -g11,
            near_pole,
        }
    }

    pub fn get(&self, channel: Channel) -> Complex64 {
        match channel {
            Channel::G11 => self.g11,
            Channel::G12 => self.g12,
            Channel::G21 => self.g21,
            Channel::G22 => self.g22,
        }
    }

    fn undefined() -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        Self {
            g11: nan,
            g12: nan,
            g21: nan,
            g22: nan,
            near_pole: true,
        }
    }
}

/// `ln(1 + z)` without cancellation for small `z`.
fn ln_1p(z: Complex64) -> Complex64 {
    if z.norm() > 0.5 {
        return (1.0 + z).ln();
    }
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    Complex64::new(re, z.im.atan2(1.0 + z.re))
}

/// `exp(z) - 1` without cancellation for small `z`.
pub(crate) fn exp_m1(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

fn at_pole(s: Complex64) -> Error {
    Error::AtPole { re: s.re, im: s.im }
}

fn near(s: Complex64, pole: Complex64, scale: f64) -> bool {
    (s - pole).norm() < NEAR_POLE * scale
}

/// Truncated product form of order `n`.
pub fn truncated_response(consts: &DerivedConstants, n: usize, s: Complex64) -> Result<Response> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "order",
            reason: "truncation order must be at least 1".into(),
        });
    }
    if s.norm() == 0.0 {
        return Err(at_pole(s));
    }
    let alpha = consts.alpha;
    let w0 = consts.omega0;
    let sigma2 = s * (s + 2.0 * alpha);
    let mut near_pole = near(s, Complex64::new(0.0, 0.0), 2.0 * w0);
    let (mut num_re, mut num_im) = (Compensated::default(), Compensated::default());
    let (mut den_re, mut den_im) = (Compensated::default(), Compensated::default());
    for k in 1..=n {
        let kf = k as f64;
        let pole_sq = 4.0 * kf * kf * w0 * w0;
        let zero_sq = (2.0 * kf - 1.0).powi(2) * w0 * w0;
        let den = ln_1p(sigma2 / pole_sq);
        let num = ln_1p(sigma2 / zero_sq);
        if !den.re.is_finite() {
            return Err(at_pole(s));
        }
        den_re.add(den.re);
        den_im.add(den.im);
        num_re.add(num.re);
        num_im.add(num.im);
        let pair = crate::spectral::ModePair::from_frequency(alpha, pole_sq.sqrt());
        let scale = pair.upper().norm();
        near_pole |= near(s, pair.upper(), scale) || near(s, pair.lower(), scale);
    }
    let den = Complex64::new(den_re.value(), den_im.value());
    let num = Complex64::new(num_re.value(), num_im.value());
    let base = consts.k_g / s;
    let g11 = base * (num - den).exp();
    let g21 = base * (-den).exp();
    Ok(Response::from_pair(g11, g21, near_pole))
}

/// Coefficients of the compact delay model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactGains {
    /// `K_G tanh(alpha T_d) / alpha`, tending to `K_G T_d` as `alpha -> 0`.
    pub k_11: f64,
    /// `K_G (1 - exp(-2 alpha T_d)) / alpha`, tending to `2 K_G T_d`.
    pub k_21: f64,
    /// Round-trip attenuation `exp(-2 alpha T_d)`.
    pub beta: f64,
}

pub fn compact_gains(consts: &DerivedConstants) -> CompactGains {
    let t = consts.t_d;
    let x = consts.alpha * t;
    CompactGains {
        k_11: consts.k_g * t * tanh_over_x(x),
        k_21: consts.k_g * t * round_trip_loss_over_x(x),
        beta: (-2.0 * x).exp(),
    }
}

/// `(1 - exp(-2x)) / x`, tending to 2.
fn round_trip_loss_over_x(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        2.0 - 2.0 * x
    } else {
        -(-2.0 * x).exp_m1() / x
    }
}

fn tanh_over_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        x.tanh() / x
    }
}

fn sinh_over_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

fn compact_with(consts: &DerivedConstants, k_11: f64, k_21: f64, s: Complex64) -> Result<Response> {
    if s.norm() == 0.0 {
        return Err(at_pole(s));
    }
    let t = consts.t_d;
    let alpha = consts.alpha;
    let shifted = s + alpha;
    let e = (-2.0 * t * shifted).exp();
    let one_minus_e = -exp_m1(-2.0 * t * shifted);
    if one_minus_e.norm() == 0.0 {
        return Err(at_pole(s));
    }
    let k = (s.im * t / PI).round();
    let pole = Complex64::new(-alpha, k * PI / t);
    let mut near_pole = near(s, Complex64::new(0.0, 0.0), PI / t);
    if k != 0.0 {
        near_pole |= near(s, pole, pole.norm());
    }
    let common = shifted / (s * one_minus_e);
    let g11 = k_11 * common * (1.0 + e);
    let g21 = k_21 * common * (-t * s).exp();
    Ok(Response::from_pair(g11, g21, near_pole))
}

/// Compact delay form with the closed-form gains of [`compact_gains`].
pub fn compact_response(consts: &DerivedConstants, s: Complex64) -> Result<Response> {
    let g = compact_gains(consts);
    compact_with(consts, g.k_11, g.k_21, s)
}

/// Compact delay form with gains assembled from the normalized constants,
/// `K11 = K_G T_d Kbar11` and `K21 = 2 K_G T_d Kbar12 exp(-alpha T_d)`.
pub fn compact_response_normalized(consts: &DerivedConstants, s: Complex64) -> Result<Response> {
    let x = consts.alpha * consts.t_d;
    let scale = consts.k_g * consts.t_d;
    compact_with(
        consts,
        scale * tanh_over_x(x),
        2.0 * scale * sinh_over_x(x) * (-x).exp(),
        s,
    )
}

/// Reusable `C (sI - A)^{-1} B` evaluator for one state-space model.
#[derive(Debug, Clone)]
pub struct ResolventEvaluator {
    solver: ResolventSolver,
}

impl ResolventEvaluator {
    pub fn new(model: &StateSpaceModel) -> Self {
        Self {
            solver: ResolventSolver::new(&model.a, &model.b, &model.c),
        }
    }

    /// All four entries straight from the model; sign identities are not
    /// imposed.
    pub fn response(&self, s: Complex64) -> Result<Response> {
        let g = self.solver.eval(s)?;
        Ok(Response {
            g11: g[(0, 0)],
            g12: g[(0, 1)],
            g21: g[(1, 0)],
            g22: g[(1, 1)],
            near_pole: false,
        })
    }
}

pub fn resolvent_response(model: &StateSpaceModel, s: Complex64) -> Result<Response> {
    ResolventEvaluator::new(model).response(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    Truncated { order: usize },
    Compact,
    Resolvent { segments: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl FrequencyGrid {
    /// Bandwidth `[1e-4, 1]` rad/s with 400 points.
    pub const DEFAULT: FrequencyGrid = FrequencyGrid {
        omega_min: 1e-4,
        omega_max: 1.0,
        points: 400,
    };

    pub fn omegas(&self) -> Result<Vec<f64>> {
        if !(self.omega_min > 0.0 && self.omega_max > self.omega_min && self.omega_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "frequency band",
                reason: format!("need 0 < wmin < wmax, got [{}, {}]", self.omega_min, self.omega_max),
            });
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: format!("need at least 2 points, got {}", self.points),
            });
        }
        let (lo, hi) = (self.omega_min.ln(), self.omega_max.ln());
        let last = self.points - 1;
        Ok((0..self.points)
            .map(|i| match i {
                0 => self.omega_min,
                i if i == last => self.omega_max,
                i => (lo + (hi - lo) * i as f64 / last as f64).exp(),
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    #[default]
    Unwrapped,
    /// Restricted to `(-180, 180]`.
    Wrapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub omega: Vec<f64>,
    pub values: Vec<Response>,
    pub evaluator: Evaluator,
}

impl FrequencyResponse {
    pub fn magnitude_db(&self, channel: Channel) -> Vec<f64> {
        self.values.iter().map(|r| 20.0 * r.get(channel).norm().log10()).collect()
    }

    pub fn phase_deg(&self, channel: Channel, mode: PhaseMode) -> Vec<f64> {
        let raw: Vec<f64> = self.values.iter().map(|r| r.get(channel).arg().to_degrees()).collect();
        match mode {
            PhaseMode::Wrapped => raw
                .into_iter()
                .map(|p| if p <= -180.0 { p + 360.0 } else { p })
                .collect(),
            PhaseMode::Unwrapped => unwrap_degrees(&raw),
        }
    }

    pub fn near_pole(&self) -> Vec<bool> {
        self.values.iter().map(|r| r.near_pole).collect()
    }
}

/// Removes jumps larger than 180 degrees; NaN samples are passed through and
/// do not reset the offset.
pub fn unwrap_degrees(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in raw {
        if !p.is_finite() {
            out.push(p);
            continue;
        }
        if let Some(q) = prev {
            let jump = p - q;
            offset -= 360.0 * (jump / 360.0).round();
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

/// Log-spaced sweep along `s = j omega`. Samples where the evaluator fails are
/// kept as NaN and flagged.
pub fn bode(consts: &DerivedConstants, grid: FrequencyGrid, evaluator: Evaluator) -> Result<FrequencyResponse> {
    let omega = grid.omegas()?;
    let resolvent = match evaluator {
        Evaluator::Resolvent { segments } => {
            let g = DiscretizationGrid::for_pipe(consts, segments)?;
            Some(ResolventEvaluator::new(&build_state_space(consts, &g)?))
        }
        Evaluator::Truncated { order: 0 } => {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: "truncation order must be at least 1".into(),
            })
        }
        _ => None,
    };
    let values = omega
        .par_iter()
        .map(|&w| {
            let s = Complex64::new(0.0, w);
            let r = match evaluator {
                Evaluator::Truncated { order } => truncated_response(consts, order, s),
                Evaluator::Compact => compact_response(consts, s),
                Evaluator::Resolvent { .. } => resolvent.as_ref().expect("built above").response(s),
            };
            r.unwrap_or_else(|_| Response::undefined())
        })
        .collect();
    Ok(FrequencyResponse {
        omega,
        values,
        evaluator,
    })
}

/// `K_k = (2k / (2k - 1))^2`.
pub fn k_k(k: usize) -> f64 {
    let k = k as f64;
    (2.0 * k / (2.0 * k - 1.0)).powi(2)
}

/// `(4 k^2 w0^2 + alpha^2) / ((2k - 1)^2 w0^2 + alpha^2)`; equals `K_k` when
/// `alpha = 0`.
pub fn k_hat_k(consts: &DerivedConstants, k: usize) -> f64 {
    let k = k as f64;
    let w2 = consts.omega0 * consts.omega0;
    let a2 = consts.alpha * consts.alpha;
    (4.0 * k * k * w2 + a2) / ((2.0 * k - 1.0).powi(2) * w2 + a2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainConstants {
    pub order: usize,
    /// `prod_{k<=m} Khat_k / K_k`.
    pub k_bar_11: f64,
    /// `prod_{k<=m} (1 + alpha^2 / (4 k^2 w0^2))`.
    pub k_bar_12: f64,
    /// `tanh(alpha T_d) / (alpha T_d)`.
    pub k_bar_11_limit: f64,
    /// `sinh(alpha T_d) / (alpha T_d)`.
    pub k_bar_12_limit: f64,
    pub k_11: f64,
    pub k_21: f64,
}

pub fn gain_constants(consts: &DerivedConstants, m: usize) -> GainConstants {
    let w2 = consts.omega0 * consts.omega0;
    let a2 = consts.alpha * consts.alpha;
    let mut ln11 = Compensated::default();
    let mut ln12 = Compensated::default();
    for k in 1..=m {
        let kf = k as f64;
        let pole = (a2 / (4.0 * kf * kf * w2)).ln_1p();
        let zero = (a2 / ((2.0 * kf - 1.0).powi(2) * w2)).ln_1p();
        ln11.add(pole);
        ln11.add(-zero);
        ln12.add(pole);
    }
    let x = consts.alpha * consts.t_d;
    let g = compact_gains(consts);
    GainConstants {
        order: m,
        k_bar_11: ln11.value().exp(),
        k_bar_12: ln12.value().exp(),
        k_bar_11_limit: tanh_over_x(x),
        k_bar_12_limit: sinh_over_x(x),
        k_11: g.k_11,
        k_21: g.k_21,
    }
}
