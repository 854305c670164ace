//! Finite-difference state-space realization of the linearized pipe.
//!
//! The pipe is cut into `N` segments of length `dl = L / N`. Pressures live on
//! the `N + 1` nodes and mass flows on the `N` segment midpoints, giving the
//! state `x = (p_0, ..., p_N, q_1, ..., q_N)`. The two inputs are the intake
//! inflow `u1` and the offtake outflow `u2`; the outputs are `p_0` and `p_N`.
//!
//! With `g = c^2 / (A dl)` and `r = A / dl` the dynamics are
//!
//! ```text
//! p_0' = g (u1 - q_1)
//! p_i' = g (q_i - q_{i+1})            1 <= i < N
//! p_N' = g (q_N - u2)
//! q_j' = r (p_{j-1} - p_j) - 2 alpha q_j
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::params::DerivedConstants;
use crate::simulate::TimeSeries;

/// Default cap on the state dimension `2N + 1`.
pub const DEFAULT_STATE_CAP: usize = 20_001;

/// Largest admissible `dt * max|Im lambda|` for [`integrate`].
pub const STEP_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationGrid {
    pub n_segments: usize,
    pub delta_l: f64,
}

impl DiscretizationGrid {
    pub fn new(length: f64, n_segments: usize) -> Result<Self> {
        if n_segments == 0 {
            return Err(Error::NoSegments);
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter {
                name: "length_m",
                reason: format!("must be finite and > 0, got {length}"),
            });
        }
        Ok(Self {
            n_segments,
            delta_l: length / n_segments as f64,
        })
    }

    pub fn for_pipe(consts: &DerivedConstants, n_segments: usize) -> Result<Self> {
        Self::new(consts.length, n_segments)
    }

    pub fn n_states(&self) -> usize {
        2 * self.n_segments + 1
    }
}

/// Dense realization `x' = A x + B u`, `y = C x`.
#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub state_labels: Vec<String>,
    pub n_segments: usize,
    /// Largest imaginary part in the spectrum of `a`, from the closed form.
    pub max_oscillation: f64,
}

impl StateSpaceModel {
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }
}

struct Coefficients {
    n: usize,
    gamma: f64,
    rho: f64,
    alpha: f64,
    max_oscillation: f64,
}

fn coefficients(consts: &DerivedConstants, grid: &DiscretizationGrid, cap: usize) -> Result<Coefficients> {
    let n = grid.n_segments;
    if n == 0 {
        return Err(Error::NoSegments);
    }
    let states = n.checked_mul(2).and_then(|x| x.checked_add(1)).unwrap_or(usize::MAX);
    if states > cap {
        return Err(Error::TooManyStates { states, cap });
    }
    let dl = grid.delta_l;
    let omega_top = 2.0 * consts.speed_of_sound / dl
        * (n as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
    let max_oscillation = (omega_top * omega_top - consts.alpha * consts.alpha).max(0.0).sqrt();
    Ok(Coefficients {
        n,
        gamma: consts.speed_of_sound * consts.speed_of_sound / (consts.area * dl),
        rho: consts.area / dl,
        alpha: consts.alpha,
        max_oscillation,
    })
}

pub fn build_state_space(consts: &DerivedConstants, grid: &DiscretizationGrid) -> Result<StateSpaceModel> {
    build_state_space_with_cap(consts, grid, DEFAULT_STATE_CAP)
}

pub fn build_state_space_with_cap(
    consts: &DerivedConstants,
    grid: &DiscretizationGrid,
    cap: usize,
) -> Result<StateSpaceModel> {
    let Coefficients {
        n,
        gamma,
        rho,
        alpha,
        max_oscillation,
    } = coefficients(consts, grid, cap)?;
    let dim = 2 * n + 1;
    let q = |j: usize| n + j;

    let mut a = DMatrix::zeros(dim, dim);
    a[(0, q(1))] = -gamma;
    for i in 1..n {
        a[(i, q(i))] = gamma;
        a[(i, q(i + 1))] = -gamma;
    }
    a[(n, q(n))] = gamma;
    for j in 1..=n {
        a[(q(j), j - 1)] = rho;
        a[(q(j), j)] = -rho;
        a[(q(j), q(j))] = -2.0 * alpha;
    }

    let mut b = DMatrix::zeros(dim, 2);
    b[(0, 0)] = gamma;
    b[(n, 1)] = -gamma;

    let mut c = DMatrix::zeros(2, dim);
    c[(0, 0)] = 1.0;
    c[(1, n)] = 1.0;

    let state_labels = (0..=n)
        .map(|i| format!("p_{i}"))
        .chain((1..=n).map(|j| format!("q_{j}")))
        .collect();
    Ok(StateSpaceModel {
        a,
        b,
        c,
        state_labels,
        n_segments: n,
        max_oscillation,
    })
}

/// Equivalent realization in the coordinates `z = sum p_i`,
/// `d_i = p_{i-1} - p_i`, flows unchanged.
///
/// The `z` row and column of the state matrix vanish, which isolates the
/// integrator mode; the pressure-difference block is the second-difference
/// matrix scaled by `c^2 / (A dl)`.
pub fn build_transformed_realization(
    consts: &DerivedConstants,
    grid: &DiscretizationGrid,
) -> Result<StateSpaceModel> {
    let Coefficients {
        n,
        gamma,
        rho,
        alpha,
        max_oscillation,
    } = coefficients(consts, grid, DEFAULT_STATE_CAP)?;
    let dim = 2 * n + 1;
    let d = |i: usize| i;
    let q = |j: usize| n + j;

    let mut a = DMatrix::zeros(dim, dim);
    for i in 1..=n {
        a[(d(i), q(i))] = -2.0 * gamma;
        if i > 1 {
            a[(d(i), q(i - 1))] = gamma;
        }
        if i < n {
            a[(d(i), q(i + 1))] = gamma;
        }
        a[(q(i), d(i))] = rho;
        a[(q(i), q(i))] = -2.0 * alpha;
    }

    let mut b = DMatrix::zeros(dim, 2);
    b[(0, 0)] = gamma;
    b[(0, 1)] = -gamma;
    b[(d(1), 0)] += gamma;
    b[(d(n), 1)] += gamma;

    let np1 = (n + 1) as f64;
    let mut c = DMatrix::zeros(2, dim);
    c[(0, 0)] = 1.0 / np1;
    c[(1, 0)] = 1.0 / np1;
    for k in 1..=n {
        c[(0, d(k))] = (np1 - k as f64) / np1;
        c[(1, d(k))] = -(k as f64) / np1;
    }

    let state_labels = std::iter::once("z".to_string())
        .chain((1..=n).map(|i| format!("d_{i}")))
        .chain((1..=n).map(|j| format!("q_{j}")))
        .collect();
    Ok(StateSpaceModel {
        a,
        b,
        c,
        state_labels,
        n_segments: n,
        max_oscillation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Trapezoidal,
    Rk4,
}

/// How the sampled input is interpreted between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputHold {
    /// Piecewise constant, `u(t) = u_n` on `[t_n, t_{n+1})`.
    #[default]
    Zero,
    /// Piecewise linear between samples.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntegrationOptions {
    pub scheme: Scheme,
    pub hold: InputHold,
    pub record_states: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub time: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// One state vector per time sample when requested.
    pub states: Option<Vec<Vec<f64>>>,
}

/// Integrates the model on the sample grid of `u`, whose first two channels are
/// the intake and offtake flow deviations.
pub fn integrate(
    model: &StateSpaceModel,
    u: &TimeSeries,
    x0: Option<&[f64]>,
    options: IntegrationOptions,
) -> Result<SimulationResult> {
    let dim = model.n_states();
    if u.channels() < 2 {
        return Err(Error::DimensionMismatch {
            what: "input channels",
            expected: 2,
            found: u.channels(),
        });
    }
    let h = u.dt;
    let product = h * model.max_oscillation;
    if product > STEP_LIMIT {
        return Err(Error::UnstableStep {
            dt: h,
            product,
            limit: STEP_LIMIT,
        });
    }
    let mut x = match x0 {
        Some(v) if v.len() != dim => {
            return Err(Error::DimensionMismatch {
                what: "initial state",
                expected: dim,
                found: v.len(),
            })
        }
        Some(v) => DVector::from_column_slice(v),
        None => DVector::zeros(dim),
    };

    let len = u.len();
    let u1 = &u.data[0];
    let u2 = &u.data[1];
    let input_at = |n: usize| -> [f64; 2] { [u1[n], u2[n]] };
    let next_input = |n: usize| -> [f64; 2] {
        if n + 1 < len {
            input_at(n + 1)
        } else {
            input_at(n)
        }
    };

    let mut y1 = Vec::with_capacity(len);
    let mut y2 = Vec::with_capacity(len);
    let mut states = options.record_states.then(|| Vec::with_capacity(len));
    let mut record = |x: &DVector<f64>, y1: &mut Vec<f64>, y2: &mut Vec<f64>| {
        let y = &model.c * x;
        y1.push(y[0]);
        y2.push(y[1]);
        if let Some(s) = states.as_mut() {
            s.push(x.as_slice().to_vec());
        }
    };

    if len == 0 {
        return Ok(SimulationResult {
            time: Vec::new(),
            y1,
            y2,
            states,
        });
    }
    record(&x, &mut y1, &mut y2);

    match options.scheme {
        Scheme::Trapezoidal => {
            let mut lhs = DMatrix::<f64>::identity(dim, dim);
            lhs -= &model.a * (0.5 * h);
            let lu = lhs.lu();
            let mut rhs = DMatrix::<f64>::identity(dim, dim);
            rhs += &model.a * (0.5 * h);
            let mut step = rhs;
            let mut bd = &model.b * h;
            if !lu.solve_mut(&mut step) || !lu.solve_mut(&mut bd) {
                return Err(Error::UnstableStep {
                    dt: h,
                    product,
                    limit: STEP_LIMIT,
                });
            }
            let b1 = bd.column(0).into_owned();
            let b2 = bd.column(1).into_owned();
            let mut next = DVector::zeros(dim);
            for n in 0..len - 1 {
                let v = match options.hold {
                    InputHold::Zero => input_at(n),
                    InputHold::Linear => {
                        let (a, b) = (input_at(n), next_input(n));
                        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
                    }
                };
                next.gemv(1.0, &step, &x, 0.0);
                next.axpy(v[0], &b1, 1.0);
                next.axpy(v[1], &b2, 1.0);
                std::mem::swap(&mut x, &mut next);
                record(&x, &mut y1, &mut y2);
            }
        }
        Scheme::Rk4 => {
            let f = |x: &DVector<f64>, v: [f64; 2]| -> DVector<f64> {
                let mut dx = &model.a * x;
                dx.axpy(v[0], &model.b.column(0), 1.0);
                dx.axpy(v[1], &model.b.column(1), 1.0);
                dx
            };
            for n in 0..len - 1 {
                let (v0, vh, v1) = match options.hold {
                    InputHold::Zero => {
                        let v = input_at(n);
                        (v, v, v)
                    }
                    InputHold::Linear => {
                        let (a, b) = (input_at(n), next_input(n));
                        (a, [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], b)
                    }
                };
                let k1 = f(&x, v0);
                let k2 = f(&(&x + &k1 * (0.5 * h)), vh);
                let k3 = f(&(&x + &k2 * (0.5 * h)), vh);
                let k4 = f(&(&x + &k3 * h), v1);
                x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                record(&x, &mut y1, &mut y2);
            }
        }
    }

    Ok(SimulationResult {
        time: u.time(),
        y1,
        y2,
        states,
    })
}
