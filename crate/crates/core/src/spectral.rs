//! Closed-form poles and zeros of the discretized pipe and their limits.
//!
//! With `dl = L / N` the nonzero eigenvalues of the state matrix are
//! `-alpha +/- j sqrt(w_k^2 - alpha^2)` where
//! `w_k = 2 (c/dl) sin(k pi / (2 (N + 1)))`, `k = 1..N`, plus a single zero
//! eigenvalue. The zeros of the direct channels follow the same pattern with
//! `w_k = 2 (c/dl) sin((2k - 1) pi / (2 (2N + 1)))`. As `N` grows these tend to
//! `k pi / T_d` and `(2k - 1) pi / (2 T_d)` respectively.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eig;
use crate::error::{Error, Result};
use crate::params::DerivedConstants;
use crate::statespace::StateSpaceModel;
use crate::transferfn::Channel;

/// One conjugate pair of a spectrum with common damping `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModePair {
    /// `re +/- j im`, `im >= 0`.
    Oscillatory { re: f64, im: f64 },
    /// Two real values, returned when `alpha` exceeds the undamped frequency.
    Overdamped { slow: f64, fast: f64 },
}

impl ModePair {
    /// Pair for undamped frequency `omega` and damping `alpha`.
    pub fn from_frequency(alpha: f64, omega: f64) -> Self {
        let radicand = omega * omega - alpha * alpha;
        if radicand >= 0.0 {
            ModePair::Oscillatory {
                re: -alpha,
                im: radicand.sqrt(),
            }
        } else {
            let r = (-radicand).sqrt();
            ModePair::Overdamped {
                slow: -alpha + r,
                fast: -alpha - r,
            }
        }
    }

    /// Member with nonnegative imaginary part (or the slower real root).
    pub fn upper(&self) -> Complex64 {
        match *self {
            ModePair::Oscillatory { re, im } => Complex64::new(re, im),
            ModePair::Overdamped { slow, .. } => Complex64::new(slow, 0.0),
        }
    }

    pub fn lower(&self) -> Complex64 {
        match *self {
            ModePair::Oscillatory { re, im } => Complex64::new(re, -im),
            ModePair::Overdamped { fast, .. } => Complex64::new(fast, 0.0),
        }
    }

    /// Damped oscillation frequency, zero when overdamped.
    pub fn frequency(&self) -> f64 {
        match *self {
            ModePair::Oscillatory { im, .. } => im,
            ModePair::Overdamped { .. } => 0.0,
        }
    }

    pub fn is_overdamped(&self) -> bool {
        matches!(self, ModePair::Overdamped { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    Finite(usize),
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// The integrator eigenvalue, always exactly zero.
    pub lambda0: f64,
    /// Pairs in order `k = 1, 2, ...`.
    pub pairs: Vec<ModePair>,
    pub mode: SpectrumMode,
}

impl Spectrum {
    /// Every eigenvalue, `lambda0` first, then `upper, lower` per pair.
    pub fn values(&self) -> Vec<Complex64> {
        std::iter::once(Complex64::new(self.lambda0, 0.0))
            .chain(self.pairs.iter().flat_map(|p| [p.upper(), p.lower()]))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub pairs: Vec<ModePair>,
    pub channel: Channel,
    pub mode: SpectrumMode,
}

impl ZeroSet {
    pub fn values(&self) -> Vec<Complex64> {
        self.pairs.iter().flat_map(|p| [p.upper(), p.lower()]).collect()
    }
}

fn finite_frequencies(consts: &DerivedConstants, n: usize, f: impl Fn(usize) -> f64) -> Vec<ModePair> {
    let c_over_dl = consts.speed_of_sound * n as f64 / consts.length;
    (1..=n)
        .map(|k| ModePair::from_frequency(consts.alpha, 2.0 * c_over_dl * f(k).sin()))
        .collect()
}

pub fn eigenvalues_closed_form(consts: &DerivedConstants, n_segments: usize) -> Result<Spectrum> {
    if n_segments == 0 {
        return Err(Error::NoSegments);
    }
    let n1 = (n_segments + 1) as f64;
    Ok(Spectrum {
        lambda0: 0.0,
        pairs: finite_frequencies(consts, n_segments, |k| k as f64 * PI / (2.0 * n1)),
        mode: SpectrumMode::Finite(n_segments),
    })
}

pub fn eigenvalues_asymptotic(consts: &DerivedConstants, k_max: usize) -> Spectrum {
    Spectrum {
        lambda0: 0.0,
        pairs: (1..=k_max)
            .map(|k| ModePair::from_frequency(consts.alpha, k as f64 * PI / consts.t_d))
            .collect(),
        mode: SpectrumMode::Asymptotic,
    }
}

pub fn zeros_closed_form(consts: &DerivedConstants, n_segments: usize, channel: Channel) -> Result<ZeroSet> {
    if n_segments == 0 {
        return Err(Error::NoSegments);
    }
    let pairs = if channel.is_direct() {
        let d = (2 * (2 * n_segments + 1)) as f64;
        finite_frequencies(consts, n_segments, |k| (2 * k - 1) as f64 * PI / d)
    } else {
        Vec::new()
    };
    Ok(ZeroSet {
        pairs,
        channel,
        mode: SpectrumMode::Finite(n_segments),
    })
}

pub fn zeros_asymptotic(consts: &DerivedConstants, k_max: usize, channel: Channel) -> ZeroSet {
    let pairs = if channel.is_direct() {
        (1..=k_max)
            .map(|k| ModePair::from_frequency(consts.alpha, (2 * k - 1) as f64 * PI / (2.0 * consts.t_d)))
            .collect()
    } else {
        Vec::new()
    };
    ZeroSet {
        pairs,
        channel,
        mode: SpectrumMode::Asymptotic,
    }
}

/// Ones on the `N + 1` pressure states, zeros on the flows.
pub fn null_eigenvector(n_segments: usize) -> Vec<f64> {
    (0..2 * n_segments + 1)
        .map(|i| if i <= n_segments { 1.0 } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    Finite(usize),
    Asymptotic,
}

/// Residue of the direct channel at the integrator pole.
pub fn gain(consts: &DerivedConstants, mode: GainMode) -> f64 {
    match mode {
        GainMode::Finite(n) => consts.k_g * n as f64 / (n as f64 + 1.0),
        GainMode::Asymptotic => consts.k_g,
    }
}

/// Projection `(v0' v0)^{-1} v0' b1` of the first input column onto the null
/// eigenvector.
pub fn projected_gain(model: &StateSpaceModel) -> f64 {
    let v0 = null_eigenvector(model.n_segments);
    let num: f64 = v0.iter().zip(model.b.column(0).iter()).map(|(v, b)| v * b).sum();
    let den: f64 = v0.iter().map(|v| v * v).sum();
    num / den
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub numeric: Vec<Complex64>,
    /// `(claimed, matched numeric)` in claim order.
    pub pairs: Vec<(Complex64, Complex64)>,
    pub max_mismatch: f64,
    pub tolerance: f64,
}

impl MatchReport {
    pub fn passed(&self) -> bool {
        self.max_mismatch <= self.tolerance
    }

    /// Largest `|Re|` over the numeric values, relative to the largest modulus.
    pub fn max_relative_real_part(&self) -> f64 {
        let scale = self.numeric.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        self.numeric.iter().map(|z| z.re.abs()).fold(0.0, f64::max) / scale
    }
}

/// Greedy nearest-neighbour matching of claimed values against numeric ones.
/// The pass threshold is `rel_tol * max(1, max|lambda|)`.
pub fn match_values(claimed: &[Complex64], numeric: Vec<Complex64>, rel_tol: f64) -> Result<MatchReport> {
    if claimed.len() != numeric.len() {
        return Err(Error::DimensionMismatch {
            what: "spectrum size",
            expected: numeric.len(),
            found: claimed.len(),
        });
    }
    let mut used = vec![false; numeric.len()];
    let mut pairs = Vec::with_capacity(claimed.len());
    let mut max_mismatch = 0.0f64;
    for &z in claimed {
        let (idx, dist) = numeric
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, w)| (i, (w - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("equal lengths");
        used[idx] = true;
        pairs.push((z, numeric[idx]));
        max_mismatch = max_mismatch.max(dist);
    }
    let scale = claimed
        .iter()
        .chain(&numeric)
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    Ok(MatchReport {
        numeric,
        pairs,
        max_mismatch,
        tolerance: rel_tol * scale,
    })
}

/// Default relative tolerance for spectrum matching.
pub const SPECTRUM_TOLERANCE: f64 = 1e-8;

/// Compares a closed-form spectrum with the dense eigensolver applied to
/// `model.a`.
pub fn validate_spectrum(model: &StateSpaceModel, spectrum: &Spectrum) -> Result<MatchReport> {
    if spectrum.mode != SpectrumMode::Finite(model.n_segments) {
        return Err(Error::DimensionMismatch {
            what: "spectrum segment count",
            expected: model.n_segments,
            found: match spectrum.mode {
                SpectrumMode::Finite(n) => n,
                SpectrumMode::Asymptotic => 0,
            },
        });
    }
    match_values(&spectrum.values(), eig::eigenvalues(&model.a)?, SPECTRUM_TOLERANCE)
}

/// Zeros of the direct channels computed numerically: with the intake
/// pressure clamped to zero, the remaining states evolve under `a` with its
/// first row and column removed.
pub fn numeric_direct_zeros(model: &StateSpaceModel) -> Result<Vec<Complex64>> {
    let n = model.n_states();
    let sub = DMatrix::from_fn(n - 1, n - 1, |i, j| model.a[(i + 1, j + 1)]);
    eig::eigenvalues(&sub)
}

pub fn validate_zeros(model: &StateSpaceModel, zeros: &ZeroSet) -> Result<MatchReport> {
    if !zeros.channel.is_direct() {
        return match_values(&[], Vec::new(), SPECTRUM_TOLERANCE);
    }
    match_values(&zeros.values(), numeric_direct_zeros(model)?, SPECTRUM_TOLERANCE)
}

/// Largest `|<v_i, v0>| / (|v_i| |v0|)` over eigenvectors `v_i` of the nonzero
/// eigenvalues.
pub fn null_vector_orthogonality(model: &StateSpaceModel) -> Result<f64> {
    let v0 = null_eigenvector(model.n_segments);
    let v0_norm = (v0.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let values = eig::eigenvalues(&model.a)?;
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut worst = 0.0f64;
    for lambda in values {
        if lambda.norm() <= 1e-9 * scale {
            continue;
        }
        let v = eig::eigenvector(&model.a, lambda)?;
        let dot: Complex64 = v.iter().zip(&v0).map(|(z, w)| z * w).sum();
        worst = worst.max(dot.norm() / v0_norm);
    }
    Ok(worst)
}
