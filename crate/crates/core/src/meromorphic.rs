//! Pole expansions of the two delay kernels behind the compact model.
//!
//! ```text
//! Fe(S) = exp(-T S) / (1 - exp(-2 T S)) = 1 / (2 sinh(T S))
//! Fo(S) = exp(-T S) / (1 + exp(-2 T S)) = 1 / (2 cosh(T S))
//! ```
//!
//! `Fe` (the function `f`) has simple poles at `j k pi / T` with residues
//! `(-1)^k / (2T)`. `Fo` (the function `v`) has simple poles at
//! `j (2k + 1) pi / (2T)` with residues `j (-1)^(k+1) / (2T)`, `k` ranging over
//! all integers. Both expansions converge only conditionally, so partial sums
//! always add a pole together with its mirror image.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::CompensatedComplex;
use crate::transferfn::exp_m1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `f = Fe`, poles at integer multiples of `j pi / T`.
    Even,
    /// `v = Fo`, poles at odd multiples of `j pi / (2T)`.
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm {
    pub k: i64,
    pub pole: Complex64,
    pub residue: Complex64,
}

impl ExpansionTerm {
    pub fn new(family: Family, t_d: f64, k: i64) -> Self {
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        match family {
            Family::Even => Self {
                k,
                pole: Complex64::new(0.0, k as f64 * PI / t_d),
                residue: Complex64::new(sign / (2.0 * t_d), 0.0),
            },
            Family::Odd => Self {
                k,
                pole: Complex64::new(0.0, (2 * k + 1) as f64 * PI / (2.0 * t_d)),
                residue: Complex64::new(0.0, -sign / (2.0 * t_d)),
            },
        }
    }

    /// Index whose pole is the complex conjugate of this one.
    pub fn mirror(family: Family, k: i64) -> i64 {
        match family {
            Family::Even => -k,
            Family::Odd => -1 - k,
        }
    }

    fn at(&self, s: Complex64) -> Complex64 {
        self.residue / (s - self.pole)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub near_pole: bool,
}

fn nearest_pole(family: Family, t_d: f64, s: Complex64) -> Complex64 {
    let step = PI / t_d;
    match family {
        Family::Even => Complex64::new(0.0, (s.im / step).round() * step),
        Family::Odd => Complex64::new(0.0, ((s.im / step - 0.5).round() + 0.5) * step),
    }
}

fn pole_check(family: Family, t_d: f64, s: Complex64) -> bool {
    let p = nearest_pole(family, t_d, s);
    (s - p).norm() < crate::transferfn::NEAR_POLE * p.norm().max(PI / t_d)
}

/// Direct evaluation of `Fe` or `Fo` from the exponential form.
pub fn eval_closed(family: Family, s: Complex64, t_d: f64) -> Result<Evaluation> {
    // both kernels have definite parity; evaluate on Re >= 0 where exp(-TS) is bounded
    let (z, flip) = if s.re < 0.0 { (-s, true) } else { (s, false) };
    let decay = (-t_d * z).exp();
    let den = match family {
        Family::Even => -exp_m1(-2.0 * t_d * z),
        Family::Odd => 1.0 + (-2.0 * t_d * z).exp(),
    };
    if den.norm() == 0.0 {
        return Err(Error::AtPole { re: s.re, im: s.im });
    }
    let mut value = decay / den;
    if flip && family == Family::Even {
        value = -value;
    }
    Ok(Evaluation {
        value,
        near_pole: pole_check(family, t_d, s),
    })
}

/// Expansion terms for the given index range.
pub fn residues(family: Family, t_d: f64, ks: impl IntoIterator<Item = i64>) -> Vec<ExpansionTerm> {
    ks.into_iter().map(|k| ExpansionTerm::new(family, t_d, k)).collect()
}

/// Symmetric partial sum: `k = -M..M` for `Even`, the `M` conjugate pairs
/// nearest the real axis for `Odd`. Each pole is added together with its mirror.
pub fn partial_fraction_sum(family: Family, t_d: f64, m: usize, s: Complex64) -> Result<Evaluation> {
    partial_fraction_sum_scaled(family, t_d, m, s, 1.0)
}

fn partial_fraction_sum_scaled(family: Family, t_d: f64, m: usize, s: Complex64, scale: f64) -> Result<Evaluation> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "M",
            reason: "truncation must be at least 1".into(),
        });
    }
    let mut acc = CompensatedComplex::default();
    let pair = |k: i64| {
        let a = ExpansionTerm::new(family, t_d, k);
        let b = ExpansionTerm::new(family, t_d, ExpansionTerm::mirror(family, k));
        (a.at(s) + b.at(s)) * scale
    };
    match family {
        Family::Even => {
            acc.add(ExpansionTerm::new(family, t_d, 0).at(s) * scale);
            for k in 1..=m as i64 {
                acc.add(pair(k));
            }
        }
        Family::Odd => {
            for k in 0..m as i64 {
                acc.add(pair(k));
            }
        }
    }
    let value = acc.value();
    if !value.is_finite() {
        return Err(Error::AtPole { re: s.re, im: s.im });
    }
    Ok(Evaluation {
        value,
        near_pole: pole_check(family, t_d, s),
    })
}

/// Unpaired sum over `k = 0..=M` only. Converges, but not to the kernel.
pub fn one_sided_sum(family: Family, t_d: f64, m: usize, s: Complex64) -> Complex64 {
    let mut acc = CompensatedComplex::default();
    for k in 0..=m as i64 {
        acc.add(ExpansionTerm::new(family, t_d, k).at(s));
    }
    acc.value()
}

/// Numeric residue at `pole`: the mean of `(s - pole) F(s)` over `points`
/// equally spaced samples on a circle of radius `radius`.
pub fn numeric_residue(family: Family, t_d: f64, pole: Complex64, radius: f64, points: usize) -> Result<Complex64> {
    let mut acc = CompensatedComplex::default();
    for i in 0..points {
        let theta = 2.0 * PI * (i as f64 + 0.5) / points as f64;
        let offset = Complex64::from_polar(radius, theta);
        acc.add(offset * eval_closed(family, pole + offset, t_d)?.value);
    }
    Ok(acc.value() / points as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySample {
    pub s: Complex64,
    /// `sum (-1)^k / (S - j k pi / T)` against `2 T Fe(S)`.
    pub even_sum: Complex64,
    pub even_closed: Complex64,
    /// `sum 2 c_k / (S - mu_k)` against `2 Fo(S)`.
    pub odd_sum: Complex64,
    pub odd_closed: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub truncation: usize,
    pub samples: Vec<IdentitySample>,
    pub max_even_deviation: f64,
    pub max_odd_deviation: f64,
}

impl IdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_even_deviation.max(self.max_odd_deviation)
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_deviation() <= tolerance
    }
}

/// Checks `Ge = 2 T Fe` and `Go = 2 Fo` at each sample, where `Ge`, `Go` are the
/// symmetric pole expansions with numerators `2T a_k` and `2 c_k`.
pub fn verify_identities(t_d: f64, points: &[Complex64], m: usize) -> Result<IdentityReport> {
    let mut samples = Vec::with_capacity(points.len());
    let (mut max_even, mut max_odd) = (0.0f64, 0.0f64);
    for &s in points {
        let even_sum = partial_fraction_sum_scaled(Family::Even, t_d, m, s, 2.0 * t_d)?.value;
        let odd_sum = partial_fraction_sum_scaled(Family::Odd, t_d, m, s, 2.0)?.value;
        let even_closed = 2.0 * t_d * eval_closed(Family::Even, s, t_d)?.value;
        let odd_closed = 2.0 * eval_closed(Family::Odd, s, t_d)?.value;
        max_even = max_even.max((even_sum - even_closed).norm());
        max_odd = max_odd.max((odd_sum - odd_closed).norm());
        samples.push(IdentitySample {
            s,
            even_sum,
            even_closed,
            odd_sum,
            odd_closed,
        });
    }
    Ok(IdentityReport {
        truncation: m,
        samples,
        max_even_deviation: max_even,
        max_odd_deviation: max_odd,
    })
}

/// Deterministic sample points in the strip `|Im S| T / pi < bound`, at least
/// `0.05 pi / T` away from every pole of either kernel.
pub fn strip_samples(t_d: f64, count: usize, bound: f64, seed: u64) -> Vec<Complex64> {
    let mut state = seed ^ 0x9E37_79B9_7F4A_7C15;
    let mut next = move || {
        // splitmix64
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    };
    let step = PI / t_d;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let re = (2.0 * next() - 1.0) * 3.0 * step;
        let im = (2.0 * next() - 1.0) * bound * step;
        let s = Complex64::new(re, im);
        let gap = 0.05 * step;
        let clear = (s - nearest_pole(Family::Even, t_d, s)).norm() > gap
            && (s - nearest_pole(Family::Odd, t_d, s)).norm() > gap;
        if clear {
            out.push(s);
        }
    }
    out
}
