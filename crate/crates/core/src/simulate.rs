//! Time-domain simulation of the compact delay model.
//!
//! Both compact channels share the form
//! `Y(s) (1 - beta e^{-2sT}) = K (1 + alpha/s) W(s)` with `beta = e^{-2 alpha T}`:
//! the direct channel uses `w(t) = u(t) + beta u(t - 2T)` and the cross channel
//! `w(t) = u(t - T)`. In the time domain this is
//!
//! ```text
//! y(t) = beta y(t - 2T) + K ( w(t) + alpha * integral_0^t w )
//! ```
//!
//! which is evaluated on a grid with `T = m dt`, so every delay is an exact
//! buffer lookup. Only the running integral depends on the input hold.

use crate::error::{Error, Result};
use crate::params::DerivedConstants;
use crate::statespace::{self, DiscretizationGrid, InputHold, IntegrationOptions, Scheme};
use crate::transferfn::{compact_gains, CompactGains};

/// Smallest number of samples per transport delay accepted by [`snap_step`].
pub const MIN_SAMPLES_PER_DELAY: usize = 100;

/// Uniformly sampled named channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, names: Vec<String>, data: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSeries(format!("dt must be finite and > 0, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidSeries(format!("t0 must be finite, got {t0}")));
        }
        if names.len() != data.len() {
            return Err(Error::DimensionMismatch {
                what: "channel names",
                expected: data.len(),
                found: names.len(),
            });
        }
        if let Some(first) = data.first() {
            if let Some(bad) = data.iter().find(|c| c.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    what: "channel length",
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        Ok(Self { t0, dt, names, data })
    }

    /// Two-channel flow input `(q1, q2)`.
    pub fn flows(dt: f64, q1: Vec<f64>, q2: Vec<f64>) -> Result<Self> {
        Self::new(0.0, dt, vec!["q1".into(), "q2".into()], vec![q1, q2])
    }

    /// Samples `f(t)` on `n` points starting at 0.
    pub fn sample(dt: f64, n: usize, f: impl Fn(f64) -> [f64; 2]) -> Result<Self> {
        let (mut q1, mut q2) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let v = f(i as f64 * dt);
            q1.push(v[0]);
            q2.push(v[1]);
        }
        Self::flows(dt, q1, q2)
    }

    pub fn len(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.data.len()
    }

    pub fn time(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.t0 + i as f64 * self.dt).collect()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.data[i].as_slice())
    }

    /// Linear interpolation of irregular samples onto a uniform grid starting at
    /// `t[0]` and ending at or before the last sample.
    pub fn resample_linear(t: &[f64], names: Vec<String>, columns: &[Vec<f64>], dt: f64) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidSeries("no samples".into()));
        }
        if t.iter().any(|x| !x.is_finite()) || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries("time stamps must be finite and strictly increasing".into()));
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != t.len()) {
            return Err(Error::DimensionMismatch {
                what: "column length",
                expected: t.len(),
                found: bad.len(),
            });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSeries(format!("dt must be finite and > 0, got {dt}")));
        }
        let t0 = t[0];
        let span = t[t.len() - 1] - t0;
        let n = (span / dt * (1.0 + 1e-12)).floor() as usize + 1;
        let mut out = vec![Vec::with_capacity(n); columns.len()];
        let mut seg = 0;
        for i in 0..n {
            let ti = (t0 + i as f64 * dt).min(t[t.len() - 1]);
            while seg + 2 < t.len() && t[seg + 1] < ti {
                seg += 1;
            }
            if t.len() == 1 {
                for (o, c) in out.iter_mut().zip(columns) {
                    o.push(c[0]);
                }
                continue;
            }
            let (ta, tb) = (t[seg], t[seg + 1]);
            let w = ((ti - ta) / (tb - ta)).clamp(0.0, 1.0);
            for (o, c) in out.iter_mut().zip(columns) {
                o.push(c[seg] + w * (c[seg + 1] - c[seg]));
            }
        }
        Self::new(t0, dt, names, out)
    }
}

/// Snaps a requested step to `T_d / m` with integer `m >= 100` nearest to it.
pub fn snap_step(t_d: f64, requested: f64) -> Result<(f64, usize)> {
    if !(requested.is_finite() && requested > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be finite and > 0, got {requested}"),
        });
    }
    let m = ((t_d / requested).round() as usize).max(MIN_SAMPLES_PER_DELAY);
    Ok((t_d / m as f64, m))
}

/// Number of whole samples per transport delay, or an error if `dt` does not
/// divide it.
pub fn delay_samples(t_d: f64, dt: f64) -> Result<usize> {
    let ratio = t_d / dt;
    let m = ratio.round();
    if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio {
        return Err(Error::NonDivisibleStep { dt, t_d });
    }
    Ok(m as usize)
}

/// Fixed coefficients of the delay recursion on a given grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayRealization {
    pub delay_samples: usize,
    pub dt: f64,
    pub beta: f64,
    pub k_11: f64,
    pub k_21: f64,
    pub alpha: f64,
    pub k_g: f64,
}

impl DelayRealization {
    pub fn new(consts: &DerivedConstants, dt: f64) -> Result<Self> {
        let delay_samples = delay_samples(consts.t_d, dt)?;
        let CompactGains { k_11, k_21, beta } = compact_gains(consts);
        Ok(Self {
            delay_samples,
            dt,
            beta,
            k_11,
            k_21,
            alpha: consts.alpha,
            k_g: consts.k_g,
        })
    }

    fn channel(&self, u: &[f64], cross: bool, hold: InputHold) -> Vec<f64> {
        let m = self.delay_samples;
        let gain = if cross { self.k_21 } else { self.k_11 };
        let past = |k: usize, lag: usize| if k >= lag { u[k - lag] } else { 0.0 };
        let mut y = Vec::with_capacity(u.len());
        let mut integral = 0.0;
        let mut w_prev = 0.0;
        for n in 0..u.len() {
            let w = if cross {
                past(n, m)
            } else {
                u[n] + self.beta * past(n, 2 * m)
            };
            if n > 0 {
                integral += match hold {
                    InputHold::Zero => w_prev * self.dt,
                    InputHold::Linear => 0.5 * (w_prev + w) * self.dt,
                };
            }
            w_prev = w;
            let echo = if n >= 2 * m { self.beta * y[n - 2 * m] } else { 0.0 };
            y.push(echo + gain * (w + self.alpha * integral));
        }
        y
    }
}

/// Sign convention for the offtake flow `q2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OfftakeConvention {
    /// `q2` leaves the pipe: `p2 = G21 q1 - G11 q2`. Agrees with the
    /// state-space input matrix.
    #[default]
    Outflow,
    /// `p2 = G21 q1 + G11 q2`.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LumpedOptions {
    pub offtake: OfftakeConvention,
    pub hold: InputHold,
    /// Steady intake and offtake pressures added to the deviations.
    pub baseline: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LumpedOutput {
    /// Channels `p1`, `p2` on the input grid.
    pub pressures: TimeSeries,
    /// Set when the horizon is shorter than one round trip `2 T_d`.
    pub transient_only: bool,
}

/// Intake and offtake pressure deviations of the compact model driven by the
/// flows in the first two channels of `inputs`.
pub fn lumped_simulate(
    consts: &DerivedConstants,
    inputs: &TimeSeries,
    options: LumpedOptions,
) -> Result<LumpedOutput> {
    if inputs.channels() < 2 {
        return Err(Error::DimensionMismatch {
            what: "input channels",
            expected: 2,
            found: inputs.channels(),
        });
    }
    let real = DelayRealization::new(consts, inputs.dt)?;
    let (q1, q2) = (&inputs.data[0], &inputs.data[1]);
    let hold = options.hold;
    let ((d1, x1), (d2, x2)) = rayon::join(
        || (real.channel(q1, false, hold), real.channel(q1, true, hold)),
        || (real.channel(q2, false, hold), real.channel(q2, true, hold)),
    );
    let [b1, b2] = options.baseline.unwrap_or([0.0, 0.0]);
    let p1: Vec<f64> = d1.iter().zip(&x2).map(|(a, b)| b1 + a - b).collect();
    let p2: Vec<f64> = match options.offtake {
        OfftakeConvention::Outflow => x1.iter().zip(&d2).map(|(a, b)| b2 + a - b).collect(),
        OfftakeConvention::AsPrinted => x1.iter().zip(&d2).map(|(a, b)| b2 + a + b).collect(),
    };
    let transient_only = (inputs.len() as f64 - 1.0) < 2.0 * real.delay_samples as f64;
    Ok(LumpedOutput {
        pressures: TimeSeries::new(inputs.t0, inputs.dt, vec!["p1".into(), "p2".into()], vec![p1, p2])?,
        transient_only,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosscheckOptions {
    pub segments: usize,
    pub hold: InputHold,
    pub scheme: Scheme,
}

impl Default for CrosscheckOptions {
    fn default() -> Self {
        Self {
            segments: 400,
            hold: InputHold::Linear,
            scheme: Scheme::Trapezoidal,
        }
    }
}

/// Discrepancy statistics for one output channel, state-space as reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDiscrepancy {
    pub rms: f64,
    pub max: f64,
    pub reference_rms: f64,
}

impl ChannelDiscrepancy {
    pub fn relative_rms(&self) -> f64 {
        self.rms / self.reference_rms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub p1: ChannelDiscrepancy,
    pub p2: ChannelDiscrepancy,
    /// Samples at or after `2 T_d` that entered the statistics.
    pub samples_compared: usize,
    pub compact: TimeSeries,
    pub state_space: TimeSeries,
}

fn discrepancy(reference: &[f64], other: &[f64]) -> ChannelDiscrepancy {
    let n = reference.len().max(1) as f64;
    let mut sq = 0.0;
    let mut ref_sq = 0.0;
    let mut max = 0.0f64;
    for (r, o) in reference.iter().zip(other) {
        let d = o - r;
        sq += d * d;
        ref_sq += r * r;
        max = max.max(d.abs());
    }
    ChannelDiscrepancy {
        rms: (sq / n).sqrt(),
        max,
        reference_rms: (ref_sq / n).sqrt(),
    }
}

/// Runs the compact model and the `N`-segment state-space model on the same
/// input and compares them after the first round trip `2 T_d`.
pub fn crosscheck(
    consts: &DerivedConstants,
    inputs: &TimeSeries,
    options: CrosscheckOptions,
) -> Result<CrosscheckReport> {
    let grid = DiscretizationGrid::for_pipe(consts, options.segments)?;
    let model = statespace::build_state_space(consts, &grid)?;
    let m = delay_samples(consts.t_d, inputs.dt)?;
    let lumped_opts = LumpedOptions {
        hold: options.hold,
        ..Default::default()
    };
    let integ_opts = IntegrationOptions {
        scheme: options.scheme,
        hold: options.hold,
        record_states: false,
    };
    let (compact, ss) = rayon::join(
        || lumped_simulate(consts, inputs, lumped_opts),
        || statespace::integrate(&model, inputs, None, integ_opts),
    );
    let compact = compact?.pressures;
    let ss = ss?;
    let start = (2 * m).min(ss.y1.len());
    let p1 = discrepancy(&ss.y1[start..], &compact.data[0][start..]);
    let p2 = discrepancy(&ss.y2[start..], &compact.data[1][start..]);
    let state_space = TimeSeries::new(inputs.t0, inputs.dt, vec!["p1".into(), "p2".into()], vec![ss.y1, ss.y2])?;
    Ok(CrosscheckReport {
        p1,
        p2,
        samples_compared: state_space.len() - start,
        compact,
        state_space,
    })
}
