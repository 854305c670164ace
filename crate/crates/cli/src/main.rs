use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gaspipe_core::io as csvio;
use gaspipe_core::params::{REFERENCE_ALPHA_PRINTED, REFERENCE_GAIN_PRINTED};
use gaspipe_core::simulate::{self, LumpedOptions, OfftakeConvention};
use gaspipe_core::statespace::{InputHold, IntegrationOptions};
use gaspipe_core::transferfn::{self, Channel, Evaluator, FrequencyGrid, PhaseMode};
use gaspipe_core::{build_state_space, derive_constants, spectral, steady_profile, DiscretizationGrid, PipeParameters};

mod validate;

/// Linear models of a high-pressure gas pipe: spectra, frequency responses and
/// time-domain simulation.
#[derive(Debug, Parser)]
#[command(name = "gaspipe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Pipe parameters as JSON (length_m, diameter_m, friction_factor,
    /// speed_of_sound_m_s, nominal_massflow_kg_s, nominal_pressure_pa).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct Output {
    /// Write CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Output {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the derived constants.
    Constants {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form eigenvalues as CSV `k,re,im`.
    Eigen {
        #[command(flatten)]
        common: Common,
        /// Number of segments.
        #[arg(long, default_value_t = 400)]
        n: usize,
        /// Use the infinite-segment limit instead.
        #[arg(long)]
        asymptotic: bool,
        /// Number of pairs in asymptotic mode.
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Closed-form transfer-function zeros as CSV `k,re,im`.
    Zeros {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ChannelArg::G11)]
        channel: ChannelArg,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long)]
        asymptotic: bool,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Frequency response along the imaginary axis as CSV.
    Bode {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = EvaluatorArg::Compact)]
        evaluator: EvaluatorArg,
        /// Truncation order of the product form.
        #[arg(long, default_value_t = 200)]
        order: usize,
        /// Segments of the state-space model for the resolvent evaluator.
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 1e-4)]
        wmin: f64,
        #[arg(long, default_value_t = 1.0)]
        wmax: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        /// Report phase in (-180, 180] instead of unwrapped.
        #[arg(long)]
        wrapped: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Pressure response to flow time series read from CSV `t,q1,q2`.
    Simulate(SimulateArgs),
    /// Run the internal consistency checks and report each one.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, value_enum, default_value_t = validate::Suite::All)]
        suite: validate::Suite,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: PathBuf,
    /// Requested step; snapped to T_d / m with integer m >= 100.
    #[arg(long)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = ModelArg::Compact)]
    model: ModelArg,
    /// Segments of the state-space model.
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, value_enum, default_value_t = OfftakeArg::Outflow)]
    offtake_sign: OfftakeArg,
    #[arg(long, value_enum, default_value_t = HoldArg::Linear)]
    hold: HoldArg,
    /// Add the steady intake and offtake pressures to the deviations.
    #[arg(long)]
    absolute: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChannelArg {
    G11,
    G12,
    G21,
    G22,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::G11 => Channel::G11,
            ChannelArg::G12 => Channel::G12,
            ChannelArg::G21 => Channel::G21,
            ChannelArg::G22 => Channel::G22,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvaluatorArg {
    Truncated,
    Compact,
    Resolvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Compact,
    Statespace,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OfftakeArg {
    Outflow,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HoldArg {
    Zero,
    Linear,
}

impl From<HoldArg> for InputHold {
    fn from(h: HoldArg) -> Self {
        match h {
            HoldArg::Zero => InputHold::Zero,
            HoldArg::Linear => InputHold::Linear,
        }
    }
}

fn load(path: &Path) -> Result<PipeParameters> {
    PipeParameters::from_json_file(path).with_context(|| format!("cannot load config {}", path.display()))
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("GASPIPE_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("GASPIPE_THREADS must be a positive integer, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn constants(params: &PipeParameters) -> Result<()> {
    let k = derive_constants(params)?;
    let g = transferfn::compact_gains(&k);
    let profile = steady_profile(params, 2)?;
    let gap = 100.0 * (k.k_g - REFERENCE_GAIN_PRINTED) / REFERENCE_GAIN_PRINTED;
    let mut out = io::stdout().lock();
    writeln!(out, "area_m2 = {:.10}", k.area)?;
    writeln!(out, "alpha_per_s = {:.10}", k.alpha)?;
    writeln!(out, "t_d_s = {:.6}", k.t_d)?;
    writeln!(out, "omega0_rad_s = {:.10}", k.omega0)?;
    writeln!(out, "k_g_pa_per_kg = {:.6}", k.k_g)?;
    writeln!(out, "k_11 = {:.6}", g.k_11)?;
    writeln!(out, "k_21 = {:.6}", g.k_21)?;
    writeln!(out, "beta = {:.10}", g.beta)?;
    writeln!(out, "offtake_steady_pressure_pa = {:.3}", profile.offtake())?;
    writeln!(out, "reference_alpha_printed = {REFERENCE_ALPHA_PRINTED}")?;
    writeln!(out, "reference_k_g_printed = {REFERENCE_GAIN_PRINTED}")?;
    writeln!(out, "k_g_gap_to_printed_percent = {gap:.3}")?;
    Ok(())
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let params = load(&args.common.config)?;
    let (input, dt, model, n, out) = (&args.input, args.dt, args.model, args.n, &args.out);
    let hold: InputHold = args.hold.into();
    let k = derive_constants(&params)?;
    let (dt_snapped, m) = simulate::snap_step(k.t_d, dt)?;
    if (dt_snapped - dt).abs() > 1e-12 * dt {
        eprintln!("note: dt snapped from {dt} s to {dt_snapped:.12} s (T_d / {m})");
    }
    let file = File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let samples = csvio::read_flow_csv(file)?;
    let series = gaspipe_core::TimeSeries::resample_linear(
        &samples.t,
        vec!["q1".into(), "q2".into()],
        &[samples.q1, samples.q2],
        dt_snapped,
    )?;
    let baseline = if args.absolute {
        let p = steady_profile(&params, 2)?;
        Some([p.intake(), p.offtake()])
    } else {
        None
    };

    let compact = if model != ModelArg::Statespace {
        let opts = LumpedOptions {
            offtake: match args.offtake_sign {
                OfftakeArg::Outflow => OfftakeConvention::Outflow,
                OfftakeArg::AsPrinted => OfftakeConvention::AsPrinted,
            },
            hold,
            baseline,
        };
        let run = simulate::lumped_simulate(&k, &series, opts)?;
        if run.transient_only {
            eprintln!("note: horizon shorter than 2 T_d; output covers the transient only");
        }
        Some(run.pressures)
    } else {
        None
    };
    let state_space = if model != ModelArg::Compact {
        let grid = DiscretizationGrid::for_pipe(&k, n)?;
        let ss = build_state_space(&k, &grid)?;
        let opts = IntegrationOptions {
            hold,
            ..Default::default()
        };
        let mut r = gaspipe_core::integrate(&ss, &series, None, opts)?;
        if let Some([b1, b2]) = baseline {
            r.y1.iter_mut().for_each(|p| *p += b1);
            r.y2.iter_mut().for_each(|p| *p += b2);
        }
        Some(r)
    } else {
        None
    };

    let time = series.time();
    let w = out.open()?;
    match (&compact, &state_space) {
        (Some(c), None) => csvio::write_pressure_csv(w, &time, &c.data[0], &c.data[1], None)?,
        (None, Some(s)) => csvio::write_pressure_csv(w, &time, &s.y1, &s.y2, None)?,
        (Some(c), Some(s)) => csvio::write_pressure_csv(w, &time, &c.data[0], &c.data[1], Some((&s.y1, &s.y2)))?,
        (None, None) => bail!("no model selected"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Constants { common } => constants(&load(&common.config)?)?,
        Command::Eigen {
            common,
            n,
            asymptotic,
            kmax,
            out,
        } => {
            let k = derive_constants(&load(&common.config)?)?;
            let s = if asymptotic {
                spectral::eigenvalues_asymptotic(&k, kmax)
            } else {
                spectral::eigenvalues_closed_form(&k, n)?
            };
            csvio::write_spectrum_csv(out.open()?, &s)?;
        }
        Command::Zeros {
            common,
            channel,
            n,
            asymptotic,
            kmax,
            out,
        } => {
            let k = derive_constants(&load(&common.config)?)?;
            let z = if asymptotic {
                spectral::zeros_asymptotic(&k, kmax, channel.into())
            } else {
                spectral::zeros_closed_form(&k, n, channel.into())?
            };
            csvio::write_zeros_csv(out.open()?, &z)?;
        }
        Command::Bode {
            common,
            evaluator,
            order,
            n,
            wmin,
            wmax,
            points,
            wrapped,
            out,
        } => {
            let k = derive_constants(&load(&common.config)?)?;
            let evaluator = match evaluator {
                EvaluatorArg::Truncated => Evaluator::Truncated { order },
                EvaluatorArg::Compact => Evaluator::Compact,
                EvaluatorArg::Resolvent => Evaluator::Resolvent { segments: n },
            };
            let grid = FrequencyGrid {
                omega_min: wmin,
                omega_max: wmax,
                points,
            };
            let fr = transferfn::bode(&k, grid, evaluator)?;
            let phase = if wrapped { PhaseMode::Wrapped } else { PhaseMode::Unwrapped };
            csvio::write_bode_csv(out.open()?, &fr, phase)?;
        }
        Command::Simulate(args) => simulate_cmd(&args)?,
        Command::Validate { common, n, suite } => {
            let params = load(&common.config)?;
            return validate::run(&params, n, suite);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
