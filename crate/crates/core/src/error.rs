use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pressure collapse at {position:.3} m: steady profile discriminant {discriminant:.6e} is not positive")]
    PressureCollapse { position: f64, discriminant: f64 },

    #[error("number of segments must be at least 1")]
    NoSegments,

    #[error("model with {states} states exceeds the configured cap of {cap}")]
    TooManyStates { states: usize, cap: usize },

    #[error("unstable step size: dt = {dt:.6e} s but dt * max|Im lambda| = {product:.4} exceeds {limit}")]
    UnstableStep { dt: f64, product: f64, limit: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("time step {dt:.9e} s does not divide the transport delay {t_d:.9e} s")]
    NonDivisibleStep { dt: f64, t_d: f64 },

    #[error("evaluation point coincides with a pole at s = {re:+.6e}{im:+.6e}j")]
    AtPole { re: f64, im: f64 },

    #[error("resolvent solve is singular at s = {re:+.6e}{im:+.6e}j")]
    SingularResolvent { re: f64, im: f64 },

    #[error("dense eigensolver did not converge on a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("config: {0}")]
    Config(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
