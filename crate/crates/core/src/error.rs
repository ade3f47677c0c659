use thiserror::Error;

/// Errors raised across the emulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("cannot materialize a {rows}x{cols} operator: {required} entries exceed the cap of {cap}")]
    MaterializeCap {
        rows: usize,
        cols: usize,
        required: usize,
        cap: usize,
    },

    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate}, residual {residual:e})")]
    NoConvergence {
        estimate: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("operator norm {norm} exceeds 1 (+{slack:e}); no unitary completion exists")]
    NotContraction { norm: f64, slack: f64 },

    #[error("entry magnitude {value} exceeds 1 at ({row}, {col})")]
    MaxNormExceeded { value: f64, row: usize, col: usize },

    #[error("weight condition violated at node {node}, direction {direction}: w_i|1 + c_i.u/c_s^2| = {value}")]
    WeightCondition {
        node: usize,
        direction: usize,
        value: f64,
    },

    #[error("incompatible block-encodings: {0}")]
    IncompatibleEncodings(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
