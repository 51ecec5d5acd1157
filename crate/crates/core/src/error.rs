use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("random regular generation failed after {restarts} restarts (n={n}, d={d})")]
    GenerationFailure { n: usize, d: usize, restarts: usize },

    #[error("power iteration did not converge: best estimate {estimate}, residual {residual:e} after {iterations} iterations")]
    Spectral {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("bias error: {0}")]
    Bias(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Every violated field is listed, not just the first.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
