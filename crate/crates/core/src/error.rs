use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    /// A caller broke an operation's precondition (shape, sign, range).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("normal equations are singular or ill-conditioned (pivot {pivot} at index {index})")]
    SolveFailure { index: usize, pivot: f64 },

    #[error("QR iteration did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("Lorenz integration diverged at step {step}")]
    IntegrationDiverged { step: usize },

    #[error("cannot rescale component {component}: all values equal {value}")]
    DegenerateScaler { component: usize, value: f64 },

    #[error("target sequence has zero variance")]
    ZeroVariance,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
