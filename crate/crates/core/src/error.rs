use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("(sigma={sigma}, tau={tau}) is outside the admissible GGP region")]
    OutOfRegion { sigma: f64, tau: f64 },
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tail intensity value {y} exceeds the finite total Lévy mass {total}")]
    NotInvertible { y: f64, total: f64 },
    #[error("node groups overlap")]
    Overlap,
    #[error("total mass is zero; no edges can be generated")]
    DegenerateMass,
    #[error("inconsistent sampler state: {0}")]
    InconsistentState(String),
    #[error("need at least {needed} chains, got {got}")]
    TooFewChains { needed: usize, got: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
