use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid config at `{path}`: {message}")]
    InvalidConfig { path: String, message: String },
    #[error("{0} is not supported for this spec")]
    Unsupported(String),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("series did not converge within {0} steps")]
    NotConverged(u64),
    #[error("output directory {0} already contains results (use --force)")]
    OutputExists(String),
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
