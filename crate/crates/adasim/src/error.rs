use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),

    #[error("non-finite value in {context}: {value}")]
    NonFinite { context: String, value: f64 },

    #[error("insufficient training traces: need at least {needed}, got {got}")]
    InsufficientTraces { needed: usize, got: usize },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Other(String),
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub fn non_finite(context: impl Into<String>, value: f64) -> Self {
        SimError::NonFinite {
            context: context.into(),
            value,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code per the CLI contract: 2 for config errors, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) | SimError::InsufficientTraces { .. } => 2,
            SimError::Io { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
