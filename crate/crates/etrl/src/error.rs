use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    /// A derivative evaluation produced a non-finite value inside an RK4 stage.
    #[error("integration fault at t={t}: non-finite derivative in RK4 stage {stage}")]
    IntegrationFault { t: f64, stage: usize },

    /// A plant field (f0, g0, delta_f, delta_g, f_z, eta) evaluated non-finite.
    #[error("plant evaluation fault in field `{field}` at t={t}")]
    PlantEval { field: &'static str, t: f64 },

    #[error("observer fault: {0}")]
    ObserverFault(String),

    /// A runtime bound from the config was exceeded (trajectory escaped).
    #[error("guard violated at t={t}: {what}")]
    GuardViolation { t: f64, what: String },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for validation problems, 3 for
    /// runtime integration faults, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::IntegrationFault { .. }
            | Error::PlantEval { .. }
            | Error::ObserverFault(_)
            | Error::GuardViolation { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
