use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("angle of attack {alpha_deg:.3} deg outside aerodynamic table [{min_deg}, {max_deg}] deg")]
    OutOfTableRange { alpha_deg: f64, min_deg: f64, max_deg: f64 },

    #[error("non-finite state derivative ({0})")]
    NonFiniteDerivative(&'static str),

    #[error("observer estimate became non-finite")]
    NonFiniteEstimate,

    #[error("trim did not converge after {iterations} iterations (residual {residual:.3e})")]
    TrimNotConverged { iterations: usize, residual: f64 },

    #[error("invalid observer parameters: {}", .0.join(", "))]
    InvalidObserver(Vec<String>),

    #[error("invalid configuration: {key}: {reason}")]
    Config { key: String, reason: String },

    #[error("unknown key `{key}`; valid keys: {}", .valid.join(", "))]
    UnknownKey { key: String, valid: Vec<String> },

    #[error("aerodynamic model: {0}")]
    AeroModel(String),

    #[error("model abort at t = {t:.4} s: {source}")]
    Abort {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
