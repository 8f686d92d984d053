use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A configuration value is out of range or inconsistent with another.
    #[error("invalid `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("breakdown point violated: require N > 2f (N={n}, f={f})")]
    BreakdownPoint { n: usize, f: usize },

    #[error("degenerate validation gradient: norm is zero")]
    DegenerateValidation,

    /// The fastest-k filter accepted nothing this round.
    #[error("no gradient accepted")]
    NoneAccepted,

    #[error("resilience condition violated: sin(alpha) = {sin_alpha} >= 1")]
    ResilienceViolated { sin_alpha: f64 },

    #[error("attack degenerate: {0}")]
    AttackDegenerate(String),

    /// Malformed binary input; `field` names the offending header field.
    #[error("{field}: {detail}")]
    Format { field: &'static str, detail: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("iteration {t}: {source}")]
    AtIteration { t: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn at_iteration(self, t: usize) -> Self {
        match self {
            e @ Error::AtIteration { .. } => e,
            e => Error::AtIteration {
                t,
                source: Box::new(e),
            },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
