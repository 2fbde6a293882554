use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("rank deficient: {0}")]
    Rank(String),
    #[error("rejected measurement: {0}")]
    Measurement(String),
    #[error("simulation diverged at t = {t:.6} s: {reason}")]
    Divergence { t: f64, reason: String },
    #[error("search failed: {0}")]
    Search(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Input(_) => "input",
            Error::Rank(_) => "rank",
            Error::Measurement(_) => "measurement",
            Error::Divergence { .. } => "divergence",
            Error::Search(_) => "search",
        }
    }

    /// The message without the kind prefix.
    pub fn detail(&self) -> String {
        match self {
            Error::Dimension(m) | Error::Input(m) | Error::Rank(m) | Error::Measurement(m) | Error::Search(m) => {
                m.clone()
            }
            Error::Divergence { t, reason } => format!("at t = {t:.6} s: {reason}"),
        }
    }
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
