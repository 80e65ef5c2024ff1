use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller supplied a value outside the documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested quantity needs more resolution than the input provides.
    #[error("range error: {0}")]
    Range(String),

    /// A numerical procedure failed its own accuracy check.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("no bound state: {0}")]
    NoBoundState(String),

    /// The requested level is not isolated from the rest of the spectrum.
    #[error("resonance condition violated: {0}")]
    NotIsolated(String),

    #[error("continuation lost the branch at kappa = {kappa}: {reason}")]
    Continuation { kappa: f64, completed: usize, reason: String },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("fit quality: {0}")]
    FitQuality(String),

    /// The input lies outside the cases a law or method covers.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn accuracy(msg: impl Into<String>) -> Self {
        Error::Accuracy(msg.into())
    }

    /// Accuracy and solver problems map to a different process exit code
    /// than bad input in the command-line driver.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain(_) | Error::Range(_) | Error::Unsupported(_))
    }
}
