use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not supported for the given configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An assembled object failed an internal consistency check.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// A dense linear system could not be factored.
    #[error("singular linear system: {0}")]
    Singular(String),

    /// The Picard iteration did not reach its tolerance.
    #[error("picard iteration did not converge after {iterations} iterations (last change {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// An error raised while advancing a particular time step.
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// A convergence study failed at one of its resolution levels.
    #[error("level {level} (resolution {resolution}): {source}")]
    Level {
        level: usize,
        resolution: usize,
        #[source]
        source: Box<Error>,
    },

    /// Malformed text input (tables, matrix dumps).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Walks through step/level wrappers to the originating error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } | Error::Level { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the originating failure is a Picard nonconvergence.
    pub fn is_nonconvergence(&self) -> bool {
        matches!(self.root(), Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
