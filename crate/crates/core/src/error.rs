use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: {0}")]
    Shape(String),

    #[error("consistency violation: {0}")]
    Consistency(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io(_) | Error::Format(_) => 3,
            Error::Solver { .. } | Error::Numerical(_) | Error::Consistency(_) => 4,
            Error::Shape(_) | Error::Domain(_) | Error::Precondition(_) => 5,
        }
    }

    /// Short machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Consistency(_) => "consistency",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Solver { .. } => "solver",
            Error::Numerical(_) => "numerical",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
