use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid stochastic matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// The evaluated transition matrix at some distribution is not stochastic.
    #[error("kernel invalid at mu = {mu:?}: entry ({row}, {col}) {reason}")]
    KernelInvalidAt {
        mu: Vec<f64>,
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    /// A linear-part entry is positive where the kernel vanishes.
    #[error("perturbation ratio is unbounded at entry ({row}, {col})")]
    InfiniteGamma { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("series too short: need {needed}, found {found}")]
    TooShort { needed: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{context}: {source}")]
    Labeled {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn labeled(self, context: impl Into<String>) -> Self {
        Error::Labeled {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping any context labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Labeled { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code used by the command-line front end:
    /// 2 for input/validation problems, 3 for numerical nonconvergence.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::NonConvergence { .. } | Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
