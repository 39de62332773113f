use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid rank {0}: type A needs n >= 1")]
    InvalidRank(usize),
    #[error("invalid multiplicity {0}: k must be positive and finite")]
    InvalidMultiplicity(f64),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("point outside the closed positive chamber: {0}")]
    OutsideChamber(String),
    #[error("invalid weight exponent {0}: endpoint exponents must exceed -1")]
    InvalidExponent(f64),
    #[error("invalid node count {0}")]
    InvalidNodeCount(usize),
    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },
    #[error("non-finite integrand value: {0}")]
    NonFinite(String),
    #[error("evaluation budget exceeded: {required:.3e} evaluations requested, cap is {cap:.3e}")]
    BudgetExceeded { required: f64, cap: f64 },
    #[error("degenerate argument: {0}")]
    DegenerateArgument(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
