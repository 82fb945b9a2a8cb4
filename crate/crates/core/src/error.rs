use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("item {item} is out of range for {n} items")]
    ItemOutOfRange { item: usize, n: usize },

    #[error("state {state} is out of range for an alphabet of {size} states")]
    StateOutOfRange { state: usize, size: usize },

    #[error("item {item} already has a state")]
    PositionAlreadySet { item: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid cost vector: {0}")]
    InvalidCost(String),

    #[error("invalid utility: {0}")]
    InvalidUtility(String),

    #[error("sample is empty; the sample distribution is undefined")]
    EmptySample,

    #[error("malformed decision tree: {0}")]
    MalformedTree(String),

    #[error("enumeration of {size} points exceeds the limit of {limit}")]
    EnumerationTooLarge { size: u128, limit: u128 },

    #[error("oracle budget exceeded: {0}")]
    OracleBudgetExceeded(String),

    #[error("no valid (b, i, state) triple: every partial realization already reaches the goal")]
    NoValidTriple,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("goal unreachable: {0}")]
    GoalUnreachable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
