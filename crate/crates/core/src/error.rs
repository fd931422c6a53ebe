use thiserror::Error;

/// Errors raised by instance construction, solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no move available: configuration has no conflicting vertices")]
    NoMove,

    #[error("search space too large for exhaustive enumeration: {0}")]
    SearchSpaceTooLarge(String),

    #[error(
        "{n} qubits exceed the cap of {cap}: the state vector grows as 2^N \
         (2^{n} = {states} amplitudes, {elements} operator elements)"
    )]
    DimensionCap { n: usize, cap: usize, states: u128, elements: u128 },

    #[error("norm drift {drift:.3e} exceeds tolerance {tolerance:.1e} at t = {time}; reduce dt")]
    NormDrift { drift: f64, tolerance: f64, time: f64 },

    #[error("state is not normalized (norm^2 = {0})")]
    Unnormalized(f64),

    #[error("evaluation budgets differ by more than 1%: {a} vs {b}")]
    BudgetMismatch { a: f64, b: f64 },

    #[error("no oracle available: {0}")]
    MissingOracle(String),

    #[error("incompatible method: {0}")]
    Incompatible(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
