use thiserror::Error;

/// Errors surfaced by the library.
///
/// `InvalidConfig` covers malformed requests (bad shapes, bad flags, bad
/// files); `NumericalContract` covers violations detected at run time
/// (degenerate inputs, broken invariants). The CLI maps the former to exit
/// code 2 and the latter to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {context} (left {left:?}, right {right:?})")]
    ShapeMismatch {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("weight vector has length {got}, expected {expected}")]
    WeightLength { expected: usize, got: usize },

    #[error("degenerate weights: total weight is not strictly positive")]
    DegenerateWeights,

    #[error("negative weight at index {index}: {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("input matrix has numerical rank 0; pose coreset is undefined")]
    RankZero,

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("sum-coreset expects exactly {expected} vectors of dimension {dim}, got {got}")]
    ArityMismatch {
        dim: usize,
        expected: usize,
        got: usize,
    },

    #[error("exhaustive matching refused: {n} points would require {n}! permutations (guard is {guard})")]
    FactorialGuard { n: usize, guard: usize },

    #[error("stale coreset: index {index} is out of range for a point set of {n} rows")]
    StaleCoreset { index: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical contract violated: {0}")]
    NumericalContract(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical-contract violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
