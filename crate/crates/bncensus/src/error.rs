use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero in F_p")]
    DivisionByZero,

    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("operands live over different primes")]
    PrimeMismatch,

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("prime {p} too small for genus {g}")]
    PrimeTooSmall { p: u64, g: usize },

    #[error("invalid curve data: {0}")]
    InvalidCurve(String),

    #[error("invalid sheaf data: {0}")]
    InvalidSheaf(String),

    #[error("normalizing at every node disconnects the curve")]
    DisconnectingSubset,

    #[error("divisor sequence is not increasing")]
    NonMonotoneDivisors,

    #[error("sequence is not admissible: {0}")]
    Inadmissible(String),

    #[error("torus budget exceeded: need {needed} points, budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("plane misses the chord over node {node}")]
    ChordMissed { node: usize },

    #[error("plane meets the chord over node {node} at an endpoint")]
    BadPlane { node: usize },

    #[error("plane contains the whole chord over node {node}")]
    AmbiguousChord { node: usize },

    #[error("degenerate linear series: {0}")]
    DegenerateSeries(String),

    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),

    #[error("aborted after three consecutive discarded seeds (last seed {last_seed})")]
    TooManyDiscards { last_seed: u64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
