use thiserror::Error;

/// Failures of the special-function layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("factorial ratio needs small <= large, got {small} > {large}")]
    FactorialOrder { small: usize, large: usize },
    #[error("quadrature order must be at least 1")]
    ZeroOrder,
}

/// Protocol validation and file ingestion failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("segment {index}: t_start {t_start} does not exceed the previous segment's {previous}")]
    NonMonotonicTimes { index: usize, t_start: f64, previous: f64 },
    #[error("segment {index}: field `{field}` is not finite")]
    NonFiniteField { index: usize, field: &'static str },
    #[error("protocol needs at least 2 segments, found {count}")]
    TooFewSegments { count: usize },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error at `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error("segment {index}: acceleration {a} is not supported for the box")]
    AcceleratedBox { index: usize, a: f64 },
    #[error("protocol is for system `{found}`, expected `{expected}`")]
    WrongSystem { expected: &'static str, found: &'static str },
}

impl ProtocolError {
    /// The offending key of a schema error.
    pub fn schema_key(&self) -> Option<&str> {
        match self {
            ProtocolError::Schema { key, .. } => Some(key),
            _ => None,
        }
    }
}

/// Failures while propagating coefficient vectors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuenchError {
    #[error("truncation tail mass {tail:.3e} exceeds {threshold:.1e} (raise n_states or allow leaky results)")]
    LeakyTruncation { tail: f64, threshold: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// A Gauss–Hermite evaluation whose refinement did not settle.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("quadrature did not converge: successive orders differ by {difference:.3e}")]
pub struct ConvergenceWarning {
    /// Value from the higher order rule.
    pub value: num_complex::Complex64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("initial position y = {y} lies outside the turning points for epsilon = {epsilon}")]
    OutsideTurningPoints { y: f64, epsilon: f64 },
    #[error("energy epsilon must be positive and finite, got {0}")]
    BadEnergy(f64),
}

/// Output emission failures.
#[derive(Debug, Error)]
pub enum EmitError {
    #[error("column `{name}` has {len} rows, expected {expected}")]
    RaggedColumns { name: String, len: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Quench(#[from] QuenchError),
    #[error(transparent)]
    Convergence(#[from] ConvergenceWarning),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}
