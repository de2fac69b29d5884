use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not in SL_d: determinant {det}")]
    NotUnimodular { det: f64 },

    #[error("integer matrix has determinant {det}, expected +1")]
    NotInGamma { det: i128 },

    #[error("flow time out of range: |t|*d = {0} exceeds 600")]
    FlowOverflow(f64),

    /// The lattice enumeration visited more nodes than allowed. `best` is the
    /// best objective value found before giving up, if any.
    #[error("enumeration budget of {budget} nodes exceeded (best so far: {best:?})")]
    BudgetExceeded { budget: u64, best: Option<f64> },

    #[error("floating point precision exhausted: rounding residual {residual:e}")]
    PrecisionExhausted { residual: f64 },

    #[error("operation requires exact rational coordinates")]
    NotRational,

    #[error("operation requires an irrational (floating) coordinate")]
    RationalRejected,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty localization: total weight {weight:e} below {threshold:e}")]
    EmptyLocalization { weight: f64, threshold: f64 },

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
