use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by construction, validation and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |m - m^H| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the limit of {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("axis is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("coupling is not unitary (max |U^H U - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("effect {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },

    #[error("effects do not sum to the identity (completeness residual {residual:e})")]
    NotComplete { residual: f64 },

    #[error("outcomes must be strictly increasing (violated at index {index})")]
    OutcomesNotIncreasing { index: usize },

    #[error("{what}: expected {expected} entries, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("Kraus operators are not trace preserving (max |sum D^H D - I| = {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("invalid smearing kernel: {0}")]
    InvalidKernel(String),

    #[error("smeared outcome set cannot be closed: {0}")]
    KernelOverflow(String),

    #[error("n_max = {n_max} exceeds the supported limit {limit}")]
    Overflow { n_max: usize, limit: usize },

    #[error("probability {value:e} at outcome {outcome} is negative beyond tolerance")]
    NegativeProbability { outcome: f64, value: f64 },

    #[error("noise operator expectation {value:e} is negative; the measure is biased for this target")]
    NegativeNoiseSquare { value: f64 },

    #[error("observables do not commute (max commutator norm {residual:e})")]
    NotCommuting { residual: f64 },

    #[error("observable has {count} distinct outcomes (limit {limit})")]
    TooManyOutcomes { count: usize, limit: usize },

    #[error("axes coincide")]
    DegenerateAxes,

    #[error("unknown gallery case {0:?}")]
    UnknownCase(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
