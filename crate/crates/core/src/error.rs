use alloc::string::String;
use thiserror::Error;

/// Failures of the exact algebra layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("polynomials live in different rings ({left} vs {right} variables)")]
    RingMismatch { left: usize, right: usize },
    #[error("leading term of the zero polynomial")]
    ZeroPolynomial,
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("denominator vanishes at the specialization point")]
    DenominatorVanishes,
    #[error("ideal is not zero-dimensional in the unknowns")]
    NotZeroDimensional,
    #[error("Gröbner basis computation exceeded its budget of {0} reduction steps")]
    BudgetExceeded(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Failures of the offline compiler.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{q} constraints exceed the enumeration cap of {cap}")]
    TooManyConstraints { q: usize, cap: usize },
    #[error("program is malformed: {0}")]
    InvalidProgram(String),
    #[error("active set {mask:#b}: {source}")]
    Mask { mask: u64, source: AlgebraError },
}

/// Failures of the online solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterDimension { expected: usize, got: usize },
    #[error("parameter vector contains a non-finite value")]
    NonFiniteParameter,
    #[error("no feasible candidate point")]
    NoFeasibleCandidate,
    #[error("specialization failed for active set {mask:#b}: {reason}")]
    SpecializationFailure { mask: u64, reason: String },
    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,
    #[error("invalid tolerance configuration: {0}")]
    InvalidConfig(String),
}
