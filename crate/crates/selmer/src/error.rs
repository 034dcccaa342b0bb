use thiserror::Error;

#[derive(Debug, Error)]
pub enum RingError {
    #[error("invalid ring descriptor: {0}")]
    Descriptor(String),
    #[error("ring mismatch: {0}")]
    Mismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("inexact division: {0}")]
    InexactDivision(String),
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("square root witness rejected: {0}")]
    SqrtWitness(String),
    #[error("Newton/Hensel iteration failed: {0}")]
    NewtonFailed(String),
    #[error("no reduction map: {0}")]
    NoReduction(String),
    #[error("zero input where a nonzero element is required")]
    ZeroInput,
    #[error("unsupported on this ring layer: {0}")]
    Capability(String),
    #[error("working precision insufficient: {0}")]
    Precision(String),
}

#[derive(Debug, Error)]
pub enum RepError {
    #[error("generator {index}: determinant is not 1")]
    Determinant { index: usize },
    #[error("relator {index} does not evaluate to the identity")]
    RelatorViolation { index: usize, residual: String },
    #[error("expected {expected} matrices, got {got}")]
    MatrixCount { expected: usize, got: usize },
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Error)]
pub enum SelmerError {
    #[error("(A1) failed: {0}")]
    A1(String),
    #[error("(A2) undecidable over this ring layer: {0}")]
    A2Capability(String),
    #[error("gamma word must be nonempty")]
    EmptyGamma,
    #[error("rho(lambda) does not commute with rho(mu)")]
    NonCommuting,
    #[error("T_mu must be a nonzero divisor")]
    ZeroTMu,
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Error)]
pub enum JobError {
    #[error("line {line}: syntax error at column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: undeclared name '{name}'")]
    Undeclared { line: usize, name: String },
    #[error("line {line}: sqrt requires an explicit branch witness: sqrt(expr; witness)")]
    MissingWitness { line: usize },
    #[error("line {line}: type mismatch: {msg}")]
    TypeMismatch { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Invalid { line: usize, msg: String },
    #[error(transparent)]
    Ring(#[from] RingError),
}
