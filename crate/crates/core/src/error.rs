use thiserror::Error;

use crate::statevec::MAX_QUBITS;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate qubit label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown qubit label `{0}`")]
    UnknownLabel(String),

    #[error("register of {0} qubits exceeds the {MAX_QUBITS}-qubit ceiling")]
    TooManyQubits(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("gate is not unitary: ||G G^+ - I||_F = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("invalid measurement basis: {0}")]
    InvalidBasis(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("partial trace needs at least one qubit to keep")]
    EmptyKeep,

    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),

    #[error("invalid input qubit: {0}")]
    InvalidQubit(String),

    #[error("bit must be 0 or 1, got {0}")]
    InvalidBit(u8),

    #[error("encoding states are not orthogonal (|<zero|one>| = {0:.3e})")]
    NonOrthogonalEncoding(f64),

    #[error("`{0}` must be at least 1")]
    ZeroCount(&'static str),

    #[error("concealment violated: Bob's pre-opening state deviates from diag(|a|^2, |b|^2) by {0:.3e}")]
    ConcealmentViolated(f64),
}
