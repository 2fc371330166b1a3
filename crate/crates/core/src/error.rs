use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("qubit count must be at least {min}, got {got}")]
    TooFewQubits { min: usize, got: usize },

    #[error("wire {wire} out of range for {n} qubits")]
    WireOutOfRange { wire: usize, n: usize },

    #[error("CX with equal wires ({0})")]
    EqualWires(usize),

    #[error("Pauli index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
