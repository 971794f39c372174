//! Dense statevector simulation and program execution.

mod exec;
mod state;

use thiserror::Error;

pub use exec::{
    enumerate_branches, execute, visit_branches, Branch, MAX_BELL_MEASUREMENTS, MAX_RANDOM_BITS,
};
pub(crate) use state::sample_index;
pub use state::{
    fidelity_up_to_phase, gate_matrix, BellOutcome, Matrix2, MeasRecord, StateVector,
    MAX_FACTOR_QUBITS, MAX_QUBITS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("`{0}` is not a bitstring")]
    BadBitstring(String),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state has squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {0} used twice in one operation")]
    QubitCollision(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("qubit {0} is not in |0⟩")]
    NotFresh(usize),
    #[error("unbound outcome variable: {0}")]
    UnboundVariable(String),
    #[error("branch enumeration refused: more than {limit} measurements")]
    BranchExplosion { limit: usize },
    #[error("qubit {0} used again after being measured")]
    ReusedMeasuredQubit(usize),
    #[error("input state has {found} qubits, program needs at least {expected}")]
    InputMismatch { expected: usize, found: usize },
    #[error("{0} discarded qubits remain entangled with the outputs")]
    EntangledLeftover(usize),
}
