//! Teleportation-linked compilation.
//!
//! Every stage after the first is run ahead of time on the second halves of
//! fresh EPR pairs. The stages are then chained by Bell measurements, with
//! the Pauli frame tracked symbolically so that each pending `P†` and the
//! final Pauli fix-up are classically controlled by measurement outcomes.
//! The sequential part costs a constant per stage, so the depth follows the
//! T-depth rather than the Clifford depth.

mod measure;
mod speculative;
mod unitary;
mod verify;

use thiserror::Error;

use crate::circuit::CircuitError;
use crate::frame::FrameError;
use crate::sim::SimError;

pub use measure::{compile_measure, report, CompiledProgram, Layout, ResourceReport};
pub use speculative::{
    compile_speculative, execute_speculative, validate_classical, Group, GroupBranch, SpeculativeProgram,
    SpeculativeReport, SpeculativeRun, MAX_BRANCHES,
};
pub use unitary::to_unitary;
pub use verify::{apply_circuit, verify_program, VerifyReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("condition `{0}` has degree above 2 and cannot become a controlled gate")]
    ConditionDegree(String),
    #[error("stage {stage} does not map the input to a basis state")]
    NonClassical { stage: usize },
    #[error("{count} branches exceeds the limit of {limit}")]
    TooManyBranches { count: u128, limit: u128 },
    #[error("group size must be at least 1")]
    BadGroupSize,
    #[error("input has {found} bits, circuit has {expected} qubits")]
    InputLength { expected: usize, found: usize },
    #[error("no branch matches the realized corrections {0:?}")]
    SelectorMismatch(Vec<bool>),
}
