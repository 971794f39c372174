//! Pauli frame tracking.
//!
//! A frame records a deferred correction `⊗_j X^{a_j} Z^{b_j}` as classical
//! data. Clifford gates map the exponents linearly over GF(2); a T gate keeps
//! them and leaves a pending `P^{a}` that a later `P†` must cancel. The same
//! code runs over concrete bits and over [`KeyPoly`] keys, so the symbolic
//! frame is exactly the concrete one evaluated at a variable assignment.

mod keypoly;
mod mask;
mod tableau;

use thiserror::Error;

use crate::circuit::Gate;

pub use keypoly::{cross_terms, poly_eval, Assignment, KeyPoly, Monomial, Owner, PolyError, Var};
pub use mask::{
    apply_tableau, commute_through_pdag, commute_through_t_layer, Gf2, Mask, PauliMask,
    SymbolicMask,
};
pub use tableau::{tableau_from_stage, CliffordTableau};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("`{0}` is not a Clifford gate on this register")]
    NonClifford(Gate),
    #[error("mask has {found} qubits, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}
