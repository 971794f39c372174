//! The two-party garden-hose gadget and the instantaneous computation built
//! on it.
//!
//! Bob holds a qubit carrying a pending `P^g`, where `g = p ⊕ q` with `p`
//! known to Bob and `q` known to Alice. Four shared EPR pairs and three Bell
//! measurements apply `P†` exactly when `p ⊕ q = 1`, without either party
//! learning the other's bit. The price is that later Pauli keys pick up
//! products of Alice's and Bob's outcomes, which a second T layer cannot
//! absorb with the same gadget.

mod crossterms;
mod gadget;
mod protocol;

use thiserror::Error;

use crate::circuit::CircuitError;
use crate::frame::FrameError;
use crate::program::ProgramError;
use crate::sim::SimError;

pub use crossterms::{analyze_cross_terms, first_layer_vars, propagate_first_layer, CrossTermReport};
pub use gadget::{
    bridge_teleport, gadget_frame, gadget_program, gadget_truth_table, run_gadget, symbolic_gadget_mask,
    BridgeResult, GadgetLayout, GadgetResult, GadgetVars, OutPort, TruthRow, LAYOUT,
};
pub use protocol::{
    build_protocol1, causality_check, run_protocol1, Bipartition, CausalityViolation, Entry, Event,
    LedgerEntry, Party, Protocol1Plan, ProtocolOptions, ProtocolRun, ProtocolTranscript,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GardenError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(
        "T-depth {0} needs gadgets keyed on products of both parties' outcomes; \
         run the cross-term analysis (`crossterms`) instead"
    )]
    TDepthTooLarge(usize),
    #[error("bad bipartition: {0}")]
    BadBipartition(String),
    #[error("routing key `{0}` is not known to Bob before the exchange")]
    NonLocalRouting(String),
    #[error("unbound outcome variable: {0}")]
    Unbound(String),
}
