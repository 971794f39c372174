//! Clifford+T circuits, Pauli-frame tracking, and teleportation-linked
//! compilation whose depth scales with T-depth.

pub mod circuit;
pub mod compiler;
pub mod frame;
pub mod gardenhose;
pub mod program;
pub mod sim;
