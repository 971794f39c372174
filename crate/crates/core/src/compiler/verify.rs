use crate::circuit::LayeredCircuit;
use crate::frame::Assignment;
use crate::program::Program;
use crate::sim::{fidelity_up_to_phase, visit_branches, SimError, StateVector};

use super::CompileError;

/// Worst-case agreement between a program and the circuit it implements.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub inputs: usize,
    pub branches: usize,
    pub min_fidelity: f64,
    /// Outcome assignment of the worst branch.
    pub worst: Assignment,
    /// Smallest per-input sum of branch probabilities.
    pub min_total_probability: f64,
}

/// `U_c |ψ⟩` by direct gate application.
pub fn apply_circuit(c: &LayeredCircuit, psi: &StateVector) -> Result<StateVector, SimError> {
    let mut out = psi.clone();
    out.apply_gates(&c.flatten())?;
    Ok(out)
}

/// Runs `program` on every input over all measurement branches and compares
/// each branch's output with the direct circuit action.
pub fn verify_program(
    program: &Program,
    c: &LayeredCircuit,
    inputs: &[StateVector],
) -> Result<VerifyReport, CompileError> {
    let mut report = VerifyReport {
        inputs: inputs.len(),
        branches: 0,
        min_fidelity: 1.0,
        worst: Assignment::new(),
        min_total_probability: 1.0,
    };
    for psi in inputs {
        let expected = apply_circuit(c, psi)?;
        let mut total = 0.0;
        visit_branches(program, psi, |b| {
            let f = fidelity_up_to_phase(&b.state, &expected)?;
            report.branches += 1;
            total += b.probability;
            if report.branches == 1 || f < report.min_fidelity {
                report.min_fidelity = f;
                report.worst = b.outcomes;
            }
            Ok(())
        })?;
        report.min_total_probability = report.min_total_probability.min(total);
    }
    Ok(report)
}
