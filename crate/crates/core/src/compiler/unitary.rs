use std::collections::HashMap;

use crate::circuit::Gate;
use crate::frame::KeyPoly;
use crate::program::{Correction, Instruction, Program};

use super::CompileError;

/// Deferred-measurement form of a linked program.
///
/// Each EPR pair is prepared by `H`, `CNOT`. Each Bell measurement becomes
/// its basis rotation followed by copies of the two outcome bits onto fresh
/// ancillas. Each condition becomes controlled gates on those ancillas: one
/// per monomial for `X` and `Z`, and a single gate controlled by a parity
/// ancilla for `P†`, whose powers do not add modulo 2. Ancillas follow the
/// original register; discarding them leaves the logical action unchanged.
pub fn to_unitary(p: &Program) -> Result<Program, CompileError> {
    let mut next = p.total_qubits;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut holder: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for ins in &p.instructions {
        match ins {
            Instruction::Epr(a, b) => {
                out.push(Instruction::Gate(Gate::H(*a)));
                out.push(Instruction::Gate(Gate::Cnot(*a, *b)));
            }
            Instruction::Bell { r, s, x, z } => {
                let (ax, az) = (fresh(), fresh());
                out.push(Instruction::Gate(Gate::Cnot(*r, *s)));
                out.push(Instruction::Gate(Gate::H(*r)));
                out.push(Instruction::Gate(Gate::Cnot(*s, ax)));
                out.push(Instruction::Gate(Gate::Cnot(*r, az)));
                holder.insert(x.name().to_string(), ax);
                holder.insert(z.name().to_string(), az);
            }
            Instruction::Cond { kind, q, cond } => {
                let gate = kind.gate(*q);
                let terms = monomial_controls(cond, &holder)?;
                if terms.len() <= 1 || *kind != Correction::Pdg {
                    for controls in terms {
                        out.push(controlled(controls, gate));
                    }
                } else {
                    let parity = fresh();
                    for controls in terms {
                        out.push(controlled(controls, Gate::X(parity)));
                    }
                    out.push(controlled(vec![parity], gate));
                }
            }
            other => out.push(other.clone()),
        }
    }
    Ok(Program { total_qubits: next, outputs: p.outputs.clone(), instructions: out })
}

fn controlled(controls: Vec<usize>, gate: Gate) -> Instruction {
    if controls.is_empty() {
        Instruction::Gate(gate)
    } else {
        Instruction::Controlled { controls, gate }
    }
}

/// Ancilla controls of each monomial; the constant monomial has none.
fn monomial_controls(
    cond: &KeyPoly,
    holder: &HashMap<String, usize>,
) -> Result<Vec<Vec<usize>>, CompileError> {
    if cond.degree() > 2 {
        return Err(CompileError::ConditionDegree(cond.to_string()));
    }
    cond.monomials()
        .map(|m| {
            m.vars()
                .iter()
                .map(|v| {
                    holder.get(v.name()).copied().ok_or_else(|| {
                        CompileError::Sim(crate::sim::SimError::UnboundVariable(v.name().to_string()))
                    })
                })
                .collect()
        })
        .collect()
}
