use crate::circuit::{DepthMetrics, LayeredCircuit};
use crate::frame::{KeyPoly, SymbolicMask, Var};
use crate::program::{Correction, Instruction, Program};

use super::CompileError;

/// Physical addresses of the compiled register.
///
/// Inputs sit on `0..n`. The pair block of stage `i` (1-based, `i ≥ 2`)
/// takes `2n` indices from `n + 2n(i−2)`, first halves before second halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub k: usize,
}

impl Layout {
    pub fn total_qubits(&self) -> usize {
        self.n + 2 * self.n * self.k.saturating_sub(1)
    }

    pub fn first_half(&self, stage: usize, j: usize) -> usize {
        self.n + 2 * self.n * (stage - 2) + j
    }

    pub fn second_half(&self, stage: usize, j: usize) -> usize {
        self.first_half(stage, j) + self.n
    }

    /// Where wire `j` lives while stage `stage` runs.
    pub fn wire(&self, stage: usize, j: usize) -> usize {
        if stage == 1 {
            j
        } else {
            self.second_half(stage, j)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompiledProgram {
    pub program: Program,
    pub declared_depth: DepthMetrics,
}

impl CompiledProgram {
    pub fn total_qubits(&self) -> usize {
        self.program.total_qubits
    }

    pub fn logical_outputs(&self) -> &[usize] {
        &self.program.outputs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceReport {
    pub epr_pairs: usize,
    pub total_qubits: usize,
    pub link_steps: usize,
    pub compiled_depth: usize,
    pub original_depth: usize,
    pub t_depth: usize,
}

impl ResourceReport {
    /// `key=value` lines in a fixed order.
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("epr_pairs={}", self.epr_pairs),
            format!("total_qubits={}", self.total_qubits),
            format!("link_steps={}", self.link_steps),
            format!("compiled_depth={}", self.compiled_depth),
            format!("original_depth={}", self.original_depth),
            format!("t_depth={}", self.t_depth),
        ]
    }
}

/// Compiles a layered circuit into a measurement-linked program.
pub fn compile_measure(c: &LayeredCircuit) -> Result<CompiledProgram, CompileError> {
    c.validate()?;
    let (n, k) = (c.n, c.k());
    let layout = Layout { n, k };
    let mut ins = Vec::new();

    for i in 2..=k {
        for j in 0..n {
            ins.push(Instruction::Epr(layout.first_half(i, j), layout.second_half(i, j)));
        }
    }
    for (idx, stage) in c.stages.iter().enumerate() {
        let i = idx + 1;
        ins.extend(stage.gates().map(|g| Instruction::Gate(g.remap(|q| layout.wire(i, q)))));
    }

    let tableaus = c
        .stages
        .iter()
        .map(|s| crate::frame::tableau_from_stage(&s.clifford, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut mask = SymbolicMask::zeros(n).apply_tableau(&tableaus[0])?;
    let (m, mut pending) = mask.through_t_layer(c.stages[0].t_layer.iter().copied());
    mask = m;

    let mut counter = 0usize;
    for (i, tableau) in tableaus.iter().enumerate().skip(1) {
        push_pending(&mut ins, &pending, |j| layout.wire(i, j));
        for j in 0..n {
            let x = Var::local(format!("m{counter}x"));
            let z = Var::local(format!("m{counter}z"));
            counter += 1;
            mask.a[j].add_assign(&KeyPoly::var(x.clone()));
            mask.b[j].add_assign(&KeyPoly::var(z.clone()));
            ins.push(Instruction::Bell { r: layout.wire(i, j), s: layout.first_half(i + 1, j), x, z });
        }
        mask = mask.apply_tableau(tableau)?;
        let (m, p) = mask.through_t_layer(c.stages[i].t_layer.iter().copied());
        mask = m;
        pending = p;
    }

    push_pending(&mut ins, &pending, |j| layout.wire(k, j));
    for j in 0..n {
        let q = layout.wire(k, j);
        for (kind, cond) in [(Correction::X, &mask.a[j]), (Correction::Z, &mask.b[j])] {
            if !cond.is_zero() {
                ins.push(Instruction::Cond { kind, q, cond: cond.clone() });
            }
        }
    }

    let program = Program {
        total_qubits: layout.total_qubits(),
        outputs: (0..n).map(|j| layout.wire(k, j)).collect(),
        instructions: ins,
    };
    debug_assert!(program.validate().is_ok());
    let declared_depth = program.depth_metrics();
    Ok(CompiledProgram { program, declared_depth })
}

/// Cancels pending `P^g` factors left by a T layer; the mask is unchanged.
fn push_pending(ins: &mut Vec<Instruction>, pending: &[(usize, KeyPoly)], wire: impl Fn(usize) -> usize) {
    for (j, key) in pending {
        if !key.is_zero() {
            ins.push(Instruction::Cond { kind: Correction::Pdg, q: wire(*j), cond: key.clone() });
        }
    }
}

pub fn report(c: &LayeredCircuit, p: &CompiledProgram) -> ResourceReport {
    let original = c.depth_metrics();
    ResourceReport {
        epr_pairs: p.program.epr_count(),
        total_qubits: p.program.total_qubits,
        link_steps: c.k().saturating_sub(1),
        compiled_depth: p.declared_depth.total_depth,
        original_depth: original.total_depth,
        t_depth: original.t_depth,
    }
}
