use std::fmt;

use rand::RngCore;

use crate::circuit::Gate;
use crate::frame::{Assignment, Gf2, KeyPoly, Owner, PauliMask, SymbolicMask, Var};
use crate::program::{Instruction, Program};
use crate::sim::{execute, fidelity_up_to_phase, visit_branches, MeasRecord, StateVector};

use super::GardenError;

/// Qubit addresses of one gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GadgetLayout {
    /// Bob's incoming qubit.
    pub input: usize,
    /// `(bob_half, alice_half)` of pairs 1 to 4.
    pub pairs: [(usize, usize); 4],
    pub out1: usize,
    pub out2: usize,
}

pub const LAYOUT: GadgetLayout = GadgetLayout {
    input: 0,
    pairs: [(1, 2), (3, 4), (5, 6), (7, 8)],
    out1: 5,
    out2: 7,
};

impl GadgetLayout {
    pub fn total_qubits(&self) -> usize {
        9
    }

    pub fn bob(&self, pair: usize) -> usize {
        self.pairs[pair - 1].0
    }

    pub fn alice(&self, pair: usize) -> usize {
        self.pairs[pair - 1].1
    }

    pub fn output(&self, p: bool) -> usize {
        if p {
            self.out2
        } else {
            self.out1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutPort {
    Out1,
    Out2,
}

impl OutPort {
    pub fn for_p(p: bool) -> OutPort {
        if p {
            OutPort::Out2
        } else {
            OutPort::Out1
        }
    }
}

impl fmt::Display for OutPort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutPort::Out1 => "out1",
            OutPort::Out2 => "out2",
        })
    }
}

/// Outcome variables of one gadget: Bob's measurement and Alice's two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetVars {
    pub bx: Var,
    pub bz: Var,
    pub ax1: Var,
    pub az1: Var,
    pub ax2: Var,
    pub az2: Var,
}

impl GadgetVars {
    pub fn new(prefix: &str) -> GadgetVars {
        let bob = |s: &str| Var::new(format!("{prefix}{s}"), Owner::Bob);
        let alice = |s: &str| Var::new(format!("{prefix}{s}"), Owner::Alice);
        GadgetVars {
            bx: bob("bx"),
            bz: bob("bz"),
            ax1: alice("ax1"),
            az1: alice("az1"),
            ax2: alice("ax2"),
            az2: alice("az2"),
        }
    }

    pub fn all(&self) -> [&Var; 6] {
        [&self.bx, &self.bz, &self.ax1, &self.az1, &self.ax2, &self.az2]
    }

    /// The six variables as values of `B`.
    pub fn values<B: Gf2>(&self, value: impl Fn(&Var) -> B) -> [B; 6] {
        self.all().map(value)
    }
}

/// Output frame of a gadget whose input qubit carries `X^a Z^b ψ`.
///
/// Returns `(a', b')` with the output equal to `X^{a'} Z^{b'} (P†)^{p⊕q} ψ`
/// up to phase. Bob's teleport adds `(bx, bz)`; Alice's conditional `P†`
/// acts on the accumulated X exponent, which is where the product terms
/// come from; the path through pair 3 or pair 4 adds that pair's outcomes.
pub fn gadget_frame<B: Gf2>(input: (&B, &B), p: &B, q: &B, outcomes: &[B; 6]) -> (B, B) {
    let [bx, bz, ax1, az1, ax2, az2] = outcomes;
    let mut not_p = p.clone();
    not_p.add_assign(&B::one());
    let mut pdg = p.clone();
    pdg.add_assign(q);
    let mut a = input.0.clone();
    a.add_assign(bx);
    let mut b = input.1.clone();
    b.add_assign(bz);
    b.add_assign(&pdg.mul(&a));
    a.add_assign(&not_p.mul(ax1));
    a.add_assign(&p.mul(ax2));
    b.add_assign(&not_p.mul(az1));
    b.add_assign(&p.mul(az2));
    (a, b)
}

/// Symbolic gadget frame on a one-qubit input mask.
pub fn symbolic_gadget_mask(
    vars: &GadgetVars,
    p: &KeyPoly,
    q: &KeyPoly,
    input: &SymbolicMask,
) -> SymbolicMask {
    let o = vars.values(|v| KeyPoly::var(v.clone()));
    let (a, b) = gadget_frame((&input.a[0], &input.b[0]), p, q, &o);
    SymbolicMask { a: vec![a], b: vec![b] }
}

/// The gadget as a program on [`LAYOUT`], with `ψ` entering on qubit 0.
pub fn gadget_program(p: bool, q: bool, vars: &GadgetVars) -> Program {
    let l = LAYOUT;
    let mut ins: Vec<Instruction> = l.pairs.iter().map(|&(b, a)| Instruction::Epr(b, a)).collect();
    let bob_target = if p { l.bob(2) } else { l.bob(1) };
    ins.push(Instruction::Bell { r: l.input, s: bob_target, x: vars.bx.clone(), z: vars.bz.clone() });
    if q {
        ins.push(Instruction::Gate(Gate::Pdg(l.alice(1))));
    }
    ins.push(Instruction::Bell { r: l.alice(1), s: l.alice(3), x: vars.ax1.clone(), z: vars.az1.clone() });
    if !q {
        ins.push(Instruction::Gate(Gate::Pdg(l.alice(2))));
    }
    ins.push(Instruction::Bell { r: l.alice(2), s: l.alice(4), x: vars.ax2.clone(), z: vars.az2.clone() });
    Program { total_qubits: l.total_qubits(), outputs: vec![l.output(p)], instructions: ins }
}

/// Frame read off the path the qubit actually took, one step at a time.
fn path_mask(p: bool, q: bool, vars: &GadgetVars, outcomes: &Assignment) -> Result<PauliMask, GardenError> {
    let bit = |v: &Var| outcomes.get(v.name()).copied().ok_or_else(|| GardenError::Unbound(v.name().into()));
    let mut m = PauliMask::zeros(1);
    m.a[0] ^= bit(&vars.bx)?;
    m.b[0] ^= bit(&vars.bz)?;
    if p != q {
        m = m.through_pdag(0);
    }
    let (x, z) = if p { (&vars.ax2, &vars.az2) } else { (&vars.ax1, &vars.az1) };
    m.a[0] ^= bit(x)?;
    m.b[0] ^= bit(z)?;
    Ok(m)
}

fn party_bits() -> (Var, Var) {
    (Var::new("p", Owner::Bob), Var::new("q", Owner::Alice))
}

#[derive(Clone, Debug)]
pub struct GadgetResult {
    pub p: bool,
    pub q: bool,
    pub output_qubit: OutPort,
    pub applied_pdg: bool,
    /// Concrete frame on the output: the state is `X^a Z^b (P†)^{p⊕q} ψ`.
    pub mask: PauliMask,
    /// Frame as a function of `p`, `q` and all six outcomes.
    pub symbolic_mask: SymbolicMask,
    pub records: Vec<MeasRecord>,
    /// Outcomes together with `p` and `q`.
    pub outcomes: Assignment,
    pub state: StateVector,
}

/// Runs one sampled execution of the gadget on a one-qubit input.
pub fn run_gadget(
    p: bool,
    q: bool,
    input: &StateVector,
    rng: &mut dyn RngCore,
) -> Result<GadgetResult, GardenError> {
    let vars = GadgetVars::new("");
    let branch = execute(&gadget_program(p, q, &vars), input, rng)?;
    let mut outcomes = branch.outcomes;
    let (pv, qv) = party_bits();
    outcomes.insert(pv.name().into(), p);
    outcomes.insert(qv.name().into(), q);
    let symbolic_mask = symbolic_gadget_mask(
        &vars,
        &KeyPoly::var(pv),
        &KeyPoly::var(qv),
        &SymbolicMask::zeros(1),
    );
    Ok(GadgetResult {
        p,
        q,
        output_qubit: OutPort::for_p(p),
        applied_pdg: p != q,
        mask: path_mask(p, q, &vars, &outcomes)?,
        symbolic_mask,
        records: branch.records,
        outcomes,
        state: branch.state,
    })
}

/// One `(p, q)` row checked over every branch and every input.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthRow {
    pub p: bool,
    pub q: bool,
    pub output: OutPort,
    /// Whether the corrected outputs match `P†ψ` better than `ψ`.
    pub applied_pdg: bool,
    pub branches: usize,
    /// Worst fidelity with `(P†)^{p⊕q} ψ` after undoing the frame.
    pub min_fidelity: f64,
    /// Best fidelity with the other hypothesis.
    pub max_other_fidelity: f64,
    pub symbolic_mismatches: usize,
}

/// All four settings, every measurement branch, every input.
pub fn gadget_truth_table(inputs: &[StateVector]) -> Result<Vec<TruthRow>, GardenError> {
    let vars = GadgetVars::new("");
    let (pv, qv) = party_bits();
    let symbolic =
        symbolic_gadget_mask(&vars, &KeyPoly::var(pv.clone()), &KeyPoly::var(qv.clone()), &SymbolicMask::zeros(1));
    let mut rows = Vec::new();
    for (p, q) in [(false, false), (false, true), (true, false), (true, true)] {
        let program = gadget_program(p, q, &vars);
        let mut row = TruthRow {
            p,
            q,
            output: OutPort::for_p(p),
            applied_pdg: false,
            branches: 0,
            min_fidelity: 1.0,
            max_other_fidelity: 0.0,
            symbolic_mismatches: 0,
        };
        let (mut worst_pdg, mut worst_plain) = (1.0f64, 1.0f64);
        for psi in inputs {
            let mut with_pdg = psi.clone();
            with_pdg.apply_gate(&Gate::Pdg(0))?;
            let (expected, other) = if p != q { (&with_pdg, psi) } else { (psi, &with_pdg) };
            visit_branches(&program, psi, |b| {
                let mut outcomes = b.outcomes;
                outcomes.insert(pv.name().into(), p);
                outcomes.insert(qv.name().into(), q);
                let mask = path_mask(p, q, &vars, &outcomes)
                    .map_err(|e| crate::sim::SimError::UnboundVariable(e.to_string()))?;
                let eval = symbolic
                    .evaluate(&outcomes)
                    .map_err(|e| crate::sim::SimError::UnboundVariable(e.to_string()))?;
                if eval != mask {
                    row.symbolic_mismatches += 1;
                }
                let mut out = b.state;
                out.apply_mask(&mask)?;
                let f = fidelity_up_to_phase(&out, expected)?;
                let g = fidelity_up_to_phase(&out, other)?;
                row.branches += 1;
                row.min_fidelity = row.min_fidelity.min(f);
                row.max_other_fidelity = row.max_other_fidelity.max(g);
                let (fp, fq) = if p != q { (f, g) } else { (g, f) };
                worst_pdg = worst_pdg.min(fp);
                worst_plain = worst_plain.min(fq);
                Ok(())
            })?;
        }
        row.applied_pdg = worst_pdg > worst_plain;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct BridgeResult {
    pub port: OutPort,
    /// Qubit the gadget output was measured from.
    pub measured: usize,
    /// Fixed position the state ends on.
    pub target: usize,
    /// Frame on `target`: the state is `X^a Z^b (P†)^{p⊕q} ψ`.
    pub mask: PauliMask,
    pub gadget_mask: PauliMask,
    pub outcomes: Assignment,
    pub records: Vec<MeasRecord>,
    pub pairs_used: usize,
    pub state: StateVector,
}

/// Runs the gadget and teleports its output, from whichever port `p`
/// selected, into the first half of a fresh pair. The second half is then a
/// fixed downstream position.
pub fn bridge_teleport(
    p: bool,
    q: bool,
    input: &StateVector,
    rng: &mut dyn RngCore,
) -> Result<BridgeResult, GardenError> {
    let vars = GadgetVars::new("");
    let mut program = gadget_program(p, q, &vars);
    let (first, second) = (LAYOUT.total_qubits(), LAYOUT.total_qubits() + 1);
    let measured = LAYOUT.output(p);
    let (rx, rz) = (Var::new("rx", Owner::Bob), Var::new("rz", Owner::Bob));
    program.total_qubits += 2;
    program.instructions.insert(0, Instruction::Epr(first, second));
    program.instructions.push(Instruction::Bell { r: measured, s: first, x: rx.clone(), z: rz.clone() });
    program.outputs = vec![second];
    let branch = execute(&program, input, rng)?;
    let gadget_mask = path_mask(p, q, &vars, &branch.outcomes)?;
    let mut mask = gadget_mask.clone();
    mask.a[0] ^= branch.outcomes[rx.name()];
    mask.b[0] ^= branch.outcomes[rz.name()];
    Ok(BridgeResult {
        port: OutPort::for_p(p),
        measured,
        target: second,
        mask,
        gadget_mask,
        outcomes: branch.outcomes,
        records: branch.records,
        pairs_used: program.epr_count(),
        state: branch.state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::cross_terms;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inputs(count: usize) -> Vec<StateVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        (0..count).map(|_| StateVector::random(1, &mut rng).unwrap()).collect()
    }

    #[test]
    fn routing_follows_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let psi = StateVector::from_bits("0").unwrap();
        let r = run_gadget(false, true, &psi, &mut rng).unwrap();
        assert_eq!((r.output_qubit, r.applied_pdg), (OutPort::Out1, true));
        assert_eq!(r.records.len(), 3);
        let r = run_gadget(true, true, &psi, &mut rng).unwrap();
        assert_eq!((r.output_qubit, r.applied_pdg), (OutPort::Out2, false));
    }

    #[test]
    fn truth_table_over_all_branches() {
        let rows = gadget_truth_table(&inputs(3)).unwrap();
        assert_eq!(rows.len(), 4);
        for row in rows {
            assert_eq!(row.branches, 3 * 64);
            assert_eq!(row.applied_pdg, row.p != row.q);
            assert_eq!(row.output == OutPort::Out1, !row.p);
            assert!(row.min_fidelity > 1.0 - 1e-10, "{row:?}");
            assert!(row.max_other_fidelity < 1.0 - 1e-6);
            assert_eq!(row.symbolic_mismatches, 0);
        }
    }

    #[test]
    fn sampled_mask_undoes_to_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for psi in inputs(4) {
            for (p, q) in [(false, false), (false, true), (true, false), (true, true)] {
                let r = run_gadget(p, q, &psi, &mut rng).unwrap();
                assert_eq!(r.symbolic_mask.evaluate(&r.outcomes).unwrap(), r.mask);
                let mut out = r.state.clone();
                out.apply_mask(&r.mask).unwrap();
                let mut expected = psi.clone();
                if p != q {
                    expected.apply_gate(&Gate::Pdg(0)).unwrap();
                }
                assert!(fidelity_up_to_phase(&out, &expected).unwrap() > 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn bob_masked_input_gives_cross_terms() {
        let vars = GadgetVars::new("");
        let u = KeyPoly::var(Var::new("u", Owner::Bob));
        let input = SymbolicMask { a: vec![u], b: vec![KeyPoly::zero()] };
        let p = KeyPoly::var(Var::new("p", Owner::Bob));
        let q = KeyPoly::var(Var::new("q", Owner::Alice));
        let out = symbolic_gadget_mask(&vars, &p, &q, &input);
        let cross = cross_terms(&out.b[0]);
        assert!(cross.iter().any(|m| m.to_string() == "q*u"), "{}", out.b[0]);
    }

    #[test]
    fn bridge_fixes_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for psi in inputs(3) {
            for (p, q) in [(false, true), (true, true)] {
                let r = bridge_teleport(p, q, &psi, &mut rng).unwrap();
                assert_eq!(r.measured, if p { 7 } else { 5 });
                assert_eq!(r.target, 10);
                assert_eq!(r.pairs_used, 5);
                let mut out = r.state.clone();
                out.apply_mask(&r.mask).unwrap();
                let mut expected = psi.clone();
                if p != q {
                    expected.apply_gate(&Gate::Pdg(0)).unwrap();
                }
                assert!(fidelity_up_to_phase(&out, &expected).unwrap() > 1.0 - 1e-10);
            }
        }
    }
}
