//! Program execution over a factored state.
//!
//! The global state is kept as a product of independent [`StateVector`]
//! factors; factors merge only when a gate or measurement spans them, and
//! measured qubits are dropped. Two rules keep registers small without
//! changing the reduced state on the outputs:
//!
//! * a non-output qubit whose remaining uses are all as controls is measured
//!   in the Z basis right away (deferred measurement, run backwards);
//! * a non-output qubit with no remaining uses is dropped when it is in a
//!   basis state or its whole factor is idle, and is otherwise traced out by
//!   Z-basis branching once it shares a factor with an output.

use std::collections::{HashMap, HashSet};

use rand::RngCore;

use crate::circuit::Gate;
use crate::frame::Assignment;
use crate::program::{Instruction, Program};

use super::state::{gate_matrix, sample_index, BellOutcome, MeasRecord, StateVector};
use super::SimError;

/// Most Bell measurements [`enumerate_branches`] accepts.
pub const MAX_BELL_MEASUREMENTS: usize = 12;
/// Most random binary outcomes along one enumerated branch.
pub const MAX_RANDOM_BITS: usize = 24;

const ZERO_PROB: f64 = 1e-14;
const DETERMINISTIC: f64 = 1e-12;
/// Factor size above which dead qubits are traced out eagerly.
const DEAD_FACTOR_LIMIT: usize = 8;

/// One measurement history and the normalized output state it leaves.
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcomes: Assignment,
    pub records: Vec<MeasRecord>,
    pub probability: f64,
    /// Logical outputs in wire order, followed by any reference qubits
    /// supplied with the input.
    pub state: StateVector,
}

#[derive(Clone)]
struct Factor {
    qubits: Vec<usize>,
    state: StateVector,
}

const UNBOUND: u8 = 2;

#[derive(Clone)]
struct Machine {
    factors: Vec<Factor>,
    /// Per qubit: measured Z value, or [`UNBOUND`].
    classical: Vec<u8>,
    consumed: Vec<bool>,
    dead: Vec<bool>,
    any_dead: bool,
    /// Per outcome slot: value, or [`UNBOUND`].
    values: Vec<u8>,
    /// Bell measurements taken: instruction index and `(x, z)`.
    records: Vec<(usize, bool, bool)>,
    probability: f64,
    random_bits: usize,
    pc: usize,
    queue: Vec<usize>,
    at_leaf: bool,
}

/// A condition over outcome slots: XOR of monomials, each an AND of slots.
struct SlotPoly {
    constant: bool,
    monomials: Vec<Vec<usize>>,
}

/// Static facts about a program: liveness and where each outcome is stored.
struct Plan {
    measure_after: Vec<Vec<usize>>,
    dead_after: Vec<Vec<usize>>,
    measure_at_start: Vec<usize>,
    /// Outcome names by slot. Slot `q` holds the Z outcome of qubit `q`.
    names: Vec<String>,
    /// Slots of each Bell instruction's `(x, z)` outcomes.
    bell_slots: HashMap<usize, (usize, usize)>,
    conds: HashMap<usize, SlotPoly>,
}

impl Plan {
    fn new(p: &Program, keep: &[bool]) -> Plan {
        let n = p.instructions.len();
        let mut last_target: HashMap<usize, usize> = HashMap::new();
        let mut last_use: HashMap<usize, usize> = HashMap::new();
        let mut last_control: HashMap<usize, usize> = HashMap::new();
        for (i, ins) in p.instructions.iter().enumerate() {
            for q in ins.targets() {
                last_target.insert(q, i);
                last_use.insert(q, i);
            }
            for &q in ins.controls() {
                last_control.insert(q, i);
                last_use.insert(q, i);
            }
        }
        let mut names: Vec<String> = (0..keep.len()).map(|q| format!("q{q}")).collect();
        let mut slot_of: HashMap<String, usize> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut slot = |name: &str| {
            *slot_of.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        let mut bell_slots = HashMap::new();
        let mut conds = HashMap::new();
        for (i, ins) in p.instructions.iter().enumerate() {
            match ins {
                Instruction::Bell { x, z, .. } => {
                    bell_slots.insert(i, (slot(x.name()), slot(z.name())));
                }
                Instruction::Cond { cond, .. } => {
                    let mut poly = SlotPoly { constant: false, monomials: Vec::new() };
                    for m in cond.monomials() {
                        if m.is_one() {
                            poly.constant ^= true;
                        } else {
                            poly.monomials.push(m.vars().iter().map(|v| slot(v.name())).collect());
                        }
                    }
                    conds.insert(i, poly);
                }
                _ => {}
            }
        }
        let mut plan = Plan {
            measure_after: vec![Vec::new(); n],
            dead_after: vec![Vec::new(); n],
            measure_at_start: Vec::new(),
            names,
            bell_slots,
            conds,
        };
        for (&q, &lu) in &last_use {
            if keep[q] {
                continue;
            }
            match (last_target.get(&q), last_control.get(&q)) {
                (Some(&lt), Some(&lc)) if lc > lt => plan.measure_after[lt].push(q),
                (None, Some(_)) => plan.measure_at_start.push(q),
                _ => plan.dead_after[lu].push(q),
            }
        }
        for v in plan.measure_after.iter_mut().chain(plan.dead_after.iter_mut()) {
            v.sort_unstable();
        }
        plan.measure_at_start.sort_unstable();
        plan
    }
}

enum Mode<'a> {
    Enumerate,
    Sample(&'a mut dyn RngCore),
}

struct Runner<'a> {
    program: &'a Program,
    plan: Plan,
    keep: Vec<bool>,
    references: Vec<usize>,
}

impl Machine {
    fn find(&self, q: usize) -> Option<(usize, usize)> {
        self.factors
            .iter()
            .enumerate()
            .find_map(|(f, fac)| fac.qubits.iter().position(|&x| x == q).map(|s| (f, s)))
    }

    fn ensure(&mut self, q: usize) -> Result<(), SimError> {
        if self.consumed[q] || self.classical[q] != UNBOUND {
            return Err(SimError::ReusedMeasuredQubit(q));
        }
        if self.find(q).is_none() {
            self.factors.push(Factor { qubits: vec![q], state: StateVector::zero(1)? });
        }
        Ok(())
    }

    /// Merges the factors holding `qs` and returns the merged factor index
    /// with each qubit's slot.
    fn merge(&mut self, qs: &[usize]) -> Result<(usize, Vec<usize>), SimError> {
        for &q in qs {
            self.ensure(q)?;
        }
        let mut ids: Vec<usize> = qs.iter().map(|&q| self.find(q).unwrap().0).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut parts: Vec<Factor> = Vec::with_capacity(ids.len());
        for &f in ids.iter().rev() {
            parts.push(self.factors.swap_remove(f));
        }
        let mut merged = parts.pop().unwrap();
        while let Some(next) = parts.pop() {
            merged.state = merged.state.tensor(&next.state)?;
            merged.qubits.extend(next.qubits);
        }
        let slots = qs.iter().map(|q| merged.qubits.iter().position(|x| x == q).unwrap()).collect();
        self.factors.push(merged);
        Ok((self.factors.len() - 1, slots))
    }

    fn drop_qubit(&mut self, f: usize, slot: usize, bit: bool) -> Result<(), SimError> {
        let fac = &mut self.factors[f];
        fac.state.remove_qubit(slot, bit)?;
        fac.qubits.remove(slot);
        if fac.qubits.is_empty() {
            self.factors.swap_remove(f);
        }
        Ok(())
    }

    fn apply_gate(&mut self, g: &Gate, controls: &[usize]) -> Result<(), SimError> {
        let mut quantum_controls = Vec::new();
        for &c in controls {
            match self.classical[c] {
                0 => return Ok(()),
                1 => {}
                _ => quantum_controls.push(c),
            }
        }
        let (extra_control, target) = match *g {
            Gate::Cnot(c, t) => (Some(c), t),
            g => (None, g.qubits()[0]),
        };
        let mut qs = quantum_controls;
        qs.extend(extra_control);
        qs.push(target);
        let (f, slots) = self.merge(&qs)?;
        let (target_slot, control_slots) = slots.split_last().unwrap();
        self.factors[f].state.apply_controlled(&gate_matrix(g.kind()), control_slots, *target_slot)
    }

    fn eval(&self, cond: &SlotPoly, names: &[String]) -> Result<bool, SimError> {
        let mut acc = cond.constant;
        for m in &cond.monomials {
            let mut term = true;
            for &s in m {
                match self.values[s] {
                    UNBOUND => return Err(SimError::UnboundVariable(format!("unbound variable `{}`", names[s]))),
                    v => term &= v == 1,
                }
            }
            acc ^= term;
        }
        Ok(acc)
    }

    /// Drops idle factors and dead qubits that sit in a basis state.
    fn cleanup(&mut self, newly_dead: &[usize]) -> Result<(), SimError> {
        for &q in newly_dead {
            self.dead[q] = true;
            self.any_dead = true;
        }
        if !self.any_dead {
            return Ok(());
        }
        let dead = &self.dead;
        self.factors.retain(|f| !f.qubits.iter().all(|&q| dead[q]));
        let mut f = 0;
        while f < self.factors.len() {
            let mut removed = false;
            for slot in 0..self.factors[f].qubits.len() {
                let q = self.factors[f].qubits[slot];
                if !self.dead[q] {
                    continue;
                }
                let p1 = self.factors[f].state.prob_one(slot);
                if !(DETERMINISTIC..=1.0 - DETERMINISTIC).contains(&p1) {
                    let bit = p1 > 0.5;
                    self.factors[f].state.project(slot, bit)?;
                    let len = self.factors.len();
                    self.drop_qubit(f, slot, bit)?;
                    removed = self.factors.len() == len;
                    break;
                }
            }
            if !removed {
                f += 1;
            }
        }
        Ok(())
    }

    /// A dead qubit still entangled with live ones whose factor holds an
    /// output or has grown large. Measuring it in the Z basis and forgetting
    /// the result traces it out. Dead qubits elsewhere are left alone, since
    /// their factor may still become idle and be dropped without branching.
    fn undetermined_dead(&mut self, keep: &[bool]) -> Result<Option<usize>, SimError> {
        self.cleanup(&[])?;
        if !self.any_dead {
            return Ok(None);
        }
        Ok(self
            .factors
            .iter()
            .filter(|f| f.qubits.len() > DEAD_FACTOR_LIMIT || f.qubits.iter().any(|&q| keep[q]))
            .flat_map(|f| f.qubits.iter())
            .copied()
            .find(|&q| self.dead[q]))
    }

    /// Z-basis outcomes of `q`, each as a collapsed copy of the machine.
    fn z_outcomes(&self, q: usize) -> Result<Vec<Machine>, SimError> {
        let Some((f, slot)) = self.find(q) else {
            // never touched: |0⟩
            let mut m = self.clone();
            m.classical[q] = 0;
            return Ok(vec![m]);
        };
        let p1 = self.factors[f].state.prob_one(slot);
        let mut out = Vec::new();
        for (bit, p) in [(false, 1.0 - p1), (true, p1)] {
            if p < ZERO_PROB {
                continue;
            }
            let mut m = self.clone();
            m.factors[f].state.project(slot, bit)?;
            m.drop_qubit(f, slot, bit)?;
            m.probability *= p;
            m.classical[q] = u8::from(bit);
            m.values[q] = u8::from(bit);
            out.push(m);
        }
        if out.len() > 1 {
            for m in out.iter_mut() {
                m.random_bits += 1;
            }
        }
        Ok(out)
    }

    fn bell_outcomes(&self, r: usize, s: usize, i: usize, (sx, sz): (usize, usize)) -> Result<Vec<Machine>, SimError> {
        let mut base = self.clone();
        let (f, slots) = base.merge(&[r, s])?;
        base.factors[f].state.rotate_bell(slots[0], slots[1])?;
        let (pr, ps) = (slots[0], slots[1]);
        let mut out = Vec::new();
        for o in BellOutcome::ALL {
            let mut m = base.clone();
            let pz = m.factors[f].state.project(pr, o.z)?;
            let px = m.factors[f].state.project(ps, o.x)?;
            let p = pz * px;
            if p < ZERO_PROB {
                continue;
            }
            // remove the higher slot first so the lower index stays valid
            let (hi, hb, lo, lb) = if pr > ps { (pr, o.z, ps, o.x) } else { (ps, o.x, pr, o.z) };
            m.factors[f].state.remove_qubit(hi, hb)?;
            m.factors[f].qubits.remove(hi);
            m.drop_qubit(f, lo, lb)?;
            m.consumed[r] = true;
            m.consumed[s] = true;
            m.probability *= p;
            m.values[sx] = u8::from(o.x);
            m.values[sz] = u8::from(o.z);
            m.records.push((i, o.x, o.z));
            out.push(m);
        }
        if out.len() > 1 {
            let bits = if out.len() > 2 { 2 } else { 1 };
            for m in out.iter_mut() {
                m.random_bits += bits;
            }
        }
        Ok(out)
    }
}

impl<'a> Runner<'a> {
    fn new(program: &'a Program, input: &StateVector) -> Result<(Runner<'a>, Machine), SimError> {
        let wires = program.num_wires();
        if input.n() < wires {
            return Err(SimError::InputMismatch { expected: wires, found: input.n() });
        }
        let width = program.total_qubits + input.n() - wires;
        let references: Vec<usize> = (program.total_qubits..width).collect();
        let mut keep = vec![false; width];
        for &q in program.outputs.iter().chain(&references) {
            keep[q] = true;
        }
        let plan = Plan::new(program, &keep);
        let mut qubits: Vec<usize> = (0..wires).collect();
        qubits.extend(references.iter().copied());
        let mut m = Machine {
            factors: vec![Factor { qubits, state: input.clone() }],
            classical: vec![UNBOUND; width],
            consumed: vec![false; width],
            dead: vec![false; width],
            any_dead: false,
            values: vec![UNBOUND; plan.names.len()],
            records: Vec::new(),
            probability: 1.0,
            random_bits: 0,
            pc: 0,
            queue: plan.measure_at_start.iter().rev().copied().collect(),
            at_leaf: false,
        };
        // inputs that the program never touches and does not output
        let touched: HashSet<usize> = program.instructions.iter().flat_map(|i| i.qubits()).collect();
        let idle: Vec<usize> = (0..wires).filter(|q| !touched.contains(q) && !keep[*q]).collect();
        m.cleanup(&idle)?;
        Ok((Runner { program, plan, keep, references }, m))
    }

    fn advance(&self, m: &mut Machine, i: usize) -> Result<(), SimError> {
        m.pc = i + 1;
        m.queue.extend(self.plan.measure_after[i].iter().rev().copied());
        m.cleanup(&self.plan.dead_after[i])
    }

    fn fork(
        &self,
        options: Vec<Machine>,
        mode: &mut Mode<'_>,
        sink: &mut dyn FnMut(Branch) -> Result<(), SimError>,
    ) -> Result<Option<Machine>, SimError> {
        match mode {
            Mode::Enumerate => {
                if options.iter().any(|m| m.random_bits > MAX_RANDOM_BITS) {
                    return Err(SimError::BranchExplosion { limit: MAX_RANDOM_BITS });
                }
                for m in options {
                    self.drive(m, mode, sink)?;
                }
                Ok(None)
            }
            Mode::Sample(rng) => {
                let probs: Vec<f64> = options.iter().map(|m| m.probability).collect();
                let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                let pick = sample_index(&probs, u);
                Ok(options.into_iter().nth(pick))
            }
        }
    }

    fn drive(
        &self,
        mut m: Machine,
        mode: &mut Mode<'_>,
        sink: &mut dyn FnMut(Branch) -> Result<(), SimError>,
    ) -> Result<(), SimError> {
        let instructions = &self.program.instructions;
        loop {
            if m.queue.is_empty() {
                if let Some(q) = m.undetermined_dead(&self.keep)? {
                    m.queue.push(q);
                }
            }
            if let Some(q) = m.queue.pop() {
                let options = m.z_outcomes(q)?;
                match self.fork(options, mode, sink)? {
                    Some(next) => {
                        m = next;
                        continue;
                    }
                    None => return Ok(()),
                }
            }
            if m.pc == instructions.len() {
                if !m.at_leaf {
                    m.at_leaf = true;
                    m.queue = self.leaf_junk(&mut m)?;
                    continue;
                }
                return sink(self.finish(m)?);
            }
            let i = m.pc;
            match &instructions[i] {
                Instruction::Bell { r, s, .. } => {
                    let mut options = m.bell_outcomes(*r, *s, i, self.plan.bell_slots[&i])?;
                    for mm in options.iter_mut() {
                        self.advance(mm, i)?;
                    }
                    match self.fork(options, mode, sink)? {
                        Some(next) => m = next,
                        None => return Ok(()),
                    }
                    continue;
                }
                Instruction::Epr(a, b) => {
                    let (f, slots) = m.merge(&[*a, *b])?;
                    m.factors[f].state.prepare_epr(slots[0], slots[1])?;
                }
                Instruction::Gate(g) => m.apply_gate(g, &[])?,
                Instruction::Controlled { controls, gate } => m.apply_gate(gate, controls)?,
                Instruction::Cond { kind, q, .. } => {
                    if m.eval(&self.plan.conds[&i], &self.plan.names)? {
                        m.apply_gate(&kind.gate(*q), &[])?;
                    }
                }
            }
            self.advance(&mut m, i)?;
        }
    }

    /// Merges everything the outputs live in and returns the non-output
    /// qubits caught in that factor, to be traced out by branching.
    fn leaf_junk(&self, m: &mut Machine) -> Result<Vec<usize>, SimError> {
        let mut wanted: Vec<usize> = self.program.outputs.clone();
        wanted.extend(self.references.iter().copied());
        let (f, _) = m.merge(&wanted)?;
        Ok(m.factors[f].qubits.iter().copied().filter(|&q| !self.keep[q]).collect())
    }

    fn finish(&self, mut m: Machine) -> Result<Branch, SimError> {
        let mut wanted: Vec<usize> = self.program.outputs.clone();
        wanted.extend(self.references.iter().copied());
        let (f, slots) = m.merge(&wanted)?;
        let fac = m.factors.swap_remove(f);
        if fac.qubits.len() != wanted.len() {
            return Err(SimError::EntangledLeftover(fac.qubits.len() - wanted.len()));
        }
        let outcomes: Assignment = m
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != UNBOUND)
            .map(|(s, &v)| (self.plan.names[s].clone(), v == 1))
            .collect();
        let records = m
            .records
            .iter()
            .map(|&(i, x, z)| match &self.program.instructions[i] {
                Instruction::Bell { r, s, x: vx, z: vz } => MeasRecord {
                    var_x: vx.name().to_string(),
                    var_z: vz.name().to_string(),
                    x,
                    z,
                    measured: (*r, *s),
                },
                _ => unreachable!("records point at Bell instructions"),
            })
            .collect();
        Ok(Branch { outcomes, records, probability: m.probability, state: fac.state.permuted(&slots)? })
    }
}

/// Runs every measurement branch of `program` and hands each to `visit`.
///
/// `input` holds the logical inputs on its first qubits; any further qubits
/// are reference qubits carried through untouched.
pub fn visit_branches(
    program: &Program,
    input: &StateVector,
    mut visit: impl FnMut(Branch) -> Result<(), SimError>,
) -> Result<(), SimError> {
    if program.bell_count() > MAX_BELL_MEASUREMENTS {
        return Err(SimError::BranchExplosion { limit: MAX_BELL_MEASUREMENTS });
    }
    let (runner, m) = Runner::new(program, input)?;
    runner.drive(m, &mut Mode::Enumerate, &mut visit)
}

/// Every branch with its probability and post-selected output state.
pub fn enumerate_branches(program: &Program, input: &StateVector) -> Result<Vec<Branch>, SimError> {
    let mut out = Vec::new();
    visit_branches(program, input, |b| {
        out.push(b);
        Ok(())
    })?;
    Ok(out)
}

/// Samples one branch; each measurement consumes one draw from `rng`.
pub fn execute(
    program: &Program,
    input: &StateVector,
    rng: &mut dyn RngCore,
) -> Result<Branch, SimError> {
    let (runner, m) = Runner::new(program, input)?;
    let mut result = None;
    runner.drive(m, &mut Mode::Sample(rng), &mut |b| {
        result = Some(b);
        Ok(())
    })?;
    Ok(result.expect("sampling always reaches a leaf"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{KeyPoly, Var};
    use crate::program::Correction;
    use crate::sim::fidelity_up_to_phase;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell(r: usize, s: usize, k: usize) -> Instruction {
        Instruction::Bell { r, s, x: Var::local(format!("m{k}x")), z: Var::local(format!("m{k}z")) }
    }

    fn teleport() -> Program {
        Program {
            total_qubits: 3,
            outputs: vec![2],
            instructions: vec![
                Instruction::Epr(1, 2),
                bell(0, 1, 0),
                Instruction::Cond { kind: Correction::X, q: 2, cond: KeyPoly::parse("m0x").unwrap() },
                Instruction::Cond { kind: Correction::Z, q: 2, cond: KeyPoly::parse("m0z").unwrap() },
            ],
        }
    }

    #[test]
    fn no_measurements_single_branch() {
        let p = Program {
            total_qubits: 1,
            outputs: vec![0],
            instructions: vec![Instruction::Gate(Gate::H(0))],
        };
        let b = enumerate_branches(&p, &StateVector::zero(1).unwrap()).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn teleportation_has_four_equal_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = StateVector::random(1, &mut rng).unwrap();
        let branches = enumerate_branches(&teleport(), &psi).unwrap();
        assert_eq!(branches.len(), 4);
        for b in &branches {
            assert!((b.probability - 0.25).abs() < 1e-12);
            assert!(fidelity_up_to_phase(&b.state, &psi).unwrap() > 1.0 - 1e-12);
            assert_eq!(b.records.len(), 1);
        }
    }

    #[test]
    fn reference_qubits_ride_along() {
        // teleport one half of a Bell pair; the pair must survive
        let mut input = StateVector::zero(2).unwrap();
        input.prepare_epr(0, 1).unwrap();
        for b in enumerate_branches(&teleport(), &input).unwrap() {
            assert_eq!(b.state.n(), 2);
            assert!(fidelity_up_to_phase(&b.state, &input).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn deferred_measurement_matches_measurement() {
        // coherent teleport: outcomes stay on qubits 0,1 and steer controlled fixes
        let p = Program {
            total_qubits: 3,
            outputs: vec![2],
            instructions: vec![
                Instruction::Gate(Gate::H(1)),
                Instruction::Gate(Gate::Cnot(1, 2)),
                Instruction::Gate(Gate::Cnot(0, 1)),
                Instruction::Gate(Gate::H(0)),
                Instruction::Controlled { controls: vec![1], gate: Gate::X(2) },
                Instruction::Controlled { controls: vec![0], gate: Gate::Z(2) },
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = StateVector::random(1, &mut rng).unwrap();
        let branches = enumerate_branches(&p, &psi).unwrap();
        assert_eq!(branches.len(), 4);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        for b in branches {
            assert!(fidelity_up_to_phase(&b.state, &psi).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn unbound_condition_is_reported() {
        let p = Program {
            total_qubits: 1,
            outputs: vec![0],
            instructions: vec![Instruction::Cond {
                kind: Correction::X,
                q: 0,
                cond: KeyPoly::parse("m9x").unwrap(),
            }],
        };
        let err = enumerate_branches(&p, &StateVector::zero(1).unwrap()).unwrap_err();
        assert!(matches!(err, SimError::UnboundVariable(_)));
    }

    #[test]
    fn too_many_bell_measurements_refused() {
        let mut ins = Vec::new();
        for k in 0..13 {
            ins.push(Instruction::Epr(2 * k + 1, 2 * k + 2));
        }
        for k in 0..13 {
            ins.push(bell(2 * k, 2 * k + 1, k));
        }
        let p = Program { total_qubits: 27, outputs: vec![26], instructions: ins };
        assert!(matches!(
            enumerate_branches(&p, &StateVector::zero(1).unwrap()),
            Err(SimError::BranchExplosion { .. })
        ));
    }

    #[test]
    fn sampling_is_reproducible() {
        let psi = StateVector::from_bits("1").unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            execute(&teleport(), &psi, &mut rng).unwrap().outcomes
        };
        assert_eq!(run(4), run(4));
    }
}
