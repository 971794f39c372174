use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, RngCore};

use crate::circuit::{Gate, LayeredCircuit};
use crate::frame::{tableau_from_stage, Assignment, KeyPoly, Owner, SymbolicMask, Var};
use crate::program::{Correction, Instruction, Program};
use crate::sim::{execute, StateVector};

use super::gadget::{gadget_frame, GadgetVars};
use super::GardenError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    fn owns(self, owner: Owner) -> bool {
        matches!((self, owner), (Party::Alice, Owner::Alice) | (Party::Bob, Owner::Bob))
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// Which logical wires Alice holds at the start and receives at the end.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bipartition {
    pub alice_inputs: BTreeSet<usize>,
    pub alice_outputs: BTreeSet<usize>,
}

impl Bipartition {
    pub fn new(alice_inputs: impl IntoIterator<Item = usize>, alice_outputs: impl IntoIterator<Item = usize>) -> Self {
        Bipartition {
            alice_inputs: alice_inputs.into_iter().collect(),
            alice_outputs: alice_outputs.into_iter().collect(),
        }
    }

    fn check(&self, n: usize) -> Result<(), GardenError> {
        match self.alice_inputs.iter().chain(&self.alice_outputs).find(|&&j| j >= n) {
            Some(j) => Err(GardenError::BadBipartition(format!("wire {j} out of range for {n} wires"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub idx: usize,
    pub party: Party,
    pub action: String,
    pub deps: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Event(Event),
    Exchange,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub purpose: String,
    pub pairs: usize,
}

/// Ordered party actions, the exchange round(s), and EPR consumption.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProtocolTranscript {
    pub entries: Vec<Entry>,
    pub ledger: Vec<LedgerEntry>,
}

impl ProtocolTranscript {
    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Event(ev) => Some(ev),
            Entry::Exchange => None,
        })
    }

    /// For each exchange, the index of the first event after it.
    pub fn exchange_rounds(&self) -> Vec<usize> {
        let mut seen = 0;
        let mut rounds = Vec::new();
        for e in &self.entries {
            match e {
                Entry::Event(_) => seen += 1,
                Entry::Exchange => rounds.push(seen),
            }
        }
        rounds
    }

    pub fn epr_pairs(&self) -> usize {
        self.ledger.iter().map(|l| l.pairs).sum()
    }

    fn push_event(&mut self, party: Party, action: String, deps: Vec<Var>) {
        let idx = self.events().count();
        self.entries.push(Entry::Event(Event { idx, party, action, deps }));
    }

    /// Line-based log: `EVENT`, `EXCHANGE` and a closing `LEDGER` line.
    pub fn export(&self) -> String {
        let mut out = String::new();
        let mut seen = 0;
        for e in &self.entries {
            match e {
                Entry::Event(ev) => {
                    let deps = if ev.deps.is_empty() {
                        "-".to_string()
                    } else {
                        ev.deps.iter().map(|v| v.name()).collect::<Vec<_>>().join(" ")
                    };
                    out.push_str(&format!("EVENT {} {} {} DEPS {}\n", ev.idx, ev.party, ev.action, deps));
                    seen += 1;
                }
                Entry::Exchange => out.push_str(&format!("EXCHANGE {seen}\n")),
            }
        }
        out.push_str(&format!("LEDGER {}\n", self.epr_pairs()));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CausalityViolation {
    ExchangeCount(usize),
    ForeignDependency { event: usize, party: Party, var: String },
}

impl fmt::Display for CausalityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CausalityViolation::ExchangeCount(k) => write!(f, "expected exactly one exchange round, found {k}"),
            CausalityViolation::ForeignDependency { event, party, var } => {
                write!(f, "event {event} by {party} uses `{var}` before the exchange")
            }
        }
    }
}

/// Passes iff there is exactly one exchange and every event before it
/// depends only on its own party's outcomes.
pub fn causality_check(t: &ProtocolTranscript) -> Result<(), CausalityViolation> {
    let rounds = t.exchange_rounds();
    if rounds.len() != 1 {
        return Err(CausalityViolation::ExchangeCount(rounds.len()));
    }
    for e in &t.entries {
        match e {
            Entry::Exchange => break,
            Entry::Event(ev) => {
                if let Some(v) = ev.deps.iter().find(|v| !ev.party.owns(v.owner())) {
                    return Err(CausalityViolation::ForeignDependency {
                        event: ev.idx,
                        party: ev.party,
                        var: v.name().to_string(),
                    });
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProtocolOptions {
    /// Measure every output in the Z basis before the exchange and fix the
    /// bits up classically afterwards.
    pub measure_outputs: bool,
}

/// A compiled protocol: the joint program plus who does what.
#[derive(Clone, Debug)]
pub struct Protocol1Plan {
    /// Everything up to and including the final corrections.
    pub program: Program,
    /// Instructions before this index happen before the exchange.
    pub exchange_at: usize,
    pub owner: HashMap<usize, Party>,
    pub ledger: Vec<LedgerEntry>,
    /// Frame on the outputs just before the corrections.
    pub final_mask: SymbolicMask,
    pub gadgets: usize,
}

impl Protocol1Plan {
    /// The program without its post-exchange corrections.
    pub fn pre_exchange(&self) -> Program {
        Program {
            total_qubits: self.program.total_qubits,
            outputs: self.program.outputs.clone(),
            instructions: self.program.instructions[..self.exchange_at].to_vec(),
        }
    }

    fn party(&self, ins: &Instruction) -> Party {
        self.owner[&ins.targets()[0]]
    }

    fn transcript(&self, measure_outputs: bool) -> ProtocolTranscript {
        let mut t = ProtocolTranscript { entries: Vec::new(), ledger: self.ledger.clone() };
        let post = &self.program.instructions[self.exchange_at..];
        for ins in &self.program.instructions[..self.exchange_at] {
            if matches!(ins, Instruction::Epr(..)) {
                continue;
            }
            t.push_event(self.party(ins), action(ins), deps(ins));
        }
        if measure_outputs {
            for &q in &self.program.outputs {
                t.push_event(self.owner[&q], format!("measure_z({q})"), Vec::new());
            }
        }
        t.entries.push(Entry::Exchange);
        if measure_outputs {
            for (j, &q) in self.program.outputs.iter().enumerate() {
                let deps = self.final_mask.a[j].vars().into_iter().collect();
                t.push_event(self.owner[&q], format!("fixup({j})"), deps);
            }
        } else {
            for ins in post {
                t.push_event(self.party(ins), action(ins), deps(ins));
            }
        }
        t
    }
}

fn action(ins: &Instruction) -> String {
    let name = match ins {
        Instruction::Epr(..) => "epr".to_string(),
        Instruction::Gate(g) => g.kind().name().to_lowercase(),
        Instruction::Bell { .. } => "bell".to_string(),
        Instruction::Cond { kind, .. } => match kind {
            Correction::Pdg => "pdg".to_string(),
            Correction::X => "x".to_string(),
            Correction::Z => "z".to_string(),
        },
        Instruction::Controlled { gate, controls } => {
            format!("{}{}", "c".repeat(controls.len()), gate.kind().name().to_lowercase())
        }
    };
    let qs: Vec<String> = ins.qubits().iter().map(usize::to_string).collect();
    format!("{name}({})", qs.join(","))
}

fn deps(ins: &Instruction) -> Vec<Var> {
    match ins {
        Instruction::Cond { cond, .. } => cond.vars().into_iter().collect(),
        _ => Vec::new(),
    }
}

/// Builds the two-party program for a circuit of T-depth at most one.
///
/// Alice teleports her inputs to Bob and keeps the outcomes to herself. Bob
/// runs the Clifford stages and the T layer; each T gate leaves a pending
/// `P^g` whose key splits into Bob's part `p` and Alice's part `q`, and one
/// gadget per T gate applies `(P†)^{p⊕q}`. Outputs owed to Alice are
/// teleported back. After the single exchange both parties know every
/// outcome and apply their Pauli corrections.
pub fn build_protocol1(c: &LayeredCircuit, part: &Bipartition) -> Result<Protocol1Plan, GardenError> {
    c.validate()?;
    part.check(c.n)?;
    let t_depth = c.depth_metrics().t_depth;
    if t_depth > 1 {
        return Err(GardenError::TDepthTooLarge(t_depth));
    }
    let n = c.n;
    let mut next = n;
    let mut pair = |owner: &mut HashMap<usize, Party>, first: Party, second: Party| {
        next += 2;
        owner.insert(next - 2, first);
        owner.insert(next - 1, second);
        (next - 2, next - 1)
    };
    let mut owner: HashMap<usize, Party> = HashMap::new();
    for j in 0..n {
        let p = if part.alice_inputs.contains(&j) { Party::Alice } else { Party::Bob };
        owner.insert(j, p);
    }
    let mut eprs = Vec::new();
    let mut body = Vec::new();
    let mut ledger = Vec::new();
    let mut loc: Vec<usize> = (0..n).collect();
    let mut mask = SymbolicMask::zeros(n);

    for &j in &part.alice_inputs {
        let (ah, bh) = pair(&mut owner, Party::Alice, Party::Bob);
        eprs.push(Instruction::Epr(ah, bh));
        let x = Var::new(format!("a{j}x"), Owner::Alice);
        let z = Var::new(format!("a{j}z"), Owner::Alice);
        mask.a[j].add_assign(&KeyPoly::var(x.clone()));
        mask.b[j].add_assign(&KeyPoly::var(z.clone()));
        body.push(Instruction::Bell { r: j, s: ah, x, z });
        loc[j] = bh;
        ledger.push(LedgerEntry { purpose: format!("teleport_in({j})"), pairs: 1 });
    }

    let mut gadgets = 0;
    for stage in &c.stages {
        body.extend(stage.clifford.iter().map(|g| Instruction::Gate(g.remap(|q| loc[q]))));
        body.extend(stage.t_layer.iter().map(|&j| Instruction::Gate(Gate::T(loc[j]))));
        let (m, pending) = mask.apply_tableau(&tableau_from_stage(&stage.clifford, n)?)?.through_t_layer(stage.t_layer.iter().copied());
        mask = m;
        for (j, g) in pending {
            let k = gadgets;
            gadgets += 1;
            let p = g.part_owned_by(Owner::Bob, true);
            let q = g.part_owned_by(Owner::Alice, false);
            let Some(p_bit) = p.as_constant() else {
                return Err(GardenError::NonLocalRouting(p.to_string()));
            };
            if p.plus(&q) != g {
                return Err(GardenError::NonLocalRouting(g.to_string()));
            }
            let pairs: Vec<(usize, usize)> =
                (0..4).map(|_| pair(&mut owner, Party::Bob, Party::Alice)).collect();
            eprs.extend(pairs.iter().map(|&(b, a)| Instruction::Epr(b, a)));
            let vars = GadgetVars::new(&format!("g{k}"));
            let bob_target = if p_bit { pairs[1].0 } else { pairs[0].0 };
            body.push(Instruction::Bell { r: loc[j], s: bob_target, x: vars.bx.clone(), z: vars.bz.clone() });
            let not_q = q.plus(&KeyPoly::one());
            for (half, cond, x, z) in [
                (0, &q, &vars.ax1, &vars.az1),
                (1, &not_q, &vars.ax2, &vars.az2),
            ] {
                let alice = pairs[half].1;
                if !cond.is_zero() {
                    body.push(Instruction::Cond { kind: Correction::Pdg, q: alice, cond: cond.clone() });
                }
                body.push(Instruction::Bell { r: alice, s: pairs[half + 2].1, x: x.clone(), z: z.clone() });
            }
            // the gadget's P† cancels the pending P^g, so its frame simply
            // adds to the incoming one
            let o = vars.values(|v| KeyPoly::var(v.clone()));
            let zero = KeyPoly::zero();
            let (da, db) = gadget_frame((&zero, &zero), &p, &q, &o);
            mask.a[j].add_assign(&da);
            mask.b[j].add_assign(&db);
            loc[j] = if p_bit { pairs[3].0 } else { pairs[2].0 };
            ledger.push(LedgerEntry { purpose: format!("gadget({k})"), pairs: 4 });
        }
    }

    for &j in &part.alice_outputs {
        let (bh, ah) = pair(&mut owner, Party::Bob, Party::Alice);
        eprs.push(Instruction::Epr(bh, ah));
        let x = Var::new(format!("f{j}x"), Owner::Bob);
        let z = Var::new(format!("f{j}z"), Owner::Bob);
        mask.a[j].add_assign(&KeyPoly::var(x.clone()));
        mask.b[j].add_assign(&KeyPoly::var(z.clone()));
        body.push(Instruction::Bell { r: loc[j], s: bh, x, z });
        loc[j] = ah;
        ledger.push(LedgerEntry { purpose: format!("teleport_out({j})"), pairs: 1 });
    }

    let mut instructions = eprs;
    instructions.extend(body);
    let exchange_at = instructions.len();
    for (j, &q) in loc.iter().enumerate() {
        for (kind, cond) in [(Correction::X, &mask.a[j]), (Correction::Z, &mask.b[j])] {
            if !cond.is_zero() {
                instructions.push(Instruction::Cond { kind, q, cond: cond.clone() });
            }
        }
    }
    let program = Program { total_qubits: next, outputs: loc, instructions };
    program.validate()?;
    Ok(Protocol1Plan { program, exchange_at, owner, ledger, final_mask: mask, gadgets })
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    /// Corrected outputs in wire order (plus reference qubits), unless the
    /// outputs were measured.
    pub state: Option<StateVector>,
    /// Corrected Z-basis readout, character `j` for wire `j`.
    pub measured: Option<String>,
    pub outcomes: Assignment,
    pub transcript: ProtocolTranscript,
    pub plan: Protocol1Plan,
}

/// Runs the protocol once on `input`, whose first `n` qubits are the
/// logical inputs and whose remaining qubits, if any, are references.
pub fn run_protocol1(
    c: &LayeredCircuit,
    part: &Bipartition,
    input: &StateVector,
    rng: &mut dyn RngCore,
    options: ProtocolOptions,
) -> Result<ProtocolRun, GardenError> {
    let plan = build_protocol1(c, part)?;
    let transcript = plan.transcript(options.measure_outputs);
    if !options.measure_outputs {
        let branch = execute(&plan.program, input, rng)?;
        return Ok(ProtocolRun {
            state: Some(branch.state),
            measured: None,
            outcomes: branch.outcomes,
            transcript,
            plan,
        });
    }
    let branch = execute(&plan.pre_exchange(), input, rng)?;
    let mut state = branch.state;
    let mut bits = String::with_capacity(c.n);
    for j in 0..c.n {
        let p1 = state.prob_one(j);
        let raw = rng.gen::<f64>() < p1;
        state.project(j, raw)?;
        let flip = plan.final_mask.a[j].eval(&branch.outcomes).map_err(|e| GardenError::Unbound(e.to_string()))?;
        bits.push(if raw ^ flip { '1' } else { '0' });
    }
    Ok(ProtocolRun { state: None, measured: Some(bits), outcomes: branch.outcomes, transcript, plan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Stage;
    use crate::compiler::apply_circuit;
    use crate::sim::{fidelity_up_to_phase, visit_branches};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ht() -> LayeredCircuit {
        LayeredCircuit::new(1, vec![Stage::new(vec![Gate::H(0)], [0])]).unwrap()
    }

    fn check_all_branches(c: &LayeredCircuit, part: &Bipartition, psi: &StateVector) -> usize {
        let plan = build_protocol1(c, part).unwrap();
        let expected = apply_circuit(c, psi).unwrap();
        let mut count = 0;
        visit_branches(&plan.program, psi, |b| {
            assert!(fidelity_up_to_phase(&b.state, &expected).unwrap() > 1.0 - 1e-10);
            count += 1;
            Ok(())
        })
        .unwrap();
        count
    }

    #[test]
    fn clifford_only_needs_no_gadget() {
        let c = LayeredCircuit::new(2, vec![Stage::new(vec![Gate::H(0), Gate::Cnot(0, 1)], [])]).unwrap();
        let part = Bipartition::new([0], [1]);
        let plan = build_protocol1(&c, &part).unwrap();
        assert_eq!(plan.gadgets, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = StateVector::random(2, &mut rng).unwrap();
        check_all_branches(&c, &part, &psi);
        let run = run_protocol1(&c, &part, &psi, &mut rng, ProtocolOptions::default()).unwrap();
        assert_eq!(run.transcript.exchange_rounds().len(), 1);
        assert!(causality_check(&run.transcript).is_ok());
    }

    #[test]
    fn alice_input_through_one_gadget() {
        let part = Bipartition::new([0], []);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..3 {
            let psi = StateVector::random(1, &mut rng).unwrap();
            assert_eq!(check_all_branches(&ht(), &part, &psi), 256);
        }
        let plan = build_protocol1(&ht(), &part).unwrap();
        assert_eq!(plan.gadgets, 1);
        assert_eq!(plan.ledger.iter().map(|l| l.pairs).sum::<usize>(), 1 + 4);
    }

    #[test]
    fn returned_outputs_and_bob_inputs() {
        let c = LayeredCircuit::new(
            2,
            vec![
                Stage::new(vec![Gate::H(0), Gate::Cnot(0, 1)], [1]),
                Stage::new(vec![Gate::Cnot(1, 0), Gate::H(1)], []),
            ],
        )
        .unwrap();
        let part = Bipartition::new([1], [0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::random(2, &mut rng).unwrap();
        check_all_branches(&c, &part, &psi);
        let run = run_protocol1(&c, &part, &psi, &mut rng, ProtocolOptions::default()).unwrap();
        assert!(causality_check(&run.transcript).is_ok());
        assert_eq!(run.transcript.epr_pairs(), 1 + 4 + 1);
        let text = run.transcript.export();
        assert_eq!(text.lines().filter(|l| l.starts_with("EXCHANGE")).count(), 1);
        assert!(text.ends_with("LEDGER 6\n"));
    }

    #[test]
    fn deeper_circuits_refused() {
        let c = LayeredCircuit::new(1, vec![Stage::new(vec![], [0]), Stage::new(vec![Gate::H(0)], [0])]).unwrap();
        assert_eq!(
            build_protocol1(&c, &Bipartition::default()).unwrap_err(),
            GardenError::TDepthTooLarge(2)
        );
    }

    #[test]
    fn measured_outputs_are_fixed_up_classically() {
        let c = LayeredCircuit::new(
            2,
            vec![Stage::new(vec![Gate::X(0), Gate::Cnot(0, 1)], [0, 1]), Stage::new(vec![Gate::X(1)], [])],
        )
        .unwrap();
        let part = Bipartition::new([0], [0]);
        let psi = StateVector::from_bits("10").unwrap();
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let run = run_protocol1(&c, &part, &psi, &mut rng, ProtocolOptions { measure_outputs: true }).unwrap();
            assert_eq!(run.measured.as_deref(), Some("01"));
            assert!(causality_check(&run.transcript).is_ok());
            for ev in run.transcript.events().filter(|e| e.action.starts_with("measure_z")) {
                assert!(ev.deps.is_empty());
            }
        }
    }

    #[test]
    fn violations_are_caught() {
        let alice_var = Var::new("a0x", Owner::Alice);
        let mut t = ProtocolTranscript::default();
        t.push_event(Party::Bob, "pdg(3)".into(), vec![alice_var.clone()]);
        t.entries.push(Entry::Exchange);
        assert_eq!(
            causality_check(&t),
            Err(CausalityViolation::ForeignDependency { event: 0, party: Party::Bob, var: "a0x".into() })
        );

        let mut t = ProtocolTranscript::default();
        t.entries.push(Entry::Exchange);
        t.push_event(Party::Bob, "x(3)".into(), vec![alice_var]);
        t.entries.push(Entry::Exchange);
        assert_eq!(causality_check(&t), Err(CausalityViolation::ExchangeCount(2)));

        let t = ProtocolTranscript::default();
        assert_eq!(causality_check(&t), Err(CausalityViolation::ExchangeCount(0)));
    }
}
