use rand::Rng;

use crate::circuit::{Gate, LayeredCircuit};
use crate::frame::{tableau_from_stage, CliffordTableau, PauliMask};
use crate::sim::{sample_index, BellOutcome, MeasRecord, StateVector};

use super::CompileError;

/// Largest number of branches one group may pre-evaluate.
pub const MAX_BRANCHES: u128 = 1 << 16;

const BASIS_TOL: f64 = 1e-10;

/// One pre-evaluated copy of a group under a guessed set of `P†` bits.
#[derive(Clone, Debug)]
pub struct GroupBranch {
    /// Guessed bits in boundary order, qubits ascending within a boundary.
    pub guess: Vec<bool>,
    /// First group: the output on the classical input. Later groups: the
    /// branch applied to the second halves of `n` EPR pairs (first halves on
    /// qubits `0..n`, second halves on `n..2n`).
    pub state: StateVector,
}

/// Consecutive stages evaluated together.
#[derive(Clone, Debug)]
pub struct Group {
    /// Zero-based stage indices.
    pub stages: std::ops::Range<usize>,
    /// T-layer qubits at each internal boundary, by stage index.
    pub boundaries: Vec<(usize, Vec<usize>)>,
    pub branches: Vec<GroupBranch>,
}

impl Group {
    pub fn guessed_bits(&self) -> usize {
        self.boundaries.iter().map(|(_, qs)| qs.len()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SpeculativeProgram {
    pub r: usize,
    pub input: String,
    pub circuit: LayeredCircuit,
    pub groups: Vec<Group>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeculativeReport {
    pub k: usize,
    pub r: usize,
    /// Sequential link steps, one per group.
    pub critical_path: usize,
    pub branches_per_group: Vec<usize>,
    pub max_branch_factor: usize,
    pub total_branches: usize,
    pub selected: Vec<usize>,
}

impl SpeculativeReport {
    pub fn lines(&self) -> Vec<String> {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        vec![
            format!("k={}", self.k),
            format!("r={}", self.r),
            format!("critical_path={}", self.critical_path),
            format!("branches_per_group={}", join(&self.branches_per_group)),
            format!("max_branch_factor={}", self.max_branch_factor),
            format!("total_branches={}", self.total_branches),
            format!("selected={}", join(&self.selected)),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct SpeculativeRun {
    pub output: String,
    pub records: Vec<MeasRecord>,
    pub report: SpeculativeReport,
}

/// Checks that every stage maps the realized basis input to a basis state up
/// to phase, and returns the basis index after each stage.
pub fn validate_classical(c: &LayeredCircuit, input: &str) -> Result<Vec<usize>, CompileError> {
    c.validate()?;
    if input.chars().count() != c.n {
        return Err(CompileError::InputLength { expected: c.n, found: input.chars().count() });
    }
    let mut state = StateVector::from_bits(input)?;
    let mut out = Vec::with_capacity(c.k());
    for (i, stage) in c.stages.iter().enumerate() {
        state.apply_gates(&stage.gates().collect::<Vec<_>>())?;
        out.push(state.basis_index(BASIS_TOL).ok_or(CompileError::NonClassical { stage: i })?);
    }
    Ok(out)
}

/// Groups stages `r` at a time and pre-evaluates every guess of the pending
/// `P†` bits at each group's internal boundaries.
pub fn compile_speculative(
    c: &LayeredCircuit,
    r: usize,
    input: &str,
) -> Result<SpeculativeProgram, CompileError> {
    if r == 0 {
        return Err(CompileError::BadGroupSize);
    }
    validate_classical(c, input)?;
    let n = c.n;
    let mut groups = Vec::new();
    for start in (0..c.k()).step_by(r) {
        let stages = start..(start + r).min(c.k());
        let boundaries: Vec<(usize, Vec<usize>)> = stages
            .clone()
            .take(stages.len() - 1)
            .map(|s| (s, c.stages[s].t_layer.iter().copied().collect()))
            .collect();
        let bits: usize = boundaries.iter().map(|(_, qs)| qs.len()).sum();
        let count = 1u128.checked_shl(bits as u32).filter(|&x| x <= MAX_BRANCHES);
        let Some(count) = count else {
            let count = if bits < 128 { 1u128 << bits } else { u128::MAX };
            return Err(CompileError::TooManyBranches { count, limit: MAX_BRANCHES });
        };
        let mut branches = Vec::with_capacity(count as usize);
        for index in 0..count as usize {
            let guess: Vec<bool> = (0..bits).map(|i| index >> i & 1 == 1).collect();
            let gates = branch_gates(c, &stages, &boundaries, &guess);
            let state = if start == 0 {
                let mut s = StateVector::from_bits(input)?;
                s.apply_gates(&gates)?;
                s
            } else {
                let mut s = StateVector::zero(2 * n)?;
                for j in 0..n {
                    s.prepare_epr(j, n + j)?;
                }
                s.apply_gates(&gates.iter().map(|g| g.remap(|q| n + q)).collect::<Vec<_>>())?;
                s
            };
            branches.push(GroupBranch { guess, state });
        }
        groups.push(Group { stages, boundaries, branches });
    }
    Ok(SpeculativeProgram { r, input: input.to_string(), circuit: c.clone(), groups })
}

/// The group's gates with `P†` inserted after each internal T layer where the
/// guess says so.
fn branch_gates(
    c: &LayeredCircuit,
    stages: &std::ops::Range<usize>,
    boundaries: &[(usize, Vec<usize>)],
    guess: &[bool],
) -> Vec<Gate> {
    let mut gates = Vec::new();
    let mut bit = 0;
    for s in stages.clone() {
        gates.extend(c.stages[s].gates());
        if let Some((_, qs)) = boundaries.iter().find(|(b, _)| *b == s) {
            for &q in qs {
                if guess[bit] {
                    gates.push(Gate::Pdg(q));
                }
                bit += 1;
            }
        }
    }
    gates
}

/// Links the groups in sequence. Each link draws its Bell outcomes (one
/// draw per wire), derives the realized `P†` bits from the Pauli frame, and
/// gate-teleports the running state into the branch whose guess matches.
///
/// The outcomes of a link are uniform whatever branch receives the state,
/// because the first halves of the pairs are maximally mixed; drawing them
/// before choosing the branch therefore samples the same distribution.
pub fn execute_speculative(
    sp: &SpeculativeProgram,
    rng: &mut impl Rng,
) -> Result<SpeculativeRun, CompileError> {
    let c = &sp.circuit;
    let n = c.n;
    let tableaus = c
        .stages
        .iter()
        .map(|s| tableau_from_stage(&s.clifford, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut mask = PauliMask::zeros(n);
    let mut pending: Vec<(usize, bool)> = Vec::new();
    let mut state: Option<StateVector> = None;
    let mut records = Vec::new();
    let mut selected = Vec::new();

    for group in &sp.groups {
        let mut outcomes = Vec::new();
        if state.is_some() {
            for j in 0..n {
                let o = BellOutcome::ALL[sample_index(&[0.25; 4], rng.gen::<f64>())];
                mask.a[j] ^= o.x;
                mask.b[j] ^= o.z;
                outcomes.push(o);
            }
        }
        let (keys, next_mask, next_pending) = push_frame(&tableaus, c, group, &mask)?;
        let index = keys.iter().enumerate().map(|(i, &b)| usize::from(b) << i).sum::<usize>();
        let branch = &group.branches[index];
        if branch.guess != keys {
            return Err(CompileError::SelectorMismatch(keys));
        }
        selected.push(index);
        state = Some(match state.take() {
            None => branch.state.clone(),
            Some(mut prev) => {
                for &(q, g) in &pending {
                    if g {
                        prev.apply_gate(&Gate::Pdg(q))?;
                    }
                }
                // running wires 0..n, first halves n..2n, second halves 2n..3n
                let mut joint = prev.tensor(&branch.state)?;
                let mut labels: Vec<usize> = (0..3 * n).collect();
                for (j, o) in outcomes.iter().enumerate() {
                    let r = labels.iter().position(|&l| l == j).unwrap();
                    let s = labels.iter().position(|&l| l == n + j).unwrap();
                    let p = joint.bell_project_remove(r, s, *o)?;
                    if p < 1e-12 {
                        return Err(CompileError::SelectorMismatch(keys));
                    }
                    labels.retain(|&l| l != j && l != n + j);
                    let k = records.len();
                    records.push(MeasRecord {
                        var_x: format!("m{k}x"),
                        var_z: format!("m{k}z"),
                        x: o.x,
                        z: o.z,
                        measured: (j, n + j),
                    });
                }
                joint
            }
        });
        mask = next_mask;
        pending = next_pending;
    }

    let mut out = state.expect("at least one group");
    for &(q, g) in &pending {
        if g {
            out.apply_gate(&Gate::Pdg(q))?;
        }
    }
    out.apply_mask(&mask)?;
    let last = c.k() - 1;
    let index = out.basis_index(BASIS_TOL).ok_or(CompileError::NonClassical { stage: last })?;
    let output = (0..n).map(|q| if index >> q & 1 == 1 { '1' } else { '0' }).collect();

    let branches_per_group: Vec<usize> = sp.groups.iter().map(|g| g.branches.len()).collect();
    let report = SpeculativeReport {
        k: c.k(),
        r: sp.r,
        critical_path: sp.groups.len(),
        max_branch_factor: branches_per_group.iter().copied().max().unwrap_or(0),
        total_branches: branches_per_group.iter().sum(),
        branches_per_group,
        selected,
    };
    Ok(SpeculativeRun { output, records, report })
}

/// Realized boundary bits, outgoing mask, and pending bits of the last T layer.
type GroupFrame = (Vec<bool>, PauliMask, Vec<(usize, bool)>);

/// Pushes the incoming frame through a group. Returns the realized bits at
/// the internal boundaries, the outgoing mask and the pending bits of the
/// group's last T layer.
fn push_frame(
    tableaus: &[CliffordTableau],
    c: &LayeredCircuit,
    group: &Group,
    mask: &PauliMask,
) -> Result<GroupFrame, CompileError> {
    let mut m = mask.clone();
    let mut keys = Vec::new();
    let mut pending = Vec::new();
    for s in group.stages.clone() {
        let (next, pend) = m.apply_tableau(&tableaus[s])?.through_t_layer(c.stages[s].t_layer.iter().copied());
        m = next;
        if s + 1 == group.stages.end {
            pending = pend;
        } else {
            keys.extend(pend.into_iter().map(|(_, g)| g));
        }
    }
    Ok((keys, m, pending))
}
