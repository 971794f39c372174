//! Compiled programs: gates, EPR preparations, Bell measurements and
//! classically conditioned corrections over a flat qubit register.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::circuit::{parse_gate_tokens, DepthMetrics, Gate, GateKind};
use crate::frame::{KeyPoly, Owner, Var};

/// Cost of an EPR preparation (H then CNOT).
pub const EPR_COST: usize = 2;
/// Cost of a Bell measurement (CNOT, H, readout).
pub const BELL_COST: usize = 3;
/// Cost of any gate, T gate or conditioned correction.
pub const GATE_COST: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Correction {
    Pdg,
    X,
    Z,
}

impl Correction {
    pub fn gate(self, q: usize) -> Gate {
        match self {
            Correction::Pdg => Gate::Pdg(q),
            Correction::X => Gate::X(q),
            Correction::Z => Gate::Z(q),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instruction {
    Epr(usize, usize),
    Gate(Gate),
    /// Bell measurement of `(r, s)`; `x` and `z` name the outcome bits.
    Bell { r: usize, s: usize, x: Var, z: Var },
    /// `gate^{cond}` evaluated on outcomes of earlier Bell measurements.
    Cond { kind: Correction, q: usize, cond: KeyPoly },
    /// A single-qubit gate controlled on every listed qubit being 1.
    Controlled { controls: Vec<usize>, gate: Gate },
}

impl Instruction {
    /// Qubits the instruction acts on non-diagonally or prepares/measures.
    pub fn targets(&self) -> Vec<usize> {
        match self {
            Instruction::Epr(a, b) => vec![*a, *b],
            Instruction::Gate(g) | Instruction::Controlled { gate: g, .. } => g.qubits(),
            Instruction::Bell { r, s, .. } => vec![*r, *s],
            Instruction::Cond { q, .. } => vec![*q],
        }
    }

    pub fn controls(&self) -> &[usize] {
        match self {
            Instruction::Controlled { controls, .. } => controls,
            _ => &[],
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        let mut v = self.controls().to_vec();
        v.extend(self.targets());
        v
    }

    pub fn is_t(&self) -> bool {
        matches!(self, Instruction::Gate(Gate::T(_)))
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Epr(a, b) => write!(f, "EPR {a} {b}"),
            Instruction::Gate(g) => write!(f, "{g}"),
            Instruction::Bell { r, s, x, z } => write!(f, "BELL {r} {s} -> {x} {z}"),
            Instruction::Cond { kind, q, cond } => {
                let name = match kind {
                    Correction::Pdg => "PDG",
                    Correction::X => "X",
                    Correction::Z => "Z",
                };
                write!(f, "{name} {q} IF {cond}")
            }
            Instruction::Controlled { controls, gate } => {
                let base = match gate {
                    Gate::Cnot(..) => "CNOT",
                    g => g.kind().name(),
                };
                write!(f, "{}{}", "C".repeat(controls.len()), base)?;
                for c in controls {
                    write!(f, " {c}")?;
                }
                for q in gate.qubits() {
                    write!(f, " {q}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("instruction {index} (`{text}`) addresses qubit {qubit} outside {total} qubits")]
    QubitOutOfRange { index: usize, text: String, qubit: usize, total: usize },
    #[error("instruction {index} (`{text}`) uses variable `{var}` before it is measured")]
    UnboundVariable { index: usize, text: String, var: String },
    #[error("variable `{0}` is defined twice")]
    DuplicateVariable(String),
    #[error("instruction {index} (`{text}`) repeats a qubit")]
    RepeatedQubit { index: usize, text: String },
    #[error("logical wires must be numbered 0..{0} without gaps")]
    BadOutputs(usize),
}

/// A flat program. Logical wire `j` enters on qubit `j` and leaves on
/// `outputs[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub total_qubits: usize,
    pub outputs: Vec<usize>,
    pub instructions: Vec<Instruction>,
}

impl Program {
    pub fn num_wires(&self) -> usize {
        self.outputs.len()
    }

    pub fn bell_count(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Bell { .. })).count()
    }

    pub fn epr_count(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Epr(..))).count()
    }

    pub fn t_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| {
                matches!(i, Instruction::Gate(Gate::T(_)) | Instruction::Controlled { gate: Gate::T(_), .. })
            })
            .count()
    }

    /// True when the program has no measurements or classical conditions.
    pub fn is_unitary(&self) -> bool {
        self.instructions
            .iter()
            .all(|i| !matches!(i, Instruction::Bell { .. } | Instruction::Cond { .. }))
    }

    /// Checks qubit ranges, variable definitions and use-after-definition.
    pub fn validate(&self) -> Result<(), ProgramError> {
        let mut defined = BTreeSet::new();
        for (index, ins) in self.instructions.iter().enumerate() {
            let text = || ins.to_string();
            let qs = ins.qubits();
            for &q in &qs {
                if q >= self.total_qubits {
                    return Err(ProgramError::QubitOutOfRange {
                        index,
                        text: text(),
                        qubit: q,
                        total: self.total_qubits,
                    });
                }
            }
            let distinct: BTreeSet<_> = qs.iter().collect();
            if distinct.len() != qs.len() {
                return Err(ProgramError::RepeatedQubit { index, text: text() });
            }
            match ins {
                Instruction::Bell { x, z, .. } => {
                    for v in [x, z] {
                        if !defined.insert(v.name().to_string()) {
                            return Err(ProgramError::DuplicateVariable(v.name().to_string()));
                        }
                    }
                }
                Instruction::Cond { cond, .. } => {
                    for v in cond.vars() {
                        if !defined.contains(v.name()) {
                            return Err(ProgramError::UnboundVariable {
                                index,
                                text: text(),
                                var: v.name().to_string(),
                            });
                        }
                    }
                }
                _ => {}
            }
        }
        for &q in &self.outputs {
            if q >= self.total_qubits {
                return Err(ProgramError::BadOutputs(self.outputs.len()));
            }
        }
        if self.outputs.len() > self.total_qubits {
            return Err(ProgramError::BadOutputs(self.outputs.len()));
        }
        Ok(())
    }

    /// ASAP schedule under the fixed cost model. Conditioned corrections wait
    /// for the Bell measurements that define their variables.
    pub fn depth_metrics(&self) -> DepthMetrics {
        let mut ready = vec![0usize; self.total_qubits];
        let mut tdepth = vec![0usize; self.total_qubits];
        let mut var_ready: HashMap<&str, (usize, usize)> = HashMap::new();
        let mut m = DepthMetrics::default();
        for ins in &self.instructions {
            let qs = ins.qubits();
            let mut start = qs.iter().map(|&q| ready[q]).max().unwrap_or(0);
            let mut td = qs.iter().map(|&q| tdepth[q]).max().unwrap_or(0);
            if let Instruction::Cond { cond, .. } = ins {
                for v in cond.vars() {
                    if let Some(&(t, d)) = var_ready.get(v.name()) {
                        start = start.max(t);
                        td = td.max(d);
                    }
                }
            }
            let cost = match ins {
                Instruction::Epr(..) => EPR_COST,
                Instruction::Bell { .. } => BELL_COST,
                _ => GATE_COST,
            };
            if ins.is_t() {
                td += 1;
                m.t_count += 1;
            }
            if matches!(
                ins,
                Instruction::Gate(_) | Instruction::Cond { .. } | Instruction::Controlled { .. }
            ) {
                m.gate_count += 1;
            }
            let end = start + cost;
            for &q in &qs {
                ready[q] = end;
                tdepth[q] = td;
            }
            if let Instruction::Bell { x, z, .. } = ins {
                var_ready.insert(x.name(), (end, td));
                var_ready.insert(z.name(), (end, td));
            }
            m.total_depth = m.total_depth.max(end);
            m.t_depth = m.t_depth.max(td);
        }
        m
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("QUBITS {}\n", self.total_qubits);
        for ins in &self.instructions {
            out.push_str(&ins.to_string());
            out.push('\n');
        }
        for (j, q) in self.outputs.iter().enumerate() {
            out.push_str(&format!("OUT {j} {q}\n"));
        }
        out
    }

    /// Reads the compiled-program text format. Outcome variables are read as
    /// [`Owner::Local`].
    pub fn parse(text: &str) -> Result<Program, ProgramError> {
        let mut total = None;
        let mut instructions = Vec::new();
        let mut outs: Vec<(usize, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let syntax = |msg: String| ProgramError::Syntax { line, msg };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = t.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| syntax(format!("bad index `{s}`")));
            if total.is_none() {
                if tokens.len() != 2 || tokens[0] != "QUBITS" {
                    return Err(syntax("expected `QUBITS <n>` header".into()));
                }
                total = Some(num(tokens[1])?);
                continue;
            }
            if let Some(pos) = tokens.iter().position(|&x| x == "IF") {
                let kind = match tokens[0] {
                    "PDG" => Correction::Pdg,
                    "X" => Correction::X,
                    "Z" => Correction::Z,
                    other => return Err(syntax(format!("`{other}` cannot be conditioned"))),
                };
                if pos != 2 || tokens.len() < 4 {
                    return Err(syntax("expected `<G> q IF <keypoly>`".into()));
                }
                let q = num(tokens[1])?;
                let cond = KeyPoly::parse(&tokens[3..].join(" "))
                    .map_err(|e| syntax(e.to_string()))?;
                instructions.push(Instruction::Cond { kind, q, cond });
                continue;
            }
            match tokens[0] {
                "EPR" if tokens.len() == 3 => {
                    instructions.push(Instruction::Epr(num(tokens[1])?, num(tokens[2])?))
                }
                "BELL" if tokens.len() == 6 && tokens[3] == "->" => {
                    instructions.push(Instruction::Bell {
                        r: num(tokens[1])?,
                        s: num(tokens[2])?,
                        x: Var::new(tokens[4], Owner::Local),
                        z: Var::new(tokens[5], Owner::Local),
                    })
                }
                "OUT" if tokens.len() == 3 => outs.push((num(tokens[1])?, num(tokens[2])?)),
                _ => {
                    let ins = parse_gate_line(&tokens, line)?
                        .ok_or_else(|| syntax(format!("unknown instruction `{t}`")))?;
                    instructions.push(ins);
                }
            }
        }
        let Some(total_qubits) = total else {
            return Err(ProgramError::Syntax { line: 1, msg: "missing `QUBITS <n>` header".into() });
        };
        outs.sort();
        if outs.iter().enumerate().any(|(j, &(w, _))| w != j) {
            return Err(ProgramError::BadOutputs(outs.len()));
        }
        let p = Program { total_qubits, outputs: outs.into_iter().map(|(_, q)| q).collect(), instructions };
        p.validate()?;
        Ok(p)
    }
}

fn parse_gate_line(tokens: &[&str], line: usize) -> Result<Option<Instruction>, ProgramError> {
    let lift = |e: crate::circuit::CircuitError| ProgramError::Syntax { line, msg: e.to_string() };
    if let Some(g) = parse_gate_tokens(tokens, line).map_err(lift)? {
        return Ok(Some(Instruction::Gate(g)));
    }
    // Controlled form: k leading `C`s on a base gate name.
    let name = tokens[0];
    let k = name.chars().take_while(|&ch| ch == 'C').count();
    for controls in (1..=k).rev() {
        let base = &name[controls..];
        let Some(kind) = GateKind::from_name(base) else { continue };
        let operands = &tokens[1..];
        if operands.len() != controls + kind.arity() {
            return Err(ProgramError::Syntax { line, msg: format!("wrong operand count for `{name}`") });
        }
        let nums = operands
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ProgramError::Syntax { line, msg: "bad index".into() })?;
        let gate = Gate::from_parts(kind, &nums[controls..]).expect("arity checked");
        return Ok(Some(Instruction::Controlled { controls: nums[..controls].to_vec(), gate }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Program {
        Program {
            total_qubits: 3,
            outputs: vec![2],
            instructions: vec![
                Instruction::Epr(1, 2),
                Instruction::Gate(Gate::H(2)),
                Instruction::Bell { r: 0, s: 1, x: Var::local("m0x"), z: Var::local("m0z") },
                Instruction::Cond { kind: Correction::X, q: 2, cond: KeyPoly::parse("m0x").unwrap() },
                Instruction::Cond {
                    kind: Correction::Z,
                    q: 2,
                    cond: KeyPoly::parse("m0x*m0z ^ 1").unwrap(),
                },
            ],
        }
    }

    #[test]
    fn text_round_trip() {
        let p = sample();
        let text = p.serialize();
        assert_eq!(
            text,
            "QUBITS 3\nEPR 1 2\nH 2\nBELL 0 1 -> m0x m0z\nX 2 IF m0x\nZ 2 IF m0x*m0z ^ 1\nOUT 0 2\n"
        );
        assert_eq!(Program::parse(&text).unwrap(), p);
    }

    #[test]
    fn controlled_lines_round_trip() {
        let p = Program {
            total_qubits: 4,
            outputs: vec![0],
            instructions: vec![
                Instruction::Controlled { controls: vec![1], gate: Gate::X(0) },
                Instruction::Controlled { controls: vec![1, 2], gate: Gate::Pdg(0) },
                Instruction::Controlled { controls: vec![3], gate: Gate::Z(0) },
            ],
        };
        let text = p.serialize();
        assert!(text.contains("CX 1 0\nCCPDG 1 2 0\nCZ 3 0\n"));
        assert_eq!(Program::parse(&text).unwrap(), p);
        assert!(p.is_unitary());
    }

    #[test]
    fn rejects_use_before_measurement() {
        let text = "QUBITS 2\nX 1 IF m0x\nBELL 0 1 -> m0x m0z\nOUT 0 1\n";
        assert!(matches!(Program::parse(text), Err(ProgramError::UnboundVariable { .. })));
        let text = "QUBITS 2\nH 5\nOUT 0 1\n";
        assert!(matches!(Program::parse(text), Err(ProgramError::QubitOutOfRange { .. })));
        assert!(matches!(Program::parse("QUBITS 2\nBELL 0 1 m0x\n"), Err(ProgramError::Syntax { .. })));
    }

    #[test]
    fn depth_follows_cost_model() {
        // EPR 2, H 1 on qubit 2 -> 3; BELL on (0,1): qubit 1 ready at 2 -> ends 5;
        // X waits for m0x (5) -> 6; Z -> 7.
        let m = sample().depth_metrics();
        assert_eq!(m.total_depth, 7);
        assert_eq!(m.t_depth, 0);
        assert_eq!(m.gate_count, 3);
    }
}
