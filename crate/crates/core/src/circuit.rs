//! Layered Clifford+T circuits: gates, stages, the text format, greedy
//! layering and the depth cost model.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A gate from the Clifford+T set. Two-qubit gates list the control first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    P(usize),
    Pdg(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
    T(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    P,
    Pdg,
    X,
    Z,
    Cnot,
    T,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::P => "P",
            GateKind::Pdg => "PDG",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::T => "T",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "H" => GateKind::H,
            "P" => GateKind::P,
            "PDG" => GateKind::Pdg,
            "X" => GateKind::X,
            "Z" => GateKind::Z,
            "CNOT" => GateKind::Cnot,
            "T" => GateKind::T,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        if self == GateKind::Cnot {
            2
        } else {
            1
        }
    }
}

impl Gate {
    /// Builds a gate from a kind and its target list, checking arity.
    pub fn from_parts(kind: GateKind, targets: &[usize]) -> Option<Gate> {
        if targets.len() != kind.arity() {
            return None;
        }
        let q = targets[0];
        Some(match kind {
            GateKind::H => Gate::H(q),
            GateKind::P => Gate::P(q),
            GateKind::Pdg => Gate::Pdg(q),
            GateKind::X => Gate::X(q),
            GateKind::Z => Gate::Z(q),
            GateKind::T => Gate::T(q),
            GateKind::Cnot => Gate::Cnot(q, targets[1]),
        })
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::P(_) => GateKind::P,
            Gate::Pdg(_) => GateKind::Pdg,
            Gate::X(_) => GateKind::X,
            Gate::Z(_) => GateKind::Z,
            Gate::Cnot(..) => GateKind::Cnot,
            Gate::T(_) => GateKind::T,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Cnot(c, t) => vec![c, t],
            Gate::H(q) | Gate::P(q) | Gate::Pdg(q) | Gate::X(q) | Gate::Z(q) | Gate::T(q) => {
                vec![q]
            }
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::T(_))
    }

    /// The same gate acting on relabelled qubits.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::P(q) => Gate::P(f(q)),
            Gate::Pdg(q) => Gate::Pdg(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::T(q) => Gate::T(f(q)),
            Gate::Cnot(c, t) => Gate::Cnot(f(c), f(t)),
        }
    }

    /// Checks arity-independent invariants against a register of `n` qubits.
    pub fn validate(&self, n: usize) -> Result<(), CircuitError> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(CircuitError::IndexOutOfRange { gate: *self, qubits: n });
            }
        }
        if let Gate::Cnot(c, t) = *self {
            if c == t {
                return Err(CircuitError::RepeatedTarget(*self));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Cnot(c, t) => write!(f, "CNOT {c} {t}"),
            g => write!(f, "{} {}", g.kind().name(), g.qubits()[0]),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("gate `{gate}` addresses a qubit outside a {qubits}-qubit register")]
    IndexOutOfRange { gate: Gate, qubits: usize },
    #[error("gate `{0}` repeats a qubit")]
    RepeatedTarget(Gate),
    #[error("line {line}: `{gate}` follows the T layer of its stage; close the stage with `---` first")]
    GateAfterTLayer { line: usize, gate: Gate },
    #[error("stage {stage}: T gate found inside the Clifford block")]
    TInClifford { stage: usize },
    #[error("stage {stage}: qubit {qubit} appears twice in the T layer")]
    DuplicateT { stage: usize, qubit: usize },
    #[error("stage {stage}: only the final stage may have an empty T layer")]
    EmptyTLayer { stage: usize },
    #[error("a circuit needs at least one stage")]
    NoStages,
}

impl CircuitError {
    /// True for errors raised by the text reader itself rather than by
    /// structural validation of a well-formed file.
    pub fn is_syntax(&self) -> bool {
        matches!(self, CircuitError::Syntax { .. })
    }
}

/// One Clifford sub-circuit followed by a layer of T gates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stage {
    pub clifford: Vec<Gate>,
    pub t_layer: BTreeSet<usize>,
}

impl Stage {
    pub fn new(clifford: Vec<Gate>, t_layer: impl IntoIterator<Item = usize>) -> Self {
        Stage { clifford, t_layer: t_layer.into_iter().collect() }
    }

    /// Clifford gates followed by the T layer in ascending qubit order.
    pub fn gates(&self) -> impl Iterator<Item = Gate> + '_ {
        self.clifford.iter().copied().chain(self.t_layer.iter().map(|&q| Gate::T(q)))
    }

    /// ASAP depth of the Clifford block plus one for a nonempty T layer.
    pub fn depth(&self, n: usize) -> usize {
        asap_depth(&self.clifford, n) + usize::from(!self.t_layer.is_empty())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredCircuit {
    pub n: usize,
    pub stages: Vec<Stage>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DepthMetrics {
    pub total_depth: usize,
    pub t_depth: usize,
    pub t_count: usize,
    pub gate_count: usize,
}

impl LayeredCircuit {
    pub fn new(n: usize, stages: Vec<Stage>) -> Result<Self, CircuitError> {
        let c = LayeredCircuit { n, stages };
        c.validate()?;
        Ok(c)
    }

    /// Number of stages (K).
    pub fn k(&self) -> usize {
        self.stages.len()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.stages.is_empty() {
            return Err(CircuitError::NoStages);
        }
        let last = self.stages.len() - 1;
        for (i, stage) in self.stages.iter().enumerate() {
            for g in &stage.clifford {
                if !g.is_clifford() {
                    return Err(CircuitError::TInClifford { stage: i });
                }
                g.validate(self.n)?;
            }
            for &q in &stage.t_layer {
                Gate::T(q).validate(self.n)?;
            }
            if stage.t_layer.is_empty() && i != last {
                return Err(CircuitError::EmptyTLayer { stage: i });
            }
        }
        Ok(())
    }

    /// The circuit as a flat gate list in execution order.
    pub fn flatten(&self) -> Vec<Gate> {
        self.stages.iter().flat_map(|s| s.gates()).collect()
    }

    pub fn depth_metrics(&self) -> DepthMetrics {
        let mut m = DepthMetrics::default();
        for s in &self.stages {
            m.total_depth += s.depth(self.n);
            m.t_count += s.t_layer.len();
            m.gate_count += s.clifford.len() + s.t_layer.len();
            if !s.t_layer.is_empty() {
                m.t_depth += 1;
            }
        }
        m
    }

    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        parse_circuit(text)
    }

    pub fn serialize(&self) -> String {
        serialize_circuit(self)
    }
}

/// Greedy ASAP layering: every gate costs one layer.
pub fn asap_depth(gates: &[Gate], n: usize) -> usize {
    let mut ready = vec![0usize; n];
    let mut depth = 0;
    for g in gates {
        let qs = g.qubits();
        let start = qs.iter().map(|&q| ready[q]).max().unwrap_or(0);
        for &q in &qs {
            ready[q] = start + 1;
        }
        depth = depth.max(start + 1);
    }
    depth
}

fn syntax(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Syntax { line, msg: msg.into() }
}

/// Parses a gate line's operands. Returns `None` for lines that are not gates.
pub(crate) fn parse_gate_tokens(
    tokens: &[&str],
    line: usize,
) -> Result<Option<Gate>, CircuitError> {
    let Some(kind) = GateKind::from_name(tokens[0]) else {
        return Ok(None);
    };
    let args = &tokens[1..];
    if args.len() != kind.arity() {
        return Err(syntax(
            line,
            format!("{} takes {} operand(s), got {}", kind.name(), kind.arity(), args.len()),
        ));
    }
    let mut qs = Vec::with_capacity(args.len());
    for a in args {
        let q = a.parse::<usize>().map_err(|_| syntax(line, format!("bad qubit index `{a}`")))?;
        qs.push(q);
    }
    Ok(Gate::from_parts(kind, &qs))
}

/// Reads the line-based circuit format.
///
/// A trailing block of gates that is not closed by `---` is accepted as the
/// final stage.
pub fn parse_circuit(text: &str) -> Result<LayeredCircuit, CircuitError> {
    let mut n = None;
    let mut stages = Vec::new();
    let mut current = Stage::default();
    let mut open = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if n.is_none() {
            if tokens[0] != "QUBITS" || tokens.len() != 2 {
                return Err(syntax(line, "expected `QUBITS <n>` header"));
            }
            let count = tokens[1]
                .parse::<usize>()
                .map_err(|_| syntax(line, format!("bad qubit count `{}`", tokens[1])))?;
            n = Some(count);
            continue;
        }
        let n = n.unwrap();
        if tokens == ["---"] {
            stages.push(std::mem::take(&mut current));
            open = false;
            continue;
        }
        let gate = parse_gate_tokens(&tokens, line)?
            .ok_or_else(|| syntax(line, format!("unknown instruction `{}`", tokens[0])))?;
        gate.validate(n)?;
        open = true;
        match gate {
            Gate::T(q) => {
                if !current.t_layer.insert(q) {
                    return Err(CircuitError::DuplicateT { stage: stages.len(), qubit: q });
                }
            }
            g if !current.t_layer.is_empty() => {
                return Err(CircuitError::GateAfterTLayer { line, gate: g });
            }
            g => current.clifford.push(g),
        }
    }
    let Some(n) = n else {
        return Err(syntax(last_line.max(1), "missing `QUBITS <n>` header"));
    };
    if open {
        stages.push(current);
    }
    LayeredCircuit::new(n, stages)
}

/// Canonical text: header, then each stage's Clifford gates, its T gates in
/// ascending order, and a closing `---`.
pub fn serialize_circuit(c: &LayeredCircuit) -> String {
    let mut out = format!("QUBITS {}\n", c.n);
    for s in &c.stages {
        for g in s.gates() {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out.push_str("---\n");
    }
    out
}

/// Greedy stage construction from a flat gate list.
///
/// Clifford gates accumulate into the open stage; a T gate joins the open
/// stage's T layer. Once that layer is nonempty, a Clifford gate or a second
/// T on an already-used qubit opens a new stage.
pub fn layerize(gates: &[Gate], n: usize) -> Result<LayeredCircuit, CircuitError> {
    for g in gates {
        g.validate(n)?;
    }
    let mut stages = Vec::new();
    let mut current = Stage::default();
    for &g in gates {
        match g {
            Gate::T(q) => {
                if current.t_layer.contains(&q) {
                    stages.push(std::mem::take(&mut current));
                }
                current.t_layer.insert(q);
            }
            g => {
                if !current.t_layer.is_empty() {
                    stages.push(std::mem::take(&mut current));
                }
                current.clifford.push(g);
            }
        }
    }
    if stages.is_empty() || !current.clifford.is_empty() || !current.t_layer.is_empty() {
        stages.push(current);
    }
    LayeredCircuit::new(n, stages)
}
