use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use tdepth_core::circuit::{CircuitError, LayeredCircuit};
use tdepth_core::compiler::{
    apply_circuit, compile_measure, compile_speculative, execute_speculative, report, to_unitary,
    validate_classical, verify_program, CompileError,
};
use tdepth_core::gardenhose::{
    analyze_cross_terms, causality_check, gadget_truth_table, run_gadget, Bipartition, GardenError,
    ProtocolOptions,
};
use tdepth_core::program::{Program, ProgramError};
use tdepth_core::sim::{execute, fidelity_up_to_phase, SimError, StateVector};

#[derive(Parser, Debug)]
#[command(name = "tdepth", about = "Teleportation-linked Clifford+T compilation with depth set by T-depth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Measure,
    Unitary,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a layered circuit into a linked program.
    Compile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "measure")]
        mode: Mode,
    },
    /// Compile (or load) a program and compare it with the circuit on every
    /// measurement branch.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Verify this program instead of compiling the circuit.
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "measure")]
        mode: Mode,
        #[arg(long, required_unless_present = "exhaustive")]
        seed: Option<u64>,
        /// Enumerate all branches instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        /// Random input states to try.
        #[arg(long, default_value_t = 4)]
        inputs: usize,
        /// Sampled runs per input without --exhaustive.
        #[arg(long, default_value_t = 32)]
        shots: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Run the two-party gadget.
    Gadget {
        #[arg(long, value_parser = parse_bit, required_unless_present = "exhaustive")]
        p: Option<bool>,
        #[arg(long, value_parser = parse_bit, required_unless_present = "exhaustive")]
        q: Option<bool>,
        #[arg(long, required_unless_present = "exhaustive")]
        seed: Option<u64>,
        /// Print the truth table over all settings and branches.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 50)]
        inputs: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Run the instantaneous two-party protocol for a T-depth ≤ 1 circuit.
    Protocol1 {
        #[arg(long = "in")]
        input: PathBuf,
        /// Wires Alice holds at the start.
        #[arg(long, value_delimiter = ',')]
        alice: Vec<usize>,
        /// Wires returned to Alice at the end.
        #[arg(long = "alice-out", value_delimiter = ',')]
        alice_out: Vec<usize>,
        #[arg(long)]
        seed: u64,
        /// Measure the outputs in the Z basis before the exchange.
        #[arg(long)]
        measure: bool,
        /// Basis-state input instead of a random state.
        #[arg(long)]
        bits: Option<String>,
        /// Write the transcript log here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Report products of Alice's and Bob's outcomes reaching the second T layer.
    Crossterms {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        alice: Vec<usize>,
    },
    /// Speculative grouped linking for a circuit that maps basis states to
    /// basis states.
    Speculate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: usize,
        /// Input bitstring, character `i` for qubit `i`.
        #[arg(long)]
        bits: String,
        #[arg(long)]
        seed: u64,
    },
    /// Depth metrics of a circuit.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Invalid(String),
    #[error("fidelity failure: {0}")]
    Fidelity(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Invalid(_) => 3,
            CliError::Fidelity(_) => 4,
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        if e.is_syntax() {
            CliError::Parse(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<ProgramError> for CliError {
    fn from(e: ProgramError) -> Self {
        match e {
            ProgramError::Syntax { .. } => CliError::Parse(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Circuit(c) => c.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<GardenError> for CliError {
    fn from(e: GardenError) -> Self {
        match e {
            GardenError::Circuit(c) => c.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn parse_bit(s: &str) -> Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("expected 0 or 1, got `{s}`")),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<LayeredCircuit, CliError> {
    Ok(LayeredCircuit::parse(&read(path)?)?)
}

fn bit(b: bool) -> u8 {
    u8::from(b)
}

/// Fidelity printed at a fixed precision so reruns are byte-identical.
fn show(f: f64) -> String {
    format!("{:?}", (f * 1e12).round() / 1e12)
}

fn random_inputs(n: usize, count: usize, seed: u64) -> Result<Vec<StateVector>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| StateVector::random(n, &mut rng)).collect::<Result<_, _>>()?)
}

fn build_program(c: &LayeredCircuit, mode: Mode) -> Result<Program, CliError> {
    let compiled = compile_measure(c)?;
    Ok(match mode {
        Mode::Measure => compiled.program,
        Mode::Unitary => to_unitary(&compiled.program)?,
    })
}

fn cmd_compile(input: &Path, output: &Path, mode: Mode) -> Result<Vec<String>, CliError> {
    let c = load_circuit(input)?;
    let compiled = compile_measure(&c)?;
    let rep = report(&c, &compiled);
    let program = match mode {
        Mode::Measure => compiled.program,
        Mode::Unitary => to_unitary(&compiled.program)?,
    };
    fs::write(output, program.serialize()).map_err(|e| CliError::Io(format!("{}: {e}", output.display())))?;
    let mut lines = vec![format!("mode={}", if mode == Mode::Measure { "measure" } else { "unitary" })];
    lines.extend(rep.lines());
    if mode == Mode::Unitary {
        lines.push(format!("unitary_qubits={}", program.total_qubits));
        lines.push(format!("unitary_depth={}", program.depth_metrics().total_depth));
    }
    Ok(lines)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    input: &Path,
    program_path: Option<&Path>,
    mode: Mode,
    seed: Option<u64>,
    exhaustive: bool,
    nmax: usize,
    inputs: usize,
    shots: usize,
    tolerance: f64,
) -> Result<Vec<String>, CliError> {
    if nmax > 6 {
        return Err(CliError::Invalid(format!("--nmax {nmax} exceeds 6")));
    }
    if tolerance <= 0.0 {
        return Err(CliError::Invalid("tolerance must be positive".into()));
    }
    let c = load_circuit(input)?;
    if c.n > nmax {
        return Err(CliError::Invalid(format!("circuit has {} qubits, above --nmax {nmax}", c.n)));
    }
    let program = match program_path {
        Some(p) => Program::parse(&read(p)?)?,
        None => build_program(&c, mode)?,
    };
    if program.num_wires() != c.n {
        return Err(CliError::Invalid(format!(
            "program has {} logical wires, circuit has {}",
            program.num_wires(),
            c.n
        )));
    }
    let states = random_inputs(c.n, inputs, seed.unwrap_or(0))?;
    let mut lines = Vec::new();
    let (min_fidelity, branches, worst) = if exhaustive {
        let r = verify_program(&program, &c, &states)?;
        let worst = r.worst.iter().map(|(k, v)| format!("{k}={}", bit(*v))).collect::<Vec<_>>().join(",");
        (r.min_fidelity, r.branches, worst)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0) ^ 0x5eed);
        let (mut min, mut count, mut worst) = (1.0f64, 0usize, String::new());
        for psi in &states {
            let expected = apply_circuit(&c, psi)?;
            for _ in 0..shots {
                let b = execute(&program, psi, &mut rng)?;
                let f = fidelity_up_to_phase(&b.state, &expected)?;
                if count == 0 || f < min {
                    min = f;
                    worst = b.outcomes.iter().map(|(k, v)| format!("{k}={}", bit(*v))).collect::<Vec<_>>().join(",");
                }
                count += 1;
            }
        }
        (min, count, worst)
    };
    lines.push(format!("inputs={}", states.len()));
    lines.push(format!("branches={branches}"));
    lines.push(format!("min_fidelity={}", show(min_fidelity)));
    if min_fidelity < 1.0 - tolerance {
        lines.push(format!("worst_branch={worst}"));
        for l in &lines {
            println!("{l}");
        }
        return Err(CliError::Fidelity(format!("min fidelity {} below 1 - {tolerance}", show(min_fidelity))));
    }
    Ok(lines)
}

fn cmd_gadget(
    p: Option<bool>,
    q: Option<bool>,
    seed: Option<u64>,
    exhaustive: bool,
    inputs: usize,
    tolerance: f64,
) -> Result<Vec<String>, CliError> {
    let mut lines = Vec::new();
    if exhaustive {
        let states = random_inputs(1, inputs, seed.unwrap_or(0))?;
        let rows = gadget_truth_table(&states)?;
        let mut ok = true;
        for r in &rows {
            let pass = r.min_fidelity >= 1.0 - tolerance
                && r.applied_pdg == (r.p != r.q)
                && r.symbolic_mismatches == 0;
            ok &= pass;
            lines.push(format!(
                "row p={} q={} pdg={} out={} branches={} min_fidelity={} pass={}",
                bit(r.p),
                bit(r.q),
                bit(r.applied_pdg),
                r.output,
                r.branches,
                show(r.min_fidelity),
                pass
            ));
        }
        lines.push(format!("all_pass={ok}"));
        if !ok {
            for l in &lines {
                println!("{l}");
            }
            return Err(CliError::Fidelity("gadget truth table failed".into()));
        }
        return Ok(lines);
    }
    let (p, q, seed) = (p.unwrap_or(false), q.unwrap_or(false), seed.unwrap_or(0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = StateVector::random(1, &mut rng)?;
    let r = run_gadget(p, q, &psi, &mut rng)?;
    let mut out = r.state.clone();
    out.apply_mask(&r.mask)?;
    let mut expected = psi.clone();
    if r.applied_pdg {
        expected.apply_gate(&tdepth_core::circuit::Gate::Pdg(0))?;
    }
    let f = fidelity_up_to_phase(&out, &expected)?;
    lines.push(format!("p={}", bit(p)));
    lines.push(format!("q={}", bit(q)));
    lines.push(format!("pdg={}", bit(r.applied_pdg)));
    lines.push(format!("out={}", r.output_qubit));
    for rec in &r.records {
        lines.push(format!("outcome {}={} {}={}", rec.var_x, bit(rec.x), rec.var_z, bit(rec.z)));
    }
    lines.push(format!("mask_a={}", bit(r.mask.a[0])));
    lines.push(format!("mask_b={}", bit(r.mask.b[0])));
    lines.push(format!("key_a={}", r.symbolic_mask.a[0]));
    lines.push(format!("key_b={}", r.symbolic_mask.b[0]));
    lines.push(format!("fidelity={}", show(f)));
    if f < 1.0 - tolerance {
        for l in &lines {
            println!("{l}");
        }
        return Err(CliError::Fidelity(format!("gadget output fidelity {}", show(f))));
    }
    Ok(lines)
}

#[allow(clippy::too_many_arguments)]
fn cmd_protocol1(
    input: &Path,
    alice: &[usize],
    alice_out: &[usize],
    seed: u64,
    measure: bool,
    bits: Option<&str>,
    transcript: Option<&Path>,
    tolerance: f64,
) -> Result<Vec<String>, CliError> {
    let c = load_circuit(input)?;
    let part = Bipartition::new(alice.iter().copied(), alice_out.iter().copied());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = match bits {
        Some(b) => StateVector::from_bits(b)?,
        None => StateVector::random(c.n, &mut rng)?,
    };
    if psi.n() != c.n {
        return Err(CliError::Invalid(format!("input has {} qubits, circuit has {}", psi.n(), c.n)));
    }
    let run = tdepth_core::gardenhose::run_protocol1(&c, &part, &psi, &mut rng, ProtocolOptions { measure_outputs: measure })?;
    if let Some(path) = transcript {
        fs::write(path, run.transcript.export()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let causality = causality_check(&run.transcript);
    let mut lines = vec![
        format!("rounds={}", run.transcript.exchange_rounds().len()),
        format!("causality={}", if causality.is_ok() { "pass" } else { "fail" }),
        format!("gadgets={}", run.plan.gadgets),
        format!("epr_pairs={}", run.transcript.epr_pairs()),
        format!("events={}", run.transcript.events().count()),
        "communication_time=1".to_string(),
    ];
    if let Err(v) = causality {
        lines.push(format!("violation={v}"));
    }
    let expected = apply_circuit(&c, &psi)?;
    let fidelity = match (&run.state, &run.measured) {
        (Some(state), _) => fidelity_up_to_phase(state, &expected)?,
        (None, Some(m)) => {
            lines.push(format!("measured={m}"));
            // probability of the corrected readout under the exact output
            let idx = m.chars().enumerate().filter(|(_, ch)| *ch == '1').map(|(i, _)| 1usize << i).sum::<usize>();
            expected.amplitudes()[idx].norm_sqr()
        }
        (None, None) => unreachable!("a run yields a state or a readout"),
    };
    if measure {
        lines.push(format!("readout_probability={}", show(fidelity)));
        return Ok(lines);
    }
    lines.push(format!("fidelity={}", show(fidelity)));
    if fidelity < 1.0 - tolerance {
        for l in &lines {
            println!("{l}");
        }
        return Err(CliError::Fidelity(format!("protocol output fidelity {}", show(fidelity))));
    }
    Ok(lines)
}

fn cmd_crossterms(input: &Path, alice: &[usize]) -> Result<Vec<String>, CliError> {
    let c = load_circuit(input)?;
    let alice: BTreeSet<usize> = alice.iter().copied().collect();
    Ok(analyze_cross_terms(&c, &alice)?.lines())
}

fn cmd_speculate(input: &Path, r: usize, bits: &str, seed: u64) -> Result<Vec<String>, CliError> {
    let c = load_circuit(input)?;
    let sp = compile_speculative(&c, r, bits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = execute_speculative(&sp, &mut rng)?;
    let last = *validate_classical(&c, bits)?.last().expect("at least one stage");
    let direct: String = (0..c.n).map(|q| if last >> q & 1 == 1 { '1' } else { '0' }).collect();
    let mut lines = vec![format!("output={}", run.output), format!("direct={direct}")];
    lines.extend(run.report.lines());
    lines.push(format!("matches_direct={}", run.output == direct));
    Ok(lines)
}

fn cmd_stats(input: &Path) -> Result<Vec<String>, CliError> {
    let c = load_circuit(input)?;
    let m = c.depth_metrics();
    Ok(vec![
        format!("qubits={}", c.n),
        format!("stages={}", c.k()),
        format!("total_depth={}", m.total_depth),
        format!("t_depth={}", m.t_depth),
        format!("t_count={}", m.t_count),
        format!("gate_count={}", m.gate_count),
    ])
}

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    match cli.command {
        Command::Compile { input, output, mode } => cmd_compile(&input, &output, mode),
        Command::Verify { input, program, mode, seed, exhaustive, nmax, inputs, shots, tolerance } => {
            cmd_verify(&input, program.as_deref(), mode, seed, exhaustive, nmax, inputs, shots, tolerance)
        }
        Command::Gadget { p, q, seed, exhaustive, inputs, tolerance } => {
            cmd_gadget(p, q, seed, exhaustive, inputs, tolerance)
        }
        Command::Protocol1 { input, alice, alice_out, seed, measure, bits, transcript, tolerance } => cmd_protocol1(
            &input,
            &alice,
            &alice_out,
            seed,
            measure,
            bits.as_deref(),
            transcript.as_deref(),
            tolerance,
        ),
        Command::Crossterms { input, alice } => cmd_crossterms(&input, &alice),
        Command::Speculate { input, r, bits, seed } => cmd_speculate(&input, r, &bits, seed),
        Command::Stats { input } => cmd_stats(&input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
