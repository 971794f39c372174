//! Independent dense-matrix oracle and circuit generators shared by the
//! integration tests. Nothing here calls the library's simulator or frame
//! code: gates are written out as full `2^n × 2^n` matrices and Pauli frames
//! are identified by brute force.

#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use tdepth_core::circuit::{Gate, LayeredCircuit, Stage};
use tdepth_core::frame::PauliMask;

pub const EPS: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub dim: usize,
    pub m: Vec<Complex64>,
}

impl Dense {
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = c(1.0, 0.0);
        }
        Dense { dim, m }
    }

    pub fn at(&self, r: usize, col: usize) -> Complex64 {
        self.m[r * self.dim + col]
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let d = self.dim;
        let mut m = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    m[i * d + j] += a * o.at(k, j);
                }
            }
        }
        Dense { dim: d, m }
    }

    pub fn adjoint(&self) -> Dense {
        let d = self.dim;
        let mut m = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                m[j * d + i] = self.at(i, j).conj();
            }
        }
        Dense { dim: d, m }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.at(i, j) * v[j]).sum()).collect()
    }

    /// `self = λ·other` for some unit-modulus `λ`, entrywise within `tol`.
    pub fn equal_up_to_phase(&self, o: &Dense, tol: f64) -> bool {
        let Some(k) = (0..self.m.len()).max_by(|&a, &b| o.m[a].norm().total_cmp(&o.m[b].norm())) else {
            return true;
        };
        if o.m[k].norm() < tol {
            return self.m.iter().all(|z| z.norm() < tol);
        }
        let lambda = self.m[k] / o.m[k];
        if (lambda.norm() - 1.0).abs() > tol {
            return false;
        }
        self.m.iter().zip(&o.m).all(|(x, y)| (x - lambda * y).norm() < tol)
    }
}

/// One-qubit matrix `[[m00, m01], [m10, m11]]` for a named gate.
pub fn single(g: &Gate) -> [[Complex64; 2]; 2] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let h = c(FRAC_1_SQRT_2, 0.0);
    match g {
        Gate::H(_) => [[h, h], [h, -h]],
        Gate::P(_) => [[o, z], [z, i]],
        Gate::Pdg(_) => [[o, z], [z, -i]],
        Gate::X(_) => [[z, o], [o, z]],
        Gate::Z(_) => [[o, z], [z, -o]],
        Gate::T(_) => [[o, z], [z, c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)]],
        Gate::Cnot(..) => unreachable!("two-qubit gate"),
    }
}

/// Full matrix of `g` on `n` qubits; qubit `q` is bit `q` of the index.
pub fn gate_unitary(g: &Gate, n: usize) -> Dense {
    let dim = 1 << n;
    let mut m = vec![c(0.0, 0.0); dim * dim];
    match *g {
        Gate::Cnot(ctl, tgt) => {
            for col in 0..dim {
                let row = if col >> ctl & 1 == 1 { col ^ (1 << tgt) } else { col };
                m[row * dim + col] = c(1.0, 0.0);
            }
        }
        _ => {
            let q = g.qubits()[0];
            let u = single(g);
            for col in 0..dim {
                let bit = col >> q & 1;
                for (out, row_of_u) in u.iter().enumerate() {
                    let row = (col & !(1 << q)) | (out << q);
                    m[row * dim + col] = row_of_u[bit];
                }
            }
        }
    }
    Dense { dim, m }
}

/// Product of the gates, first gate applied first.
pub fn sequence_unitary<'a>(gates: impl IntoIterator<Item = &'a Gate>, n: usize) -> Dense {
    gates.into_iter().fold(Dense::identity(1 << n), |acc, g| gate_unitary(g, n).mul(&acc))
}

pub fn circuit_unitary(c: &LayeredCircuit) -> Dense {
    sequence_unitary(&c.flatten(), c.n)
}

/// `⊗_j X^{a_j} Z^{b_j}` with `Z` applied first.
pub fn pauli_unitary(m: &PauliMask) -> Dense {
    let n = m.a.len();
    let mut gates = Vec::new();
    for j in 0..n {
        if m.b[j] {
            gates.push(Gate::Z(j));
        }
        if m.a[j] {
            gates.push(Gate::X(j));
        }
    }
    sequence_unitary(&gates, n)
}

/// Every Pauli mask on `n` qubits, indexed by `a` bits then `b` bits.
pub fn all_masks(n: usize) -> Vec<PauliMask> {
    (0..1usize << (2 * n))
        .map(|code| PauliMask {
            a: (0..n).map(|j| code >> j & 1 == 1).collect(),
            b: (0..n).map(|j| code >> (n + j) & 1 == 1).collect(),
        })
        .collect()
}

/// The mask `m'` with `U σ(m) U† ∝ σ(m')`, if `U` maps `σ(m)` to a Pauli.
pub fn conjugated_mask(u: &Dense, m: &PauliMask) -> Option<PauliMask> {
    let n = m.a.len();
    let image = u.mul(&pauli_unitary(m)).mul(&u.adjoint());
    all_masks(n).into_iter().find(|cand| image.equal_up_to_phase(&pauli_unitary(cand), 1e-10))
}

pub fn fidelity(u: &[Complex64], v: &[Complex64]) -> f64 {
    let ip: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    ip.norm_sqr()
}

/// `σ(m)·v` computed directly on amplitudes, `Z` first.
pub fn pauli_apply(m: &PauliMask, v: &[Complex64]) -> Vec<Complex64> {
    let bits = |x: &[bool]| x.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| 1usize << j).sum::<usize>();
    let (xs, zs) = (bits(&m.a), bits(&m.b));
    let mut out = vec![c(0.0, 0.0); v.len()];
    for (i, amp) in v.iter().enumerate() {
        let sign = if (i & zs).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[i ^ xs] = amp * sign;
    }
    out
}

/// The unique mask `m` with `σ(m)·state ∝ expected`, if any.
pub fn identify_frame(state: &[Complex64], expected: &[Complex64], n: usize) -> Option<PauliMask> {
    let mut hits =
        all_masks(n).into_iter().filter(|m| fidelity(&pauli_apply(m, state), expected) > 1.0 - 1e-9);
    let first = hits.next()?;
    hits.next().is_none().then_some(first)
}

/// Random normalized state with uniform real and imaginary parts.
pub fn random_amplitudes(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1 << n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn random_clifford(n: usize, rng: &mut impl Rng) -> Gate {
    let q = rng.gen_range(0..n);
    match rng.gen_range(0..7) {
        0 | 1 => Gate::H(q),
        2 => Gate::P(q),
        3 => Gate::Pdg(q),
        4 => Gate::X(q),
        5 => Gate::Z(q),
        _ if n > 1 => {
            let t = (q + rng.gen_range(1..n)) % n;
            Gate::Cnot(q, t)
        }
        _ => Gate::H(q),
    }
}

/// Random layered circuit with `n` qubits and `k` stages. Every non-final
/// stage has a nonempty T layer; the final one may or may not.
pub fn random_circuit(n: usize, k: usize, rng: &mut impl Rng) -> LayeredCircuit {
    let stages = (0..k)
        .map(|i| {
            let gates = (0..rng.gen_range(0..=2 * n + 1)).map(|_| random_clifford(n, rng)).collect();
            let mut t: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if t.is_empty() && i + 1 < k {
                t.push(rng.gen_range(0..n));
            }
            Stage::new(gates, t)
        })
        .collect();
    LayeredCircuit::new(n, stages).expect("generated circuit is valid")
}

/// Gates that permute basis states up to phase: `X`, `CNOT`, diagonal
/// phases, and the `H Z H` / `H X H` conjugates of `Z` and `X`.
fn random_classical_gates(n: usize, rng: &mut impl Rng) -> Vec<Gate> {
    let q = rng.gen_range(0..n);
    match rng.gen_range(0..7) {
        0 => vec![Gate::X(q)],
        1 | 2 if n > 1 => vec![Gate::Cnot(q, (q + rng.gen_range(1..n)) % n)],
        1 | 2 => vec![Gate::X(q)],
        3 => vec![Gate::Z(q)],
        4 => vec![if rng.gen_bool(0.5) { Gate::P(q) } else { Gate::Pdg(q) }],
        5 => vec![Gate::H(q), Gate::Z(q), Gate::H(q)],
        _ => vec![Gate::H(q), Gate::X(q), Gate::H(q)],
    }
}

pub fn random_classical_circuit(n: usize, k: usize, rng: &mut impl Rng) -> LayeredCircuit {
    let stages = (0..k)
        .map(|i| {
            let gates = (0..rng.gen_range(0..=n + 1)).flat_map(|_| random_classical_gates(n, rng)).collect();
            let mut t: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if t.is_empty() && i + 1 < k {
                t.push(rng.gen_range(0..n));
            }
            Stage::new(gates, t)
        })
        .collect();
    LayeredCircuit::new(n, stages).expect("generated circuit is valid")
}

/// Direct classical evaluation: follows the single nonzero amplitude.
pub fn classical_output(c: &LayeredCircuit, bits: &str) -> String {
    let idx = bits.chars().enumerate().filter(|(_, ch)| *ch == '1').map(|(i, _)| 1usize << i).sum::<usize>();
    let u = circuit_unitary(c);
    let row = (0..u.dim).find(|&r| u.at(r, idx).norm() > 1e-9).expect("column is nonzero");
    (0..c.n).map(|q| if row >> q & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn random_bits(n: usize, rng: &mut impl Rng) -> String {
    (0..n).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect()
}
