use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::Gate;
use crate::frame::PauliMask;

use super::SimError;

/// Largest register a caller may build with [`StateVector::init_state`].
pub const MAX_QUBITS: usize = 14;

/// Largest register the executor may form while merging factors.
pub const MAX_FACTOR_QUBITS: usize = 20;

const NORM_TOL: f64 = 1e-12;

pub type Matrix2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gate_matrix(kind: crate::circuit::GateKind) -> Matrix2 {
    use crate::circuit::GateKind as K;
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let h = c(FRAC_1_SQRT_2, 0.0);
    match kind {
        K::H => [[h, h], [h, -h]],
        K::P => [[l, o], [o, c(0.0, 1.0)]],
        K::Pdg => [[l, o], [o, c(0.0, -1.0)]],
        K::X | K::Cnot => [[o, l], [l, o]],
        K::Z => [[l, o], [o, -l]],
        K::T => [[l, o], [o, c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)]],
    }
}

/// Dense amplitudes; qubit `q` is bit `q` of the basis index.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Two-bit Bell outcome: the receiving half holds `X^x Z^z ψ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BellOutcome {
    pub x: bool,
    pub z: bool,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome { x: false, z: false },
        BellOutcome { x: true, z: false },
        BellOutcome { x: false, z: true },
        BellOutcome { x: true, z: true },
    ];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasRecord {
    pub var_x: String,
    pub var_z: String,
    pub x: bool,
    pub z: bool,
    pub measured: (usize, usize),
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self, SimError> {
        check_size(n, MAX_QUBITS)?;
        let mut amps = vec![Complex64::default(); 1 << n];
        amps[0] = c(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Basis state from a bitstring whose character `i` is qubit `i`.
    pub fn from_bits(bits: &str) -> Result<Self, SimError> {
        let n = bits.len();
        check_size(n, MAX_QUBITS)?;
        let mut index = 0usize;
        for (i, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << i,
                _ => return Err(SimError::BadBitstring(bits.to_string())),
            }
        }
        let mut amps = vec![Complex64::default(); 1 << n];
        amps[index] = c(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.is_empty() || amps.len() != 1 << n {
            return Err(SimError::BadLength(amps.len()));
        }
        check_size(n, MAX_QUBITS)?;
        let s = StateVector { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Haar-ish random state: normalized complex Gaussian amplitudes.
    pub fn random(n: usize, rng: &mut impl Rng) -> Result<Self, SimError> {
        check_size(n, MAX_QUBITS)?;
        let mut amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| {
                let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
                let r = (-2.0 * u1.ln()).sqrt();
                let th = std::f64::consts::TAU * u2;
                c(r * th.cos(), r * th.sin())
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q < self.n {
            Ok(())
        } else {
            Err(SimError::QubitOutOfRange { qubit: q, n: self.n })
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<(), SimError> {
        let qs = g.qubits();
        for &q in &qs {
            self.check_qubit(q)?;
        }
        match *g {
            Gate::Cnot(ctl, t) => {
                if ctl == t {
                    return Err(SimError::QubitCollision(ctl));
                }
                self.apply_controlled(&gate_matrix(g.kind()), &[ctl], t)
            }
            _ => self.apply_controlled(&gate_matrix(g.kind()), &[], qs[0]),
        }
    }

    /// Applies `m` to `target` on the subspace where every control is 1.
    pub fn apply_controlled(
        &mut self,
        m: &Matrix2,
        controls: &[usize],
        target: usize,
    ) -> Result<(), SimError> {
        self.check_qubit(target)?;
        let mut cmask = 0usize;
        for &q in controls {
            self.check_qubit(q)?;
            if q == target {
                return Err(SimError::QubitCollision(q));
            }
            cmask |= 1 << q;
        }
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & tbit != 0 || i & cmask != cmask {
                continue;
            }
            let j = i | tbit;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects qubit `q` onto `|bit⟩` and renormalizes. Returns the
    /// probability of that outcome; a zero-probability projection leaves the
    /// zero vector.
    pub fn project(&mut self, q: usize, bit: bool) -> Result<f64, SimError> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) == bit {
                p += a.norm_sqr();
            } else {
                *a = Complex64::default();
            }
        }
        if p > 0.0 {
            let s = p.sqrt();
            self.amps.iter_mut().for_each(|a| *a /= s);
        }
        Ok(p)
    }

    /// Drops qubit `q`, which must already be collapsed to `|bit⟩`.
    /// Higher qubits shift down by one.
    pub fn remove_qubit(&mut self, q: usize, bit: bool) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let low = (1usize << q) - 1;
        let keep = usize::from(bit) << q;
        let amps = (0..1usize << (self.n - 1))
            .map(|k| {
                let i = (k & low) | ((k & !low) << 1) | keep;
                self.amps[i]
            })
            .collect();
        self.amps = amps;
        self.n -= 1;
        Ok(())
    }

    /// `self ⊗ other` with `self` on the low qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, SimError> {
        let n = self.n + other.n;
        check_size(n, MAX_FACTOR_QUBITS)?;
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { n, amps })
    }

    /// Reorders qubits so that new qubit `i` is old qubit `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<StateVector, SimError> {
        if order.len() != self.n {
            return Err(SimError::DimensionMismatch { left: order.len(), right: self.n });
        }
        let mut amps = vec![Complex64::default(); self.amps.len()];
        for (new_i, slot) in amps.iter_mut().enumerate() {
            let mut old_i = 0usize;
            for (k, &o) in order.iter().enumerate() {
                if new_i >> k & 1 == 1 {
                    old_i |= 1 << o;
                }
            }
            *slot = self.amps[old_i];
        }
        Ok(StateVector { n: self.n, amps })
    }

    /// Puts fresh qubits `q1, q2` into `(|00⟩+|11⟩)/√2`.
    pub fn prepare_epr(&mut self, q1: usize, q2: usize) -> Result<(), SimError> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(SimError::QubitCollision(q1));
        }
        for q in [q1, q2] {
            if self.prob_one(q) > NORM_TOL {
                return Err(SimError::NotFresh(q));
            }
        }
        self.apply_gate(&Gate::H(q1))?;
        self.apply_gate(&Gate::Cnot(q1, q2))
    }

    /// Outcome probabilities of a Bell measurement on `(r, s)`, in
    /// [`BellOutcome::ALL`] order.
    pub fn bell_probabilities(&self, r: usize, s: usize) -> Result<[f64; 4], SimError> {
        let mut rotated = self.clone();
        rotated.rotate_bell(r, s)?;
        let (rb, sb) = (1usize << r, 1usize << s);
        let mut p = [0.0; 4];
        for (i, a) in rotated.amps.iter().enumerate() {
            let o = BellOutcome { x: i & sb != 0, z: i & rb != 0 };
            p[bell_index(o)] += a.norm_sqr();
        }
        Ok(p)
    }

    /// CNOT(r→s) then H(r): the Bell basis becomes the computational basis,
    /// with `r` carrying the Z bit and `s` the X bit.
    pub(crate) fn rotate_bell(&mut self, r: usize, s: usize) -> Result<(), SimError> {
        if r == s {
            return Err(SimError::QubitCollision(r));
        }
        self.apply_gate(&Gate::Cnot(r, s))?;
        self.apply_gate(&Gate::H(r))
    }

    /// Projects `(r, s)` onto the Bell state of `outcome`, leaving them in
    /// that Bell state. Returns the outcome probability.
    pub fn bell_project(&mut self, r: usize, s: usize, outcome: BellOutcome) -> Result<f64, SimError> {
        self.rotate_bell(r, s)?;
        let pz = self.project(r, outcome.z)?;
        let px = self.project(s, outcome.x)?;
        self.apply_gate(&Gate::H(r))?;
        self.apply_gate(&Gate::Cnot(r, s))?;
        Ok(pz * px)
    }

    /// Bell measurement with one uniform draw from `rng`.
    pub fn bell_measure(
        &mut self,
        r: usize,
        s: usize,
        rng: &mut impl Rng,
    ) -> Result<BellOutcome, SimError> {
        let probs = self.bell_probabilities(r, s)?;
        let outcome = BellOutcome::ALL[sample_index(&probs, rng.gen::<f64>())];
        self.bell_project(r, s, outcome)?;
        Ok(outcome)
    }

    /// Projects `(r, s)` onto the Bell outcome `o` and removes both qubits.
    /// Returns the outcome probability; indices above `r` and `s` shift down.
    pub(crate) fn bell_project_remove(
        &mut self,
        r: usize,
        s: usize,
        o: BellOutcome,
    ) -> Result<f64, SimError> {
        self.rotate_bell(r, s)?;
        let p = self.project(r, o.z)? * self.project(s, o.x)?;
        let (hi, hb, lo, lb) = if r > s { (r, o.z, s, o.x) } else { (s, o.x, r, o.z) };
        self.remove_qubit(hi, hb)?;
        self.remove_qubit(lo, lb)?;
        Ok(p)
    }

    /// Applies a gate list in order.
    pub fn apply_gates<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<(), SimError> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Applies `Z^b X^a` on every qubit, undoing a recorded `X^a Z^b` up to
    /// phase.
    pub fn apply_mask(&mut self, m: &PauliMask) -> Result<(), SimError> {
        if m.len() != self.n {
            return Err(SimError::DimensionMismatch { left: m.len(), right: self.n });
        }
        for q in 0..self.n {
            if m.a[q] {
                self.apply_gate(&Gate::X(q))?;
            }
            if m.b[q] {
                self.apply_gate(&Gate::Z(q))?;
            }
        }
        Ok(())
    }

    /// The basis index holding essentially all probability, if any.
    pub fn basis_index(&self, tol: f64) -> Option<usize> {
        self.amps.iter().position(|a| a.norm_sqr() >= 1.0 - tol)
    }
}

pub(crate) fn bell_index(o: BellOutcome) -> usize {
    usize::from(o.x) | usize::from(o.z) << 1
}

/// Index `i` with cumulative probability crossing `u`; falls back to the last
/// nonzero entry against rounding.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p / total;
        if u < acc && *p > 0.0 {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn check_size(n: usize, cap: usize) -> Result<(), SimError> {
    if n > cap {
        Err(SimError::TooManyQubits { n, max: cap })
    } else {
        Ok(())
    }
}

/// `|⟨u|v⟩|²`.
pub fn fidelity_up_to_phase(u: &StateVector, v: &StateVector) -> Result<f64, SimError> {
    if u.n != v.n {
        return Err(SimError::DimensionMismatch { left: u.n, right: v.n });
    }
    let inner: Complex64 = u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum();
    Ok(inner.norm_sqr().min(1.0))
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector[{}]", self.n)?;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 1e-24 {
                write!(f, " {i}:{:.6}{:+.6}i", a.re, a.im)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn initial_states() {
        let s = StateVector::from_bits("0").unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = StateVector::from_bits("11").unwrap();
        assert_eq!(s.basis_index(1e-12), Some(3));
        let s = StateVector::from_bits("01").unwrap();
        assert_eq!(s.basis_index(1e-12), Some(2));
        let amps = vec![c(0.6, 0.0), c(0.0, 0.8)];
        assert_eq!(StateVector::from_amplitudes(amps.clone()).unwrap().amplitudes(), &amps[..]);
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(SimError::NotNormalized(_))
        ));
        assert!(matches!(StateVector::zero(15), Err(SimError::TooManyQubits { .. })));
        assert!(StateVector::from_bits("012").is_err());
    }

    #[test]
    fn gate_actions() {
        let mut s = StateVector::from_bits("0").unwrap();
        s.apply_gate(&Gate::H(0)).unwrap();
        assert!(close(s.amps[0], c(FRAC_1_SQRT_2, 0.0)) && close(s.amps[1], c(FRAC_1_SQRT_2, 0.0)));
        let mut s = StateVector::from_bits("1").unwrap();
        s.apply_gate(&Gate::T(0)).unwrap();
        assert!(close(s.amps[1], Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)));
        let mut s = StateVector::from_bits("0").unwrap();
        s.apply_gate(&Gate::X(0)).unwrap();
        assert_eq!(s.basis_index(1e-12), Some(1));
        assert!(s.apply_gate(&Gate::X(1)).is_err());
    }

    #[test]
    fn epr_preparation() {
        let mut s = StateVector::zero(2).unwrap();
        s.prepare_epr(0, 1).unwrap();
        let h = c(FRAC_1_SQRT_2, 0.0);
        let expect = [h, c(0.0, 0.0), c(0.0, 0.0), h];
        assert!(s.amps.iter().zip(expect).all(|(a, b)| close(*a, b)));
        assert!(matches!(s.prepare_epr(0, 1), Err(SimError::NotFresh(_))));

        // two disjoint pairs, spectator untouched
        let mut s = StateVector::from_bits("00001").unwrap();
        s.prepare_epr(0, 1).unwrap();
        s.prepare_epr(2, 3).unwrap();
        assert!((s.prob_one(4) - 1.0).abs() < 1e-12);
        for i in [0b10000, 0b10011, 0b11100, 0b11111] {
            assert!((s.amps[i].norm_sqr() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn teleportation_lands_x_then_z_on_partner() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = StateVector::random(1, &mut rng).unwrap();
        for o in BellOutcome::ALL {
            let mut s = psi.tensor(&StateVector::zero(2).unwrap()).unwrap();
            s.prepare_epr(1, 2).unwrap();
            let p = s.bell_project(0, 1, o).unwrap();
            assert!((p - 0.25).abs() < 1e-12);
            // reduce to qubit 2 by undoing the Bell rotation on (0,1)
            s.rotate_bell(0, 1).unwrap();
            s.remove_qubit(1, o.x).unwrap();
            s.remove_qubit(0, o.z).unwrap();
            let mut expect = psi.clone();
            if o.z {
                expect.apply_gate(&Gate::Z(0)).unwrap();
            }
            if o.x {
                expect.apply_gate(&Gate::X(0)).unwrap();
            }
            assert!(fidelity_up_to_phase(&s, &expect).unwrap() > 1.0 - 1e-12);
            let mask = PauliMask { a: vec![o.x], b: vec![o.z] };
            s.apply_mask(&mask).unwrap();
            assert!(fidelity_up_to_phase(&s, &psi).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn bell_state_input_is_deterministic() {
        let mut s = StateVector::zero(2).unwrap();
        s.prepare_epr(0, 1).unwrap();
        let p = s.bell_probabilities(0, 1).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(s.bell_measure(0, 1, &mut rng).unwrap(), BellOutcome { x: false, z: false });
    }

    #[test]
    fn halves_of_independent_pairs_give_uniform_outcomes() {
        let mut s = StateVector::zero(4).unwrap();
        s.prepare_epr(0, 1).unwrap();
        s.prepare_epr(2, 3).unwrap();
        for p in s.bell_probabilities(1, 2).unwrap() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = StateVector::random(2, &mut rng).unwrap();
        assert!((fidelity_up_to_phase(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let phase = Complex64::from_polar(1.0, 0.7);
        let v = StateVector { n: 2, amps: u.amps.iter().map(|a| a * phase).collect() };
        assert!((fidelity_up_to_phase(&u, &v).unwrap() - 1.0).abs() < 1e-12);
        let zero = StateVector::from_bits("0").unwrap();
        let one = StateVector::from_bits("1").unwrap();
        assert!(fidelity_up_to_phase(&zero, &one).unwrap() < 1e-15);
        assert!(fidelity_up_to_phase(&zero, &u).is_err());
    }

    #[test]
    fn mask_is_an_involution_up_to_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = StateVector::random(2, &mut rng).unwrap();
        let m = PauliMask { a: vec![true, false], b: vec![true, true] };
        let mut v = u.clone();
        v.apply_mask(&m).unwrap();
        v.apply_mask(&m).unwrap();
        assert!((fidelity_up_to_phase(&u, &v).unwrap() - 1.0).abs() < 1e-12);
        let mut w = u.clone();
        w.apply_mask(&PauliMask::zeros(2)).unwrap();
        assert_eq!(w, u);
    }

    #[test]
    fn permutation_and_removal() {
        let s = StateVector::from_bits("100").unwrap();
        let p = s.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.basis_index(1e-12), Some(0b010));
        let mut r = StateVector::from_bits("101").unwrap();
        r.remove_qubit(1, false).unwrap();
        assert_eq!(r.basis_index(1e-12), Some(0b11));
    }

    #[test]
    fn gates_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = StateVector::random(3, &mut rng).unwrap();
        for g in [Gate::H(0), Gate::T(1), Gate::Cnot(2, 0), Gate::P(2), Gate::Pdg(1)] {
            s.apply_gate(&g).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
