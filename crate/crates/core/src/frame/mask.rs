//! Pauli masks `X^a Z^b` over concrete bits or symbolic keys.

use std::fmt;

use super::keypoly::{Assignment, KeyPoly, PolyError};
use super::tableau::CliffordTableau;
use super::FrameError;

/// Coefficient ring for mask exponents: plain bits or GF(2) polynomials.
pub trait Gf2: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
}

impl Gf2 for bool {
    fn zero() -> Self {
        false
    }
    fn one() -> Self {
        true
    }
    fn is_zero(&self) -> bool {
        !*self
    }
    fn add_assign(&mut self, other: &Self) {
        *self ^= *other;
    }
    fn mul(&self, other: &Self) -> Self {
        *self & *other
    }
}

impl Gf2 for KeyPoly {
    fn zero() -> Self {
        KeyPoly::zero()
    }
    fn one() -> Self {
        KeyPoly::one()
    }
    fn is_zero(&self) -> bool {
        KeyPoly::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        KeyPoly::add_assign(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.times(other)
    }
}

/// Per-qubit exponents of `⊗_j X^{a_j} Z^{b_j}`, phases dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask<B> {
    pub a: Vec<B>,
    pub b: Vec<B>,
}

pub type PauliMask = Mask<bool>;
pub type SymbolicMask = Mask<KeyPoly>;

impl<B: Gf2> Mask<B> {
    pub fn zeros(n: usize) -> Self {
        Mask { a: vec![B::zero(); n], b: vec![B::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.a.iter().chain(&self.b).all(Gf2::is_zero)
    }

    pub fn xor_assign(&mut self, other: &Mask<B>) -> Result<(), FrameError> {
        self.check_len(other.len())?;
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            x.add_assign(y);
        }
        for (x, y) in self.b.iter_mut().zip(&other.b) {
            x.add_assign(y);
        }
        Ok(())
    }

    fn check_len(&self, n: usize) -> Result<(), FrameError> {
        if self.len() == n {
            Ok(())
        } else {
            Err(FrameError::DimensionMismatch { expected: n, found: self.len() })
        }
    }

    /// Pushes the mask through a Clifford stage: returns `m'` with
    /// `C σ(m) = σ(m') C` up to phase.
    pub fn apply_tableau(&self, t: &CliffordTableau) -> Result<Self, FrameError> {
        self.check_len(t.n())?;
        let n = t.n();
        let mut out: Mask<B> = Mask::zeros(n);
        for j in 0..n {
            let (img_x, img_z) = (t.image_x(j), t.image_z(j));
            for (coef, img) in [(&self.a[j], img_x), (&self.b[j], img_z)] {
                if coef.is_zero() {
                    continue;
                }
                for k in 0..n {
                    if img.a[k] {
                        out.a[k].add_assign(coef);
                    }
                    if img.b[k] {
                        out.b[k].add_assign(coef);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pushes the mask through a layer of T gates. Exponents are unchanged;
    /// each T qubit gets a pending `P^{g}` with `g = a`.
    pub fn through_t_layer(
        &self,
        t_layer: impl IntoIterator<Item = usize>,
    ) -> (Self, Vec<(usize, B)>) {
        let pending = t_layer.into_iter().map(|q| (q, self.a[q].clone())).collect();
        (self.clone(), pending)
    }

    /// `P† X^a Z^b = X^a Z^{a⊕b} P†` up to phase.
    pub fn through_pdag(&self, q: usize) -> Self {
        let mut out = self.clone();
        let a = out.a[q].clone();
        out.b[q].add_assign(&a);
        out
    }

    /// Pushes through `(P†)^c`: `b += a·c`.
    pub fn through_pdag_if(&self, q: usize, cond: &B) -> Self {
        let mut out = self.clone();
        let term = out.a[q].mul(cond);
        out.b[q].add_assign(&term);
        out
    }

    /// Pushes through a single Clifford gate (phase dropped).
    pub fn through_gate(&mut self, g: &crate::circuit::Gate) {
        use crate::circuit::Gate;
        match *g {
            Gate::H(q) => std::mem::swap(&mut self.a[q], &mut self.b[q]),
            Gate::P(q) | Gate::Pdg(q) => {
                let a = self.a[q].clone();
                self.b[q].add_assign(&a);
            }
            Gate::X(_) | Gate::Z(_) | Gate::T(_) => {}
            Gate::Cnot(c, t) => {
                let ac = self.a[c].clone();
                self.a[t].add_assign(&ac);
                let bt = self.b[t].clone();
                self.b[c].add_assign(&bt);
            }
        }
    }
}

/// Pushes a mask through a Clifford tableau.
pub fn apply_tableau<B: Gf2>(t: &CliffordTableau, m: &Mask<B>) -> Result<Mask<B>, FrameError> {
    m.apply_tableau(t)
}

/// See [`Mask::through_t_layer`].
pub fn commute_through_t_layer<B: Gf2>(
    m: &Mask<B>,
    t_layer: impl IntoIterator<Item = usize>,
) -> (Mask<B>, Vec<(usize, B)>) {
    m.through_t_layer(t_layer)
}

/// See [`Mask::through_pdag`].
pub fn commute_through_pdag<B: Gf2>(m: &Mask<B>, q: usize) -> Mask<B> {
    m.through_pdag(q)
}

impl SymbolicMask {
    pub fn evaluate(&self, assignment: &Assignment) -> Result<PauliMask, PolyError> {
        let ev = |v: &[KeyPoly]| v.iter().map(|p| p.eval(assignment)).collect::<Result<Vec<_>, _>>();
        Ok(Mask { a: ev(&self.a)?, b: ev(&self.b)? })
    }
}

impl From<&PauliMask> for SymbolicMask {
    fn from(m: &PauliMask) -> Self {
        Mask {
            a: m.a.iter().map(|&x| KeyPoly::constant(x)).collect(),
            b: m.b.iter().map(|&x| KeyPoly::constant(x)).collect(),
        }
    }
}

impl fmt::Display for PauliMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        write!(f, "a={} b={}", bits(&self.a), bits(&self.b))
    }
}
