use crate::circuit::Gate;

use super::mask::PauliMask;
use super::FrameError;

/// Conjugation images of every `X_j` and `Z_j` under a Clifford circuit,
/// phases dropped. Column `j` of the induced GF(2) map on `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTableau {
    x_images: Vec<PauliMask>,
    z_images: Vec<PauliMask>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let unit = |j: usize, on_a: bool| {
            let mut m = PauliMask::zeros(n);
            if on_a {
                m.a[j] = true;
            } else {
                m.b[j] = true;
            }
            m
        };
        CliffordTableau {
            x_images: (0..n).map(|j| unit(j, true)).collect(),
            z_images: (0..n).map(|j| unit(j, false)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.x_images.len()
    }

    pub fn image_x(&self, j: usize) -> &PauliMask {
        &self.x_images[j]
    }

    pub fn image_z(&self, j: usize) -> &PauliMask {
        &self.z_images[j]
    }

    /// Composes the per-gate rules in gate order.
    pub fn from_gates(gates: &[Gate], n: usize) -> Result<Self, FrameError> {
        let mut t = CliffordTableau::identity(n);
        for g in gates {
            if !g.is_clifford() {
                return Err(FrameError::NonClifford(*g));
            }
            g.validate(n).map_err(|_| FrameError::NonClifford(*g))?;
            for img in t.x_images.iter_mut().chain(t.z_images.iter_mut()) {
                img.through_gate(g);
            }
        }
        Ok(t)
    }

    /// `other ∘ self`: first this circuit, then `other`.
    pub fn then(&self, other: &CliffordTableau) -> Result<Self, FrameError> {
        let push = |m: &PauliMask| m.apply_tableau(other);
        Ok(CliffordTableau {
            x_images: self.x_images.iter().map(push).collect::<Result<_, _>>()?,
            z_images: self.z_images.iter().map(push).collect::<Result<_, _>>()?,
        })
    }

    /// Rank of the 2n×2n GF(2) matrix.
    pub fn rank(&self) -> usize {
        let n = self.n();
        let mut rows: Vec<Vec<bool>> = self
            .x_images
            .iter()
            .chain(&self.z_images)
            .map(|m| m.a.iter().chain(&m.b).copied().collect())
            .collect();
        let mut rank = 0;
        for col in 0..2 * n {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
                continue;
            };
            rows.swap(rank, pivot);
            for r in 0..rows.len() {
                if r != rank && rows[r][col] {
                    let src = rows[rank].clone();
                    for (x, y) in rows[r].iter_mut().zip(src) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Tableau of a Clifford gate list on `n` qubits.
pub fn tableau_from_stage(gates: &[Gate], n: usize) -> Result<CliffordTableau, FrameError> {
    CliffordTableau::from_gates(gates, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::mask::Mask;

    #[test]
    fn hadamard_swaps_x_and_z() {
        let t = tableau_from_stage(&[Gate::H(0)], 1).unwrap();
        let m = Mask { a: vec![true], b: vec![false] };
        assert_eq!(m.apply_tableau(&t).unwrap(), Mask { a: vec![false], b: vec![true] });
    }

    #[test]
    fn cnot_copies_x_forward() {
        let t = tableau_from_stage(&[Gate::Cnot(0, 1)], 2).unwrap();
        let m = Mask { a: vec![true, false], b: vec![false, false] };
        assert_eq!(m.apply_tableau(&t).unwrap(), Mask { a: vec![true, true], b: vec![false, false] });
    }

    #[test]
    fn phase_gate_adds_z() {
        let t = tableau_from_stage(&[Gate::P(0)], 1).unwrap();
        let m = Mask { a: vec![true], b: vec![false] };
        assert_eq!(m.apply_tableau(&t).unwrap(), Mask { a: vec![true], b: vec![true] });
    }

    #[test]
    fn empty_stage_is_identity() {
        assert_eq!(tableau_from_stage(&[], 3).unwrap(), CliffordTableau::identity(3));
        let m = Mask { a: vec![true, false, true], b: vec![false, true, true] };
        assert_eq!(m.apply_tableau(&CliffordTableau::identity(3)).unwrap(), m);
    }

    #[test]
    fn rejects_t_and_dimension_mismatch() {
        assert_eq!(tableau_from_stage(&[Gate::T(0)], 1), Err(FrameError::NonClifford(Gate::T(0))));
        let t = CliffordTableau::identity(2);
        assert!(PauliMask::zeros(3).apply_tableau(&t).is_err());
    }

    #[test]
    fn inverse_circuit_inverts() {
        let gates = [Gate::H(0), Gate::Cnot(0, 1), Gate::P(1), Gate::Cnot(1, 2), Gate::H(2)];
        let inverse: Vec<Gate> = gates
            .iter()
            .rev()
            .map(|g| match *g {
                Gate::P(q) => Gate::Pdg(q),
                Gate::Pdg(q) => Gate::P(q),
                g => g,
            })
            .collect();
        let t = tableau_from_stage(&gates, 3).unwrap();
        let ti = tableau_from_stage(&inverse, 3).unwrap();
        assert_eq!(t.then(&ti).unwrap(), CliffordTableau::identity(3));
        assert_eq!(t.rank(), 6);
    }
}
