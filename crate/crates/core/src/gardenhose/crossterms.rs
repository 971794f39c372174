use std::collections::BTreeSet;

use crate::circuit::LayeredCircuit;
use crate::frame::{cross_terms, tableau_from_stage, Gf2, KeyPoly, Mask, Monomial, Owner, Var};

use super::gadget::{gadget_frame, GadgetVars};
use super::GardenError;

/// Product terms in the frame that reaches the second T layer.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossTermReport {
    pub second_layer: bool,
    pub gadgets: usize,
    /// Frame exponents on every wire as the second T layer is reached.
    pub keys_a: Vec<KeyPoly>,
    pub keys_b: Vec<KeyPoly>,
    /// Pending `P` keys the second T layer would need removed.
    pub t_keys: Vec<(usize, KeyPoly)>,
    /// Cross-owner monomials of `keys_a[j]` and `keys_b[j]`, per wire.
    pub cross: Vec<(usize, Vec<Monomial>)>,
    pub absorbable: bool,
}

impl CrossTermReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("second_layer={}", self.second_layer), format!("gadgets={}", self.gadgets)];
        for (j, (a, b)) in self.keys_a.iter().zip(&self.keys_b).enumerate() {
            out.push(format!("key_a{j}={a}"));
            out.push(format!("key_b{j}={b}"));
        }
        for (q, k) in &self.t_keys {
            out.push(format!("t_key{q}={k}"));
        }
        for (j, ms) in &self.cross {
            let text: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
            out.push(format!("cross{j}={}", text.join(" ^ ")));
        }
        out.push(format!("cross_count={}", self.cross.iter().map(|(_, m)| m.len()).sum::<usize>()));
        out.push(format!("absorbable={}", self.absorbable));
        out
    }
}

/// Variables of the analysis: Alice's input teleport outcomes and, for each
/// first-layer gadget, Bob's routing bit, Alice's `P†` bit and the six
/// measurement outcomes.
pub fn first_layer_vars(c: &LayeredCircuit, alice: &BTreeSet<usize>) -> Vec<Var> {
    let mut vars = Vec::new();
    for &j in alice {
        vars.push(Var::new(format!("a{j}x"), Owner::Alice));
        vars.push(Var::new(format!("a{j}z"), Owner::Alice));
    }
    if let Some(stage) = c.stages.first() {
        for k in 0..stage.t_layer.len() {
            vars.push(Var::new(format!("p{k}"), Owner::Bob));
            vars.push(Var::new(format!("q{k}"), Owner::Alice));
            vars.extend(GadgetVars::new(&format!("g{k}")).all().into_iter().cloned());
        }
    }
    vars
}

/// Frame entering the second stage's T layer, with every variable replaced
/// by `value(var)`. Over [`KeyPoly`] with `value = KeyPoly::var` this is the
/// symbolic frame; over `bool` it is a concrete run.
///
/// Alice's wires start masked by her teleport outcomes. Each first-layer T
/// gate is handled by a gadget whose routing bit `p` (Bob) and `P†` bit `q`
/// (Alice) are free variables: their sum is assumed to equal the pending
/// key, so the gadget cancels it and only its own frame is added.
pub fn propagate_first_layer<B: Gf2>(
    c: &LayeredCircuit,
    alice: &BTreeSet<usize>,
    value: impl Fn(&Var) -> B,
) -> Result<(Mask<B>, usize), GardenError> {
    let n = c.n;
    let mut mask: Mask<B> = Mask::zeros(n);
    for &j in alice {
        mask.a[j] = value(&Var::new(format!("a{j}x"), Owner::Alice));
        mask.b[j] = value(&Var::new(format!("a{j}z"), Owner::Alice));
    }
    let first = &c.stages[0];
    let (m, pending) = mask.apply_tableau(&tableau_from_stage(&first.clifford, n)?)?.through_t_layer(first.t_layer.iter().copied());
    mask = m;
    for (k, (j, _)) in pending.iter().enumerate() {
        let p = value(&Var::new(format!("p{k}"), Owner::Bob));
        let q = value(&Var::new(format!("q{k}"), Owner::Alice));
        let o = GadgetVars::new(&format!("g{k}")).values(&value);
        let (da, db) = gadget_frame((&B::zero(), &B::zero()), &p, &q, &o);
        mask.a[*j].add_assign(&da);
        mask.b[*j].add_assign(&db);
    }
    if let Some(second) = c.stages.get(1) {
        mask = mask.apply_tableau(&tableau_from_stage(&second.clifford, n)?)?;
    }
    Ok((mask, pending.len()))
}

/// Runs the symbolic frame through the first T layer's gadgets and the next
/// Clifford stage, and reports the products of Alice's and Bob's outcomes
/// that the second T layer would have to undo.
pub fn analyze_cross_terms(c: &LayeredCircuit, alice: &BTreeSet<usize>) -> Result<CrossTermReport, GardenError> {
    c.validate()?;
    if let Some(&j) = alice.iter().find(|&&j| j >= c.n) {
        return Err(GardenError::BadBipartition(format!("wire {j} out of range for {} wires", c.n)));
    }
    let second_layer = c.stages.get(1).is_some_and(|s| !s.t_layer.is_empty());
    let (mask, gadgets) = propagate_first_layer(c, alice, |v| KeyPoly::var(v.clone()))?;
    let mut cross = Vec::new();
    let mut t_keys = Vec::new();
    if second_layer {
        for j in 0..c.n {
            let mut ms = cross_terms(&mask.a[j]);
            ms.extend(cross_terms(&mask.b[j]));
            if !ms.is_empty() {
                cross.push((j, ms));
            }
        }
        t_keys = c.stages[1].t_layer.iter().map(|&q| (q, mask.a[q].clone())).collect();
    }
    Ok(CrossTermReport {
        second_layer,
        gadgets,
        absorbable: cross.is_empty(),
        keys_a: mask.a,
        keys_b: mask.b,
        t_keys,
        cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, Stage};
    use crate::frame::Assignment;

    fn tt() -> LayeredCircuit {
        LayeredCircuit::new(1, vec![Stage::new(vec![], [0]), Stage::new(vec![], [0])]).unwrap()
    }

    #[test]
    fn single_t_layer_is_absorbable() {
        let c = LayeredCircuit::new(2, vec![Stage::new(vec![Gate::Cnot(0, 1)], [0, 1])]).unwrap();
        let r = analyze_cross_terms(&c, &[0].into()).unwrap();
        assert!(r.absorbable);
        assert!(r.cross.is_empty());
    }

    #[test]
    fn two_t_layers_mix_owners() {
        let r = analyze_cross_terms(&tt(), &[0].into()).unwrap();
        assert!(!r.absorbable);
        let key = &r.t_keys[0].1;
        assert!(!cross_terms(key).is_empty(), "{key}");
        // the P† inside the gadget multiplies Alice's bit by Bob's X outcome
        assert!(r.keys_b[0].monomials().any(|m| m.to_string() == "g0bx*q0"), "{}", r.keys_b[0]);
    }

    #[test]
    fn symbolic_matches_concrete_on_all_assignments() {
        let c = LayeredCircuit::new(
            2,
            vec![Stage::new(vec![Gate::H(0), Gate::Cnot(0, 1)], [0]), Stage::new(vec![Gate::H(0), Gate::Cnot(1, 0)], [1])],
        )
        .unwrap();
        let alice: BTreeSet<usize> = [1].into();
        let (sym, _) = propagate_first_layer(&c, &alice, |v| KeyPoly::var(v.clone())).unwrap();
        let vars = first_layer_vars(&c, &alice);
        assert_eq!(vars.len(), 2 + 8);
        for bits in 0u32..(1 << vars.len()) {
            let assignment: Assignment =
                vars.iter().enumerate().map(|(i, v)| (v.name().to_string(), bits >> i & 1 == 1)).collect();
            let (concrete, _) = propagate_first_layer(&c, &alice, |v| assignment[v.name()]).unwrap();
            assert_eq!(sym.evaluate(&assignment).unwrap(), concrete);
        }
    }
}
