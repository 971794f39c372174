//! Multilinear polynomials over GF(2) in owner-tagged outcome variables.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// The party that learns a variable's value first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Alice,
    Bob,
    Local,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Owner::Alice => "alice",
            Owner::Bob => "bob",
            Owner::Local => "local",
        })
    }
}

/// A named classical bit, usually a measurement outcome.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    name: Arc<str>,
    owner: Owner,
}

impl Var {
    pub fn new(name: impl AsRef<str>, owner: Owner) -> Self {
        Var { name: Arc::from(name.as_ref()), owner }
    }

    pub fn local(name: impl AsRef<str>) -> Self {
        Var::new(name, Owner::Local)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Values of outcome variables, keyed by name.
pub type Assignment = BTreeMap<String, bool>;

/// A product of distinct variables. The empty product is the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<Var>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(vars: impl IntoIterator<Item = Var>) -> Self {
        let mut v: Vec<Var> = vars.into_iter().collect();
        v.sort();
        v.dedup();
        Monomial(v)
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct owners among the variables.
    pub fn owners(&self) -> BTreeSet<Owner> {
        self.0.iter().map(|v| v.owner).collect()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    fn eval(&self, assignment: &Assignment) -> Result<bool, PolyError> {
        let mut acc = true;
        for v in &self.0 {
            let bit = assignment
                .get(v.name())
                .ok_or_else(|| PolyError::Unbound(v.name().to_string()))?;
            acc &= *bit;
        }
        Ok(acc)
    }
}

// Higher degree first, then lexicographic by variable names; the constant
// sorts last.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| {
            let a = self.0.iter().map(|v| (v.name(), v.owner));
            let b = other.0.iter().map(|v| (v.name(), v.owner));
            a.cmp(b)
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable `{0}` has no value in the assignment")]
    Unbound(String),
    #[error("cannot parse polynomial `{0}`")]
    Parse(String),
}

/// A multilinear GF(2) polynomial kept in canonical sorted form, so
/// structural equality is polynomial equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct KeyPoly {
    monomials: BTreeSet<Monomial>,
}

impl KeyPoly {
    pub fn zero() -> Self {
        KeyPoly::default()
    }

    pub fn one() -> Self {
        KeyPoly::constant(true)
    }

    pub fn constant(bit: bool) -> Self {
        let mut p = KeyPoly::zero();
        if bit {
            p.monomials.insert(Monomial::one());
        }
        p
    }

    pub fn var(v: Var) -> Self {
        KeyPoly::from_monomial(Monomial::new([v]))
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut p = KeyPoly::zero();
        p.monomials.insert(m);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// The constant term.
    pub fn constant_term(&self) -> bool {
        self.monomials.contains(&Monomial::one())
    }

    /// Returns the constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<bool> {
        match self.monomials.len() {
            0 => Some(false),
            1 if self.constant_term() => Some(true),
            _ => None,
        }
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.monomials.iter()
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.monomials.iter().flat_map(|m| m.0.iter().cloned()).collect()
    }

    pub fn add_monomial(&mut self, m: Monomial) {
        if !self.monomials.remove(&m) {
            self.monomials.insert(m);
        }
    }

    pub fn add_assign(&mut self, other: &KeyPoly) {
        for m in &other.monomials {
            self.add_monomial(m.clone());
        }
    }

    pub fn plus(&self, other: &KeyPoly) -> KeyPoly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn times(&self, other: &KeyPoly) -> KeyPoly {
        let mut out = KeyPoly::zero();
        for a in &self.monomials {
            for b in &other.monomials {
                out.add_monomial(a.times(b));
            }
        }
        out
    }

    /// `1 + self`.
    pub fn negated(&self) -> KeyPoly {
        self.plus(&KeyPoly::one())
    }

    pub fn eval(&self, assignment: &Assignment) -> Result<bool, PolyError> {
        let mut acc = false;
        for m in &self.monomials {
            acc ^= m.eval(assignment)?;
        }
        Ok(acc)
    }

    /// Sum of the monomials whose every variable belongs to `owner`, plus the
    /// constant if `keep_constant`.
    pub fn part_owned_by(&self, owner: Owner, keep_constant: bool) -> KeyPoly {
        let monomials = self
            .monomials
            .iter()
            .filter(|m| {
                if m.is_one() {
                    keep_constant
                } else {
                    m.0.iter().all(|v| v.owner == owner)
                }
            })
            .cloned()
            .collect();
        KeyPoly { monomials }
    }

    /// Reads the display format back. Variables get [`Owner::Local`] unless
    /// `owner_of` says otherwise.
    pub fn parse_with(text: &str, owner_of: impl Fn(&str) -> Owner) -> Result<KeyPoly, PolyError> {
        let err = || PolyError::Parse(text.to_string());
        let mut p = KeyPoly::zero();
        let t = text.trim();
        if t == "0" {
            return Ok(p);
        }
        for term in t.split('^') {
            let term = term.trim();
            if term.is_empty() {
                return Err(err());
            }
            if term == "1" {
                p.add_monomial(Monomial::one());
                continue;
            }
            let mut vars = Vec::new();
            for name in term.split('*') {
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(err());
                }
                if name.chars().next().unwrap().is_ascii_digit() {
                    return Err(err());
                }
                vars.push(Var::new(name, owner_of(name)));
            }
            p.add_monomial(Monomial::new(vars));
        }
        Ok(p)
    }

    pub fn parse(text: &str) -> Result<KeyPoly, PolyError> {
        KeyPoly::parse_with(text, |_| Owner::Local)
    }
}

impl From<bool> for KeyPoly {
    fn from(b: bool) -> Self {
        KeyPoly::constant(b)
    }
}

impl From<Var> for KeyPoly {
    fn from(v: Var) -> Self {
        KeyPoly::var(v)
    }
}

impl fmt::Display for KeyPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            if i > 0 {
                f.write_str(" ^ ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// GF(2) evaluation of `p` under `assignment`.
pub fn poly_eval(p: &KeyPoly, assignment: &Assignment) -> Result<bool, PolyError> {
    p.eval(assignment)
}

/// Monomials of degree at least two whose variables have more than one owner.
pub fn cross_terms(p: &KeyPoly) -> Vec<Monomial> {
    p.monomials().filter(|m| m.degree() >= 2 && m.owners().len() > 1).cloned().collect()
}
