//! Decorated rooted trees over `Φ`, `𝟏`, smooth labels, pointwise products and
//! `P_χ⊛` integration nodes, plus the perturbative solution recursion.

use crate::error::{Error, Result};
use crate::linear::LinComb;
use crate::rational::{int, Rat, RatSer};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    Phi,
    One,
    Smooth { label: String },
    Prod { children: Vec<Term> },
    Integ { child: Box<Term> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
    Mixed,
}

impl Term {
    pub fn phi() -> Term {
        Term::Phi
    }

    pub fn one() -> Term {
        Term::One
    }

    pub fn smooth(label: &str) -> Term {
        Term::Smooth { label: label.to_string() }
    }

    /// Canonical pointwise product of the given factors.
    pub fn prod(children: Vec<Term>) -> Term {
        canonicalize(&Term::Prod { children })
    }

    pub fn integ(child: Term) -> Term {
        Term::Integ { child: Box::new(canonicalize(&child)) }
    }

    /// `t^k` as a canonical product; `t^0 = 𝟏`.
    pub fn pow(t: &Term, k: usize) -> Term {
        Term::prod(vec![t.clone(); k])
    }

    pub fn phi_pow(k: usize) -> Term {
        Term::pow(&Term::Phi, k)
    }

    fn rank(&self) -> u8 {
        match self {
            Term::One => 0,
            Term::Phi => 1,
            Term::Smooth { .. } => 2,
            Term::Integ { .. } => 3,
            Term::Prod { .. } => 4,
        }
    }

    /// Bigrade `(l, k)`: `l` counts `P_χ⊛` applications, `k` is the Φ-degree.
    pub fn grading(&self) -> (u32, u32) {
        match self {
            Term::Phi => (0, 1),
            Term::One | Term::Smooth { .. } => (0, 0),
            Term::Prod { children } => children.iter().fold((0, 0), |(l, k), c| {
                let (cl, ck) = c.grading();
                (l + cl, k + ck)
            }),
            Term::Integ { child } => {
                let (l, k) = child.grading();
                (l + 1, k)
            }
        }
    }

    pub fn phi_degree(&self) -> u32 {
        self.grading().1
    }

    pub fn phi_parity(&self) -> Parity {
        if self.phi_degree() % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Number of nested `P_χ⊛` nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> u32 {
        match self {
            Term::Phi | Term::One | Term::Smooth { .. } => 0,
            Term::Prod { children } => children.iter().map(Term::depth).max().unwrap_or(0),
            Term::Integ { child } => 1 + child.depth(),
        }
    }

    /// The factors of a product, or the term itself.
    pub fn factors(&self) -> Vec<&Term> {
        match self {
            Term::Prod { children } => children.iter().collect(),
            Term::One => Vec::new(),
            t => vec![t],
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.grading().cmp(&other.grading()))
            .then_with(|| match (self, other) {
                (Term::Smooth { label: a }, Term::Smooth { label: b }) => a.cmp(b),
                (Term::Integ { child: a }, Term::Integ { child: b }) => a.cmp(b),
                (Term::Prod { children: a }, Term::Prod { children: b }) => a.cmp(b),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Flatten nested products, absorb units, sort factors and collapse trivial products.
pub fn canonicalize(t: &Term) -> Term {
    match t {
        Term::Phi | Term::One | Term::Smooth { .. } => t.clone(),
        Term::Integ { child } => Term::Integ { child: Box::new(canonicalize(child)) },
        Term::Prod { children } => {
            let mut flat = Vec::new();
            for c in children {
                match canonicalize(c) {
                    Term::Prod { children: inner } => flat.extend(inner),
                    Term::One => {}
                    other => flat.push(other),
                }
            }
            flat.sort();
            match flat.len() {
                0 => Term::One,
                1 => flat.pop().unwrap(),
                _ => Term::Prod { children: flat },
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Phi => write!(f, "Φ"),
            Term::One => write!(f, "1"),
            Term::Smooth { label } => write!(f, "{label}"),
            Term::Integ { child } => write!(f, "P⊛({child})"),
            Term::Prod { children } => {
                let mut i = 0;
                while i < children.len() {
                    let mut j = i;
                    while j < children.len() && children[j] == children[i] {
                        j += 1;
                    }
                    write!(f, "{}", children[i])?;
                    if j - i > 1 {
                        write!(f, "^{}", j - i)?;
                    }
                    i = j;
                }
                Ok(())
            }
        }
    }
}

pub fn parity_of(l: &LinComb<Term>) -> Parity {
    let mut odd = false;
    let mut even = false;
    for t in l.keys() {
        match t.phi_parity() {
            Parity::Odd => odd = true,
            _ => even = true,
        }
    }
    match (odd, even) {
        (true, true) => Parity::Mixed,
        (true, false) => Parity::Odd,
        _ => Parity::Even,
    }
}

/// Formal power series in λ with coefficients in the linear span of terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries<K: Ord = Term> {
    pub truncation: usize,
    pub orders: BTreeMap<usize, LinComb<K>>,
}

impl<K: Ord + Clone> FormalSeries<K> {
    pub fn new(truncation: usize) -> Self {
        FormalSeries { truncation, orders: BTreeMap::new() }
    }

    pub fn order(&self, j: usize) -> LinComb<K> {
        self.orders.get(&j).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, j: usize, l: LinComb<K>) {
        self.orders.insert(j, l);
    }

    /// Drop orders above `j`.
    pub fn truncated(&self, j: usize) -> Self {
        FormalSeries {
            truncation: j,
            orders: self.orders.range(..=j).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesEntry<K> {
    coeff: RatSer,
    term: K,
}

#[derive(Serialize, Deserialize)]
struct SeriesOrder<K> {
    order: usize,
    terms: Vec<SeriesEntry<K>>,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson<K> {
    truncation: usize,
    orders: Vec<SeriesOrder<K>>,
}

impl<K: Ord + Clone + Serialize> Serialize for FormalSeries<K> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let orders = (0..=self.truncation)
            .map(|j| SeriesOrder {
                order: j,
                terms: self
                    .order(j)
                    .iter()
                    .map(|(t, c)| SeriesEntry { coeff: RatSer(c.clone()), term: t.clone() })
                    .collect(),
            })
            .collect();
        SeriesJson { truncation: self.truncation, orders }.serialize(s)
    }
}

impl<'de, K: Ord + Clone + Deserialize<'de>> Deserialize<'de> for FormalSeries<K> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SeriesJson::<K>::deserialize(d)?;
        let mut out = FormalSeries::new(j.truncation);
        for o in j.orders {
            let l: LinComb<K> = o.terms.into_iter().map(|e| (e.term, e.coeff.0)).collect();
            out.set(o.order, l);
        }
        Ok(out)
    }
}

/// Multiply three linear combinations into `Integ(Prod{a, b, c})` by multilinearity.
fn integ_cube(a: &LinComb<Term>, b: &LinComb<Term>, c: &LinComb<Term>, scale: &Rat) -> LinComb<Term> {
    let mut out = LinComb::new();
    for (ta, ca) in a.iter() {
        for (tb, cb) in b.iter() {
            for (tc, cc) in c.iter() {
                let t = Term::integ(Term::prod(vec![ta.clone(), tb.clone(), tc.clone()]));
                out.add(t, scale * ca * cb * cc);
            }
        }
    }
    out
}

/// Perturbative solution `Ψ = Σ_j λ^j F_j` with `F_0 = Φ` and
/// `F_j = −Σ_{j1+j2+j3=j−1} P_χ⊛(F_{j1} F_{j2} F_{j3})`, truncated at order `J`.
pub fn expand_solution(order: i64) -> Result<FormalSeries> {
    if order < 0 {
        return Err(Error::InvalidArgument(format!("order must be non-negative, got {order}")));
    }
    let order = order as usize;
    let mut f: Vec<LinComb<Term>> = vec![LinComb::single(Term::Phi, int(1))];
    let minus_one = int(-1);
    for j in 1..=order {
        let mut fj = LinComb::new();
        for j1 in 0..j {
            for j2 in 0..j - j1 {
                let j3 = j - 1 - j1 - j2;
                fj.add_all(&integ_cube(&f[j1], &f[j2], &f[j3], &minus_one));
            }
        }
        f.push(fj);
    }
    let mut series = FormalSeries::new(order);
    for (j, fj) in f.into_iter().enumerate() {
        series.set(j, fj);
    }
    Ok(series)
}
