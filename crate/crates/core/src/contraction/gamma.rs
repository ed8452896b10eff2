//! `Γ_·Q`, the products `·_Q` and `•_Q`, and evaluation at `φ = 0`.

use super::diagram::{merge_roots, Diagram, DiagramSum};
use super::wick::{base_diagram, contract_collect, tag_divergences};
use crate::linear::LinComb;
use crate::rational::Rat;
use crate::term::Term;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Contraction engine for a fixed spatial dimension (divergences are detected
/// with parabolic weights in that dimension).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contractor {
    pub d: u32,
}

impl Default for Contractor {
    fn default() -> Self {
        Contractor { d: 3 }
    }
}

/// Ordered list of single-root factors for the multi-local product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorWord {
    pub factors: Vec<DiagramSum>,
}

impl TensorWord {
    pub fn new(factors: Vec<DiagramSum>) -> Self {
        TensorWord { factors }
    }
}

fn collect(parts: Vec<BTreeMap<Diagram, Rat>>) -> DiagramSum {
    let mut out = LinComb::new();
    for m in parts {
        for (d, c) in m {
            out.add(d, c);
        }
    }
    out
}

impl Contractor {
    pub fn new(d: u32) -> Self {
        Contractor { d }
    }

    /// `Γ_·Q` of a single term: every partial pairing of its `Φ`-legs.
    pub fn gamma_cdot_q(&self, t: &Term) -> DiagramSum {
        self.gamma_term(t, false)
    }

    fn gamma_term(&self, t: &Term, complete_only: bool) -> DiagramSum {
        let base = base_diagram(t);
        let mut m = BTreeMap::new();
        contract_collect(&base, &|_, _| true, complete_only, &|d| d, &Rat::from_integer(1.into()), self.d, &mut m);
        collect(vec![m])
    }

    /// `Γ_·Q` extended linearly.
    pub fn gamma_cdot_q_sum(&self, l: &LinComb<Term>) -> DiagramSum {
        self.gamma_lin(l, false)
    }

    /// Only the fully contracted part of `Γ_·Q`, i.e. `evaluate_at_zero ∘ Γ_·Q`
    /// without materialising the partially contracted diagrams.
    pub fn gamma_cdot_q_vacuum(&self, l: &LinComb<Term>) -> DiagramSum {
        self.gamma_lin(l, true)
    }

    fn gamma_lin(&self, l: &LinComb<Term>, complete_only: bool) -> DiagramSum {
        let terms: Vec<(&Term, &Rat)> = l.iter().collect();
        let parts: Vec<BTreeMap<Diagram, Rat>> = terms
            .par_iter()
            .map(|(t, c)| {
                let base = base_diagram(t);
                let mut m = BTreeMap::new();
                contract_collect(&base, &|_, _| true, complete_only, &|d| d, c, self.d, &mut m);
                m
            })
            .collect();
        collect(parts)
    }

    /// The regularised local product: cross pairings between the two factors,
    /// after which the two roots are identified.
    pub fn cdot_q_product(&self, a: &DiagramSum, b: &DiagramSum) -> DiagramSum {
        let mut m = BTreeMap::new();
        for (da, ca) in a.iter() {
            for (db, cb) in b.iter() {
                let (u, map_a, _) = da.disjoint_union(db);
                let side_a: Vec<bool> = (0..u.n()).map(|v| map_a.contains(&v)).collect();
                let allowed = |x: usize, y: usize| side_a[x] != side_a[y];
                let post = |d: Diagram| merge_roots(&d, 0, 1);
                contract_collect(&u, &allowed, false, &post, &(ca * cb), self.d, &mut m);
            }
        }
        collect(vec![m])
    }

    /// `Γ_•Q` on a tensor word: roots stay distinct and only legs from different
    /// factors are paired; contractions within a factor are taken as given.
    pub fn gamma_bullet_q(&self, w: &TensorWord) -> DiagramSum {
        let mut acc = match w.factors.first() {
            Some(f) => f.clone(),
            None => return LinComb::single(Diagram::with_roots(0), Rat::from_integer(1.into())),
        };
        for f in &w.factors[1..] {
            let mut m = BTreeMap::new();
            for (da, ca) in acc.iter() {
                for (db, cb) in f.iter() {
                    let (u, _, map_b) = da.disjoint_union(db);
                    let side_b: Vec<bool> = (0..u.n()).map(|v| map_b.contains(&v)).collect();
                    let allowed = |x: usize, y: usize| side_b[x] != side_b[y];
                    contract_collect(&u, &allowed, false, &|d| d, &(ca * cb), self.d, &mut m);
                }
            }
            acc = collect(vec![m]);
        }
        acc
    }

    /// Re-run divergence tagging and canonicalization over a sum.
    pub fn retag(&self, s: &DiagramSum) -> DiagramSum {
        s.map_keys(|d| tag_divergences(d, self.d).canonical())
    }
}

/// Keep only the fully contracted diagrams (the configuration `φ = 0`).
pub fn evaluate_at_zero(s: &DiagramSum) -> DiagramSum {
    s.filter(|d| d.total_legs() == 0)
}

/// The single-root diagram `Φ^k` with no contractions.
pub fn phi_power_diagram(k: u32) -> Diagram {
    let mut d = Diagram::unit();
    d.add_legs(0, k);
    d
}
