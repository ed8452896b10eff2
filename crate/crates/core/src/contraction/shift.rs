//! Renormalization shifts: replacing a symbol by itself plus smooth labels.

use super::diagram::{Diagram, DiagramSum};
use super::gamma::Contractor;
use super::wick::tag_divergences;
use crate::error::{Error, Result};
use crate::linear::LinComb;
use crate::rational::{binomial, Rat};
use crate::term::FormalSeries;
use std::collections::{BTreeMap, BTreeSet};

/// A polynomial in smooth labels: monomials are sorted label lists.
pub type LabelPoly = LinComb<Vec<String>>;

/// Shift table: each symbol name maps to the polynomial added to it.
pub type Shifts = BTreeMap<String, LabelPoly>;

pub fn label_poly(monomials: &[(Rat, &[&str])]) -> LabelPoly {
    monomials
        .iter()
        .map(|(c, ls)| {
            let mut v: Vec<String> = ls.iter().map(|s| s.to_string()).collect();
            v.sort();
            (v, c.clone())
        })
        .collect()
}

/// Symbols that may be shifted even when absent from the input.
pub const KNOWN_SYMBOLS: [&str; 3] = ["C1", "C2", "Q2hat"];

impl Contractor {
    /// Substitute `S ↦ S + Σ c_m · m` for every shifted symbol `S` and re-collect.
    /// The labels of a monomial sit where the symbol sat; a symbol spread over
    /// several vertices collapses them to a single point.
    pub fn apply_renorm_shift(&self, s: &DiagramSum, shifts: &Shifts) -> Result<DiagramSum> {
        let present: BTreeSet<&str> = s.keys().flat_map(|d| d.symbol_names()).collect();
        for name in shifts.keys() {
            if !KNOWN_SYMBOLS.contains(&name.as_str()) && !present.contains(name.as_str()) {
                return Err(Error::UnknownSymbol(name.clone()));
            }
        }
        let mut out = LinComb::new();
        for (d, c) in s.iter() {
            for (e, ce) in self.shift_diagram(d, shifts)? {
                out.add(e, c * ce);
            }
        }
        Ok(out)
    }

    pub fn apply_renorm_shift_series(
        &self,
        s: &FormalSeries<Diagram>,
        shifts: &Shifts,
    ) -> Result<FormalSeries<Diagram>> {
        let mut out = FormalSeries::new(s.truncation);
        for (&j, l) in &s.orders {
            out.set(j, self.apply_renorm_shift(l, shifts)?);
        }
        Ok(out)
    }

    fn shift_diagram(&self, d: &Diagram, shifts: &Shifts) -> Result<Vec<(Diagram, Rat)>> {
        let hits: Vec<usize> = (0..d.symbols.len()).filter(|&i| shifts.contains_key(&d.symbols[i].name)).collect();
        let mut results = vec![(Vec::<Option<(Vec<String>, Rat)>>::new(), Rat::from_integer(1.into()))];
        for &i in &hits {
            let poly = &shifts[&d.symbols[i].name];
            let mut next = Vec::new();
            for (choice, c) in &results {
                let mut keep = choice.clone();
                keep.push(None);
                next.push((keep, c.clone()));
                for (mono, cm) in poly.iter() {
                    let mut ch = choice.clone();
                    ch.push(Some((mono.clone(), cm.clone())));
                    next.push((ch, c * cm));
                }
            }
            results = next;
        }
        let mut out = Vec::new();
        for (choice, c) in results {
            let mut e = d.clone();
            let mut merge_sets: Vec<Vec<usize>> = Vec::new();
            let mut drop = BTreeSet::new();
            for (&i, ch) in hits.iter().zip(&choice) {
                if let Some((mono, _)) = ch {
                    let sym = &d.symbols[i];
                    for l in mono {
                        e.add_label(sym.vertices[0], l);
                    }
                    merge_sets.push(sym.vertices.clone());
                    drop.insert(i);
                }
            }
            e.symbols = e
                .symbols
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, s)| s)
                .collect();
            let e = collapse(&e, &merge_sets)?;
            out.push((tag_divergences(&e, self.d).canonical(), c));
        }
        Ok(out)
    }
}

/// Identify each group of vertices to a point, keeping roots in front.
fn collapse(d: &Diagram, groups: &[Vec<usize>]) -> Result<Diagram> {
    let n = d.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for g in groups {
        for w in g.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a == b {
                continue;
            }
            if a < d.roots && b < d.roots {
                return Err(Error::InvalidArgument(
                    "a shift cannot collapse two external roots onto each other".into(),
                ));
            }
            let (lo, hi) = (a.min(b), a.max(b));
            parent[hi] = lo;
        }
    }
    let reps: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    let mut distinct: Vec<usize> = reps.clone();
    distinct.sort();
    distinct.dedup();
    let map: Vec<usize> = reps.iter().map(|r| distinct.binary_search(r).unwrap()).collect();
    Ok(d.merge_vertices(&map, distinct.len()))
}

/// Write `Γ̃(Φ^k) − Γ(Φ^k)` as `Γ(Σ_{ℓ ≤ k−2} binom(k, ℓ) c_{k−ℓ} Φ^ℓ)` by peeling
/// off the highest Φ-power first. Returns `c_j` for `j = 2..=k`, or `None` if
/// the difference is not of that form.
pub fn decompose_power_shift(c: &Contractor, diff: &DiagramSum, k: u32) -> Option<BTreeMap<u32, LabelPoly>> {
    let mut rest = diff.clone();
    let mut coeffs = BTreeMap::new();
    for l in (0..=k).rev() {
        let mut poly = LabelPoly::new();
        for (d, cf) in rest.iter() {
            let bare = d.n() == 1 && d.q_edges.is_empty() && d.symbols.is_empty() && d.p_edges.is_empty();
            if d.total_legs() == l && !bare {
                return None;
            }
            if bare && d.vertices[0].legs == l {
                poly.add(d.vertices[0].labels.clone(), cf.clone());
            }
        }
        if poly.is_empty() {
            continue;
        }
        if l + 2 > k {
            return None;
        }
        let b = Rat::from_integer(binomial(k, l));
        let g = c.gamma_cdot_q(&crate::term::Term::phi_pow(l as usize));
        for (mono, cm) in poly.iter() {
            for (gd, gc) in g.iter() {
                let mut e = gd.clone();
                for lab in mono {
                    e.add_label(0, lab);
                }
                rest.add(e.canonical(), -(cm * gc));
            }
        }
        coeffs.insert(k - l, poly.scaled(&(Rat::from_integer(1.into()) / b)));
    }
    if rest.is_empty() {
        Some(coeffs)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::gamma::TensorWord;
    use crate::rational::int;
    use crate::term::Term;

    fn c0_shift() -> Shifts {
        let mut s = Shifts::new();
        s.insert("C1".into(), label_poly(&[(int(1), &["c0"])]));
        s
    }

    fn difference(k: usize) -> DiagramSum {
        let c = Contractor::default();
        let g = c.gamma_cdot_q(&Term::phi_pow(k));
        let mut diff = c.apply_renorm_shift(&g, &c0_shift()).unwrap();
        diff.sub_all(&g);
        diff
    }

    #[test]
    fn phi2_shift_is_constant() {
        let diff = difference(2);
        let mut one = Diagram::unit();
        one.add_label(0, "c0");
        assert_eq!(diff, LinComb::single(one, int(1)));
    }

    #[test]
    fn powers_follow_gaussian_moments() {
        let c = Contractor::default();
        let c2 = label_poly(&[(int(1), &["c0"])]);
        let c4 = label_poly(&[(int(3), &["c0", "c0"])]);
        for k in 2..=6u32 {
            let coeffs = decompose_power_shift(&c, &difference(k as usize), k).expect("pattern");
            assert_eq!(coeffs.get(&2), Some(&c2));
            assert!(coeffs.get(&3).is_none());
            if k >= 4 {
                assert_eq!(coeffs.get(&4), Some(&c4));
            }
        }
    }

    #[test]
    fn empty_and_unknown() {
        let c = Contractor::default();
        let g = c.gamma_cdot_q(&Term::phi_pow(4));
        assert_eq!(c.apply_renorm_shift(&g, &Shifts::new()).unwrap(), g);
        let mut bad = Shifts::new();
        bad.insert("Zeta".into(), label_poly(&[(int(1), &["z"])]));
        assert_eq!(c.apply_renorm_shift(&g, &bad), Err(Error::UnknownSymbol("Zeta".into())));
    }

    #[test]
    fn tensor_shift_of_phi2_pair() {
        // Γ̃_•Q(Φ²⊗Φ²) − Γ_•Q(Φ²⊗Φ²) = 2 Γ(Φ²) c0 + c0 c0, spread over the two roots.
        let c = Contractor::default();
        let g2 = c.gamma_cdot_q(&Term::phi_pow(2));
        let w = c.gamma_bullet_q(&TensorWord::new(vec![g2.clone(), g2.clone()]));
        let mut diff = c.apply_renorm_shift(&w, &c0_shift()).unwrap();
        diff.sub_all(&w);
        let c0 = {
            let mut d = Diagram::unit();
            d.add_label(0, "c0");
            LinComb::single(d, int(1))
        };
        let mut expected = c.gamma_bullet_q(&TensorWord::new(vec![g2.clone(), c0.clone()]));
        expected.add_all(&c.gamma_bullet_q(&TensorWord::new(vec![c0.clone(), g2])));
        expected.add_all(&c.gamma_bullet_q(&TensorWord::new(vec![c0.clone(), c0])));
        assert_eq!(diff, expected);
    }
}
