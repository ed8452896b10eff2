//! Leg pairings and divergent-subgraph tagging.

use super::diagram::{Diagram, RenormSymbol};
use crate::rational::{factorial, Rat};
use crate::scaling::{ambiguity_dimension, Codim, Mode};
use crate::term::Term;
use itertools::Itertools;
use num::bigint::BigInt;
use num::One;
use std::collections::BTreeMap;

/// Graph form of a term: `Integ` opens a vertex under a `P`-edge, products
/// share the vertex, `Φ` adds a leg and smooth labels decorate the vertex.
pub fn base_diagram(t: &Term) -> Diagram {
    fn walk(t: &Term, v: usize, d: &mut Diagram) {
        match t {
            Term::Phi => {
                d.add_legs(v, 1);
            }
            Term::One => {}
            Term::Smooth { label } => {
                d.add_label(v, label);
            }
            Term::Prod { children } => {
                for c in children {
                    walk(c, v, d);
                }
            }
            Term::Integ { child } => {
                let w = d.add_vertex();
                d.add_p(v, w);
                walk(child, w, d);
            }
        }
    }
    let mut d = Diagram::unit();
    walk(t, 0, &mut d);
    d
}

/// All ways of contracting disjoint pairs of legs along the allowed vertex
/// pairs. Each result carries the number of leg matchings it represents.
pub fn pairings(
    base: &Diagram,
    allowed: &dyn Fn(usize, usize) -> bool,
    complete_only: bool,
) -> Vec<(Diagram, BigInt)> {
    let n = base.n();
    let legs: Vec<u32> = base.vertices.iter().map(|v| v.legs).collect();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u..n {
            let ok = if u == v { legs[u] >= 2 } else { legs[u] > 0 && legs[v] > 0 };
            if ok && allowed(u, v) {
                pairs.push((u, v));
            }
        }
    }
    if complete_only {
        let total: u32 = legs.iter().sum();
        if total % 2 == 1 {
            return Vec::new();
        }
    }
    // Index of the last pair touching each vertex, for pruning complete matchings.
    let mut last = vec![None; n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        last[u] = Some(i);
        last[v] = Some(i);
    }
    let mut out = Vec::new();
    let mut rem = legs.clone();
    let mut mult = vec![0u32; pairs.len()];
    let ctx = Enum { base, pairs: &pairs, last: &last, legs: &legs, complete_only };
    ctx.rec(0, &mut rem, &mut mult, &mut out);
    out
}

struct Enum<'a> {
    base: &'a Diagram,
    pairs: &'a [(usize, usize)],
    last: &'a [Option<usize>],
    legs: &'a [u32],
    complete_only: bool,
}

impl Enum<'_> {
    fn rec(&self, i: usize, rem: &mut Vec<u32>, mult: &mut Vec<u32>, out: &mut Vec<(Diagram, BigInt)>) {
        if i == self.pairs.len() {
            if self.complete_only && rem.iter().any(|&r| r > 0) {
                return;
            }
            out.push(self.emit(rem, mult));
            return;
        }
        let (u, v) = self.pairs[i];
        let max = if u == v { rem[u] / 2 } else { rem[u].min(rem[v]) };
        for q in 0..=max {
            if u == v {
                rem[u] -= 2 * q;
            } else {
                rem[u] -= q;
                rem[v] -= q;
            }
            mult[i] = q;
            let dead = self.complete_only
                && [u, v].iter().any(|&w| self.last[w] == Some(i) && rem[w] > 0);
            if !dead {
                self.rec(i + 1, rem, mult, out);
            }
            if u == v {
                rem[u] += 2 * q;
            } else {
                rem[u] += q;
                rem[v] += q;
            }
        }
        mult[i] = 0;
    }

    fn emit(&self, rem: &[u32], mult: &[u32]) -> (Diagram, BigInt) {
        let mut d = self.base.clone();
        let mut num = BigInt::one();
        for (v, &r) in rem.iter().enumerate() {
            d.vertices[v].legs = r;
            num *= factorial(self.legs[v]) / factorial(r);
        }
        let mut den = BigInt::one();
        for (&(u, v), &q) in self.pairs.iter().zip(mult) {
            for _ in 0..q {
                d.add_q(u, v);
            }
            den *= factorial(q);
            if u == v {
                den *= BigInt::from(2u32).pow(q);
            }
        }
        (d, num / den)
    }
}

/// Degree of divergence of a vertex set with `p` induced `P`-edges and `q`
/// induced `Q`-edges, parabolic weights in spatial dimension `d`.
pub fn subset_rho(d: u32, size: usize, p: usize, q: usize) -> i64 {
    let d = d as i64;
    p as i64 * d + q as i64 * (d - 2) - (size as i64 - 1) * (d + 2)
}

fn subgraph_key(order: &[usize], p: &[(usize, usize)], q: &[(usize, usize)]) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let pos = |v: usize| order.iter().position(|&w| w == v).unwrap();
    let mut pe: Vec<_> = p.iter().map(|&(a, b)| (pos(a), pos(b))).collect();
    let mut qe: Vec<_> = q
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (pos(a), pos(b));
            (x.min(y), x.max(y))
        })
        .collect();
    pe.sort();
    qe.sort();
    (pe, qe)
}

fn key_string(k: &(Vec<(usize, usize)>, Vec<(usize, usize)>)) -> String {
    let mut parts: Vec<String> = k.0.iter().map(|(a, b)| format!("P{a}>{b}")).collect();
    parts.extend(k.1.iter().map(|(a, b)| format!("Q{a}-{b}")));
    parts.join(".")
}

/// Conventional name of a collapsed subgraph.
pub fn symbol_name(key: &str) -> String {
    match key {
        "Q0-0" => "C1".into(),
        "P0>1.Q0-1.Q0-1" => "C2".into(),
        "Q0-1.Q0-1" => "Q2hat".into(),
        k => format!("K[{k}]"),
    }
}

fn make_symbol(d: u32, set: &[usize], p: &[(usize, usize)], q: &[(usize, usize)], rho: i64) -> RenormSymbol {
    let mut best: Option<(Vec<usize>, (Vec<(usize, usize)>, Vec<(usize, usize)>))> = None;
    let mut all = Vec::new();
    for order in set.iter().copied().permutations(set.len()) {
        let k = subgraph_key(&order, p, q);
        all.push((order.clone(), k.clone()));
        if best.as_ref().is_none_or(|b| k < b.1) {
            best = Some((order, k));
        }
    }
    let (ord, k) = best.unwrap();
    let auts: Vec<Vec<usize>> = all
        .iter()
        .filter(|(_, kk)| *kk == k)
        .map(|(o, _)| o.iter().map(|v| ord.iter().position(|w| w == v).unwrap()).collect())
        .sorted()
        .collect();
    let key = key_string(&k);
    // Each Q hides one integrated midpoint.
    let n_eff = set.len() as u32 + q.len() as u32;
    let amb = ambiguity_dimension(rho, Codim::diagonal(n_eff, d), Mode::Parabolic).unwrap_or(0);
    RenormSymbol { name: symbol_name(&key), key, vertices: ord, ambiguity_dim: amb, auts }
}

fn connected(set: &[usize], p: &[(usize, usize)], q: &[(usize, usize)]) -> bool {
    let mut seen = vec![set[0]];
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in p.iter().chain(q) {
            let (ia, ib) = (seen.contains(&a), seen.contains(&b));
            if ia != ib {
                seen.push(if ia { b } else { a });
                changed = true;
            }
        }
    }
    seen.len() == set.len()
}

/// Replace divergent subgraphs by renormalization symbols.
///
/// `Q` self-loops become the local constant `C1`; then connected vertex sets
/// containing a `Q`-edge are scanned by increasing size and any set with
/// `ρ ≥ 0` has its induced edges collapsed into one symbol.
pub fn tag_divergences(dg: &Diagram, d: u32) -> Diagram {
    let mut dg = dg.clone();
    if d >= 2 {
        let loops: Vec<usize> = dg.q_edges.iter().filter(|e| e.0 == e.1).map(|e| e.0).collect();
        dg.q_edges.retain(|e| e.0 != e.1);
        for v in loops {
            let sym = make_symbol(d, &[v], &[], &[(v, v)], subset_rho(d, 1, 0, 1));
            dg.symbols.push(sym);
        }
    }
    'outer: loop {
        let mut qv: Vec<usize> = dg.q_edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        qv.sort();
        qv.dedup();
        if qv.len() < 2 {
            break;
        }
        for size in 2..=dg.n() {
            for set in (0..dg.n()).combinations(size) {
                let inside = |&&(a, b): &&(usize, usize)| set.contains(&a) && set.contains(&b);
                let q: Vec<_> = dg.q_edges.iter().filter(inside).copied().collect();
                if q.is_empty() {
                    continue;
                }
                let p: Vec<_> = dg.p_edges.iter().filter(inside).copied().collect();
                let rho = subset_rho(d, size, p.len(), q.len());
                if rho < 0 || !connected(&set, &p, &q) {
                    continue;
                }
                let sym = make_symbol(d, &set, &p, &q, rho);
                dg.p_edges.retain(|e| !(set.contains(&e.0) && set.contains(&e.1)));
                dg.q_edges.retain(|e| !(set.contains(&e.0) && set.contains(&e.1)));
                dg.symbols.push(sym);
                continue 'outer;
            }
        }
        break;
    }
    dg
}

/// Contract, tag and canonicalize, collecting coefficients.
pub fn contract_collect(
    base: &Diagram,
    allowed: &dyn Fn(usize, usize) -> bool,
    complete_only: bool,
    post: &dyn Fn(Diagram) -> Diagram,
    coeff: &Rat,
    d: u32,
    into: &mut BTreeMap<Diagram, Rat>,
) {
    for (dg, count) in pairings(base, allowed, complete_only) {
        let tagged = tag_divergences(&post(dg), d).canonical();
        *into.entry(tagged).or_insert_with(|| Rat::from_integer(BigInt::from(0))) +=
            coeff * Rat::from_integer(count);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::double_factorial_pairs;

    #[test]
    fn four_legs_coefficients() {
        let mut d = Diagram::unit();
        d.add_legs(0, 4);
        let res = pairings(&d, &|_, _| true, false);
        let mut by_q = BTreeMap::new();
        for (dg, c) in res {
            *by_q.entry(dg.q_edges.len()).or_insert(BigInt::from(0)) += c;
        }
        assert_eq!(by_q[&0], BigInt::from(1));
        assert_eq!(by_q[&1], BigInt::from(6));
        assert_eq!(by_q[&2], BigInt::from(3));
    }

    #[test]
    fn complete_matchings_spread_over_vertices() {
        // Legs split over three vertices still total (n-1)!! matchings.
        let mut d = Diagram::unit();
        let a = d.add_vertex();
        let b = d.add_vertex();
        d.add_p(0, a).add_p(a, b).add_legs(0, 3).add_legs(a, 2).add_legs(b, 3);
        let total: BigInt = pairings(&d, &|_, _| true, true).into_iter().map(|x| x.1).sum();
        assert_eq!(total, double_factorial_pairs(8));
    }

    #[test]
    fn rho_values() {
        assert_eq!(subset_rho(3, 1, 0, 1), 1);
        assert_eq!(subset_rho(3, 2, 1, 2), 0);
        assert_eq!(subset_rho(3, 2, 0, 2), -3);
        assert_eq!(subset_rho(3, 2, 1, 1), -1);
        assert_eq!(subset_rho(2, 1, 0, 1), 0);
    }

    #[test]
    fn sunset_gets_c2() {
        let mut d = Diagram::unit();
        let y = d.add_vertex();
        d.add_p(0, y).add_q(0, y).add_q(0, y);
        let t = tag_divergences(&d, 3);
        assert!(t.q_edges.is_empty() && t.p_edges.is_empty());
        assert_eq!(t.symbol_names(), vec!["C2"]);
        assert_eq!(t.symbols[0].vertices, vec![0, y]);
        assert_eq!(t.symbols[0].auts.len(), 1);
    }
}
