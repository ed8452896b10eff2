//! Admissible graphs.
//!
//! A tree of the cubic grammar has integration vertices joined by `P` edges,
//! every vertex holding at most three slots (the root has no parent, so at
//! most three edges; other vertices at most four). Collapsing two leaves
//! creates a fresh vertex joined to both leaf parents, and uncollapsed leaves
//! are cut. After cutting, every admissible graph therefore consists of
//!
//! * a simple tree `T` on `t` vertices with `deg_T(v) + a(v) ∈ [2, 4]`,
//! * `s` collapse vertices of valency two, attached to `T` through the
//!   `2s = Σ a(v)` leaf slots (both ends on one `T` vertex give a double edge),
//! * at least one `T` vertex of valency at most three, which serves as root.
//!
//! The enumerator walks exactly this description, so `L = t − 1 + 2s` and
//! `N = t + s` are known before any graph is built.

use super::record::{GraphRecord, Provenance};
use crate::error::{Error, Result};
use crate::contraction::{base_diagram, pairings as leg_pairings, Diagram};
use crate::term::Term;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Default bound on the number of candidate graphs built by one enumeration.
pub const DEFAULT_CAP: usize = 5_000_000;

/// Free trees with every degree at most 4, indexed by vertex count, each as an
/// edge list on `0..t`.
pub fn free_trees(t_max: usize) -> Vec<Vec<Vec<(usize, usize)>>> {
    let mut out: Vec<Vec<Vec<(usize, usize)>>> = vec![Vec::new(); t_max + 1];
    if t_max >= 1 {
        out[1].push(Vec::new());
    }
    for t in 2..=t_max {
        let mut seen = BTreeMap::new();
        for tree in &out[t - 1] {
            let mut deg = vec![0; t - 1];
            for &(a, b) in tree {
                deg[a] += 1;
                deg[b] += 1;
            }
            for (v, &dv) in deg.iter().enumerate() {
                if dv >= 4 {
                    continue;
                }
                let mut e = tree.clone();
                e.push((v, t - 1));
                let g = GraphRecord::new(t, &e);
                seen.entry(g.key()).or_insert(g.edges);
            }
        }
        out[t] = seen.into_values().collect();
    }
    out
}

/// All multisets of unordered pairs covering `ends` (a sorted list).
fn pairings(ends: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if ends.is_empty() {
        out.push(acc.clone());
        return;
    }
    let x = ends[0];
    let mut last = None;
    for j in 1..ends.len() {
        if last == Some(ends[j]) {
            continue;
        }
        last = Some(ends[j]);
        let rest: Vec<usize> = ends[1..].iter().enumerate().filter(|&(i, _)| i + 1 != j).map(|(_, &e)| e).collect();
        acc.push((x, ends[j]));
        pairings(&rest, acc, out);
        acc.pop();
    }
}

/// Attachment vectors `a` with `lo[v] ≤ a[v] ≤ hi[v]` and `Σ a = total`.
fn attachments(lo: &[usize], hi: &[usize], total: usize) -> Vec<Vec<usize>> {
    fn rec(v: usize, lo: &[usize], hi: &[usize], left: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if v == lo.len() {
            if left == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let room: usize = hi[v + 1..].iter().sum();
        let need: usize = lo[v + 1..].iter().sum();
        for a in lo[v]..=hi[v].min(left) {
            if left - a > room || left - a < need {
                continue;
            }
            acc.push(a);
            rec(v + 1, lo, hi, left - a, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, lo, hi, total, &mut Vec::new(), &mut out);
    out
}

/// The grammar term behind a tree with leaf slots: the root carries the
/// product of its slots, each other vertex the integral of its slots.
fn tree_term(tree: &[(usize, usize)], a: &[usize], root: usize) -> Term {
    let t = a.len();
    let mut adj = vec![Vec::new(); t];
    for &(u, v) in tree {
        adj[u].push(v);
        adj[v].push(u);
    }
    fn build(v: usize, parent: Option<usize>, adj: &[Vec<usize>], a: &[usize]) -> Term {
        let mut f = vec![Term::Phi; a[v]];
        for &w in &adj[v] {
            if Some(w) != parent {
                f.push(Term::integ(build(w, Some(v), adj, a)));
            }
        }
        Term::prod(f)
    }
    build(root, None, &adj, a)
}

/// Graphs with `t` tree vertices and `s` collapse vertices for every pair
/// accepted by `keep`, with `2 ≤ t + s ≤ n_max`. Deduplicated by canonical
/// key and returned in key order.
pub fn enumerate_filtered(
    n_max: usize,
    keep: impl Fn(usize, usize) -> bool + Sync,
    cap: usize,
) -> Result<Vec<GraphRecord>> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("N_max must be at least 2, got {n_max}")));
    }
    // Leaves of T need a collapse slot, so t ≤ N − 1 always.
    let t_top = (1..n_max).filter(|&t| (1..=n_max - t).any(|s| keep(t, s))).max().unwrap_or(0);
    let trees = free_trees(t_top);
    let mut jobs = Vec::new();
    for (t, ts) in trees.iter().enumerate().skip(1) {
        for s in 1..=n_max - t {
            if keep(t, s) {
                for tree in ts {
                    jobs.push((t, s, tree));
                }
            }
        }
    }
    let built = std::sync::atomic::AtomicUsize::new(0);
    let parts: Vec<Result<BTreeMap<String, GraphRecord>>> = jobs
        .par_iter()
        .map(|&(t, s, tree)| {
            let mut found = BTreeMap::new();
            let mut deg = vec![0usize; t];
            for &(u, v) in tree {
                deg[u] += 1;
                deg[v] += 1;
            }
            let lo: Vec<usize> = deg.iter().map(|&d| 2usize.saturating_sub(d)).collect();
            let hi: Vec<usize> = deg.iter().map(|&d| 4 - d).collect();
            for a in attachments(&lo, &hi, 2 * s) {
                let Some(root) = (0..t).find(|&v| deg[v] + a[v] <= 3) else { continue };
                let ends: Vec<usize> = a.iter().enumerate().flat_map(|(v, &k)| std::iter::repeat_n(v, k)).collect();
                let mut ms = Vec::new();
                pairings(&ends, &mut Vec::new(), &mut ms);
                let count = built.fetch_add(ms.len(), std::sync::atomic::Ordering::Relaxed) + ms.len();
                if count > cap {
                    return Err(Error::ResourceCap { cap, stage: "admissible graph enumeration".into() });
                }
                let term = tree_term(tree, &a, root);
                for m in ms {
                    let mut e = tree.clone();
                    for (i, &(u, v)) in m.iter().enumerate() {
                        e.push((u, t + i));
                        e.push((v, t + i));
                    }
                    let mut g = GraphRecord::new(t + s, &e).canonical();
                    g.provenance = Some(Provenance { tree: term.clone(), t, s });
                    found.entry(g.key()).or_insert(g);
                }
            }
            Ok(found)
        })
        .collect();
    let mut all = BTreeMap::new();
    for p in parts {
        for (k, g) in p? {
            all.entry(k).or_insert(g);
        }
    }
    Ok(all.into_values().collect())
}

pub fn enumerate_admissible(n_max: usize) -> Result<Vec<GraphRecord>> {
    enumerate_filtered(n_max, |_, _| true, DEFAULT_CAP)
}

pub fn enumerate_admissible_capped(n_max: usize, cap: usize) -> Result<Vec<GraphRecord>> {
    enumerate_filtered(n_max, |_, _| true, cap)
}

/// Decide admissibility directly: look for a set `S` of valency-2 vertices,
/// pairwise non-adjacent, such that `G − S` is a simple tree with every `S`
/// vertex attached to it, and some remaining vertex has valency ≤ 3.
pub fn is_admissible(g: &GraphRecord) -> bool {
    if g.n < 2 || g.has_self_loop() || !g.is_connected() {
        return false;
    }
    let deg = g.degrees();
    if deg.iter().any(|&d| !(2..=4).contains(&d)) {
        return false;
    }
    let adj = g.adjacency();
    let twos: Vec<usize> = (0..g.n).filter(|&v| deg[v] == 2).collect();
    if twos.len() > 24 {
        return false;
    }
    'subset: for mask in 1u32..(1 << twos.len()) {
        let in_s: Vec<bool> = {
            let mut b = vec![false; g.n];
            for (i, &v) in twos.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    b[v] = true;
                }
            }
            b
        };
        let t = g.n - mask.count_ones() as usize;
        if t == 0 {
            continue;
        }
        let mut tree_edges = 0;
        for &(u, v) in &g.edges {
            match (in_s[u], in_s[v]) {
                (true, true) => continue 'subset,
                (false, false) => {
                    if adj[u][v] > 1 {
                        continue 'subset;
                    }
                    tree_edges += 1;
                }
                _ => {}
            }
        }
        if tree_edges != t - 1 {
            continue;
        }
        // Connected with t − 1 edges means a tree.
        let start = (0..g.n).find(|&v| !in_s[v]).unwrap();
        let mut seen = vec![false; g.n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for w in 0..g.n {
                if adj[v][w] > 0 && !in_s[w] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        if reached == t && (0..g.n).any(|v| !in_s[v] && deg[v] <= 3) {
            return true;
        }
    }
    false
}

/// The graph of a contracted tree: `P` edges stay, each covariance becomes a
/// fresh vertex joined to both ends, uncontracted legs are dropped and
/// vertices of valency below two are cut repeatedly.
pub fn collapse_graph(d: &Diagram) -> GraphRecord {
    let mut n = d.n();
    let mut e: Vec<(usize, usize)> = d.p_edges.clone();
    for &(u, v) in &d.q_edges {
        e.push((u, n));
        e.push((v, n));
        n += 1;
    }
    let mut alive = vec![true; n];
    loop {
        let mut deg = vec![0; n];
        for &(a, b) in &e {
            deg[a] += 1;
            deg[b] += 1;
        }
        let cut: Vec<usize> = (0..n).filter(|&v| alive[v] && deg[v] < 2).collect();
        if cut.is_empty() {
            break;
        }
        for v in cut {
            alive[v] = false;
        }
        e.retain(|&(a, b)| alive[a] && alive[b]);
    }
    let mut idx = vec![usize::MAX; n];
    let mut m = 0;
    for v in 0..n {
        if alive[v] {
            idx[v] = m;
            m += 1;
        }
    }
    let e: Vec<_> = e.iter().map(|&(a, b)| (idx[a], idx[b])).collect();
    GraphRecord::new(m, &e)
}

/// Search the partial contractions of the provenance tree for one whose
/// collapse is isomorphic to `g`.
pub fn admissibility_witness(g: &GraphRecord) -> Option<Diagram> {
    let tree = &g.provenance.as_ref()?.tree;
    let key = g.key();
    leg_pairings(&base_diagram(tree), &|_, _| true, false)
        .into_iter()
        .map(|(d, _)| d)
        .find(|d| collapse_graph(d).key() == key)
}
