//! Loopless multigraphs with canonical labeling.

use crate::term::Term;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// How a graph arises from the interaction grammar: the tree term whose leaf
/// pairs are collapsed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tree: Term,
    /// Number of tree (integration) vertices and collapse vertices.
    pub t: usize,
    pub s: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    /// Edge multiset, each pair stored with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Profile {
    pub n: usize,
    pub l: usize,
    pub n2: usize,
    pub n3: usize,
    pub n4: usize,
}

impl GraphRecord {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut e: Vec<_> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        e.sort();
        GraphRecord { n, edges: e, provenance: None }
    }

    pub fn l(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Histogram of valencies, index = valency.
    pub fn valency_histogram(&self) -> Vec<usize> {
        let deg = self.degrees();
        let mut h = vec![0; deg.iter().copied().max().unwrap_or(0) + 1];
        for d in deg {
            h[d] += 1;
        }
        h
    }

    pub fn profile(&self) -> Profile {
        let deg = self.degrees();
        let count = |k| deg.iter().filter(|&&d| d == k).count();
        Profile { n: self.n, l: self.l(), n2: count(2), n3: count(3), n4: count(4) }
    }

    pub fn has_self_loop(&self) -> bool {
        self.edges.iter().any(|e| e.0 == e.1)
    }

    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        let mut adj = vec![vec![0u8; self.n]; self.n];
        for &(a, b) in &self.edges {
            adj[a][b] += 1;
            if a != b {
                adj[b][a] += 1;
            }
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..self.n {
                if adj[v][w] > 0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }

    pub fn relabeled(&self, perm: &[usize]) -> GraphRecord {
        let e: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        GraphRecord { provenance: self.provenance.clone(), ..GraphRecord::new(self.n, &e) }
    }

    /// Canonical relabeling and its adjacency code.
    pub fn canonical_form(&self) -> (Vec<usize>, Vec<u8>) {
        canonical_labeling(&self.adjacency())
    }

    pub fn canonical(&self) -> GraphRecord {
        let (order, _) = self.canonical_form();
        let mut perm = vec![0; self.n];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        self.relabeled(&perm)
    }

    /// Stable text key of the isomorphism class.
    pub fn key(&self) -> String {
        let c = self.canonical();
        let mut s = format!("N{}:", self.n);
        let parts: Vec<String> = c.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        s.push_str(&parts.join(","));
        s
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{name}\" {{\n");
        for v in 0..self.n {
            let _ = writeln!(s, "  v{v};");
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "  v{a} -- v{b};");
        }
        s.push_str("}\n");
        s
    }
}

type Partition = Vec<Vec<usize>>;

fn refine(adj: &[Vec<u8>], mut cells: Partition) -> Partition {
    let n = adj.len();
    loop {
        let mut cell_of = vec![0; n];
        for (i, c) in cells.iter().enumerate() {
            for &v in c {
                cell_of[v] = i;
            }
        }
        let mut next: Partition = Vec::with_capacity(cells.len());
        for c in &cells {
            if c.len() == 1 {
                next.push(c.clone());
                continue;
            }
            let mut sig: Vec<(Vec<(usize, u8)>, usize)> = c
                .iter()
                .map(|&v| {
                    let mut s: Vec<(usize, u8)> =
                        (0..n).filter(|&w| adj[v][w] > 0).map(|w| (cell_of[w], adj[v][w])).collect();
                    s.sort();
                    (s, v)
                })
                .collect();
            sig.sort();
            let mut start = 0;
            for i in 1..=sig.len() {
                if i == sig.len() || sig[i].0 != sig[start].0 {
                    next.push(sig[start..i].iter().map(|x| x.1).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            return next;
        }
        cells = next;
    }
}

fn code(adj: &[Vec<u8>], order: &[usize]) -> Vec<u8> {
    let n = order.len();
    let mut c = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            c.push(adj[order[i]][order[j]]);
        }
    }
    c
}

/// Individualize–refine search for the ordering with the lexicographically
/// largest adjacency code. Returns `order[new] = old`.
pub fn canonical_labeling(adj: &[Vec<u8>]) -> (Vec<usize>, Vec<u8>) {
    let n = adj.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let deg: Vec<usize> = (0..n).map(|v| adj[v].iter().map(|&m| m as usize).sum()).collect();
    let mut by_deg: Vec<usize> = (0..n).collect();
    by_deg.sort_by_key(|&v| (deg[v], v));
    let mut init: Partition = Vec::new();
    for &v in &by_deg {
        match init.last_mut() {
            Some(c) if deg[c[0]] == deg[v] => c.push(v),
            _ => init.push(vec![v]),
        }
    }
    let mut best: Option<(Vec<u8>, Vec<usize>)> = None;
    search(adj, refine(adj, init), &mut best);
    let (c, order) = best.unwrap();
    (order, c)
}

fn search(adj: &[Vec<u8>], cells: Partition, best: &mut Option<(Vec<u8>, Vec<usize>)>) {
    match cells.iter().position(|c| c.len() > 1) {
        None => {
            let order: Vec<usize> = cells.into_iter().map(|c| c[0]).collect();
            let c = code(adj, &order);
            if best.as_ref().is_none_or(|b| c > b.0) {
                *best = Some((c, order));
            }
        }
        Some(i) => {
            for &v in &cells[i] {
                let mut next = cells[..i].to_vec();
                next.push(vec![v]);
                next.push(cells[i].iter().copied().filter(|&w| w != v).collect());
                next.extend_from_slice(&cells[i + 1..]);
                search(adj, refine(adj, next), best);
            }
        }
    }
}
