//! Contracted diagrams: integration vertices, `P`-edges, `Q`-edges, uncontracted
//! legs and renormalization symbols, with a canonical form up to relabeling of
//! internal vertices.

use crate::error::{Error, Result};
use crate::linear::LinComb;
use crate::rational::{Rat, RatSer};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub legs: u32,
    /// Smooth-function labels multiplying the integrand at this point, sorted.
    pub labels: Vec<String>,
}

/// A collapsed divergent subgraph.
///
/// `vertices[i]` is the diagram vertex playing position `i` of the subgraph
/// encoded by `key`; `auts` lists the position permutations preserving `key`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RenormSymbol {
    pub name: String,
    pub key: String,
    pub vertices: Vec<usize>,
    pub ambiguity_dim: u64,
    pub auts: Vec<Vec<usize>>,
}

impl RenormSymbol {
    pub fn local(name: &str, key: &str, v: usize, ambiguity_dim: u64) -> Self {
        RenormSymbol {
            name: name.to_string(),
            key: key.to_string(),
            vertices: vec![v],
            ambiguity_dim,
            auts: vec![vec![0]],
        }
    }

    fn mapped(&self, perm: &[usize]) -> RenormSymbol {
        let img: Vec<usize> = self.vertices.iter().map(|&v| perm[v]).collect();
        let best = self
            .auts
            .iter()
            .map(|a| a.iter().map(|&i| img[i]).collect::<Vec<_>>())
            .min()
            .unwrap_or(img);
        RenormSymbol { vertices: best, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "DiagramRepr", try_from = "DiagramRepr")]
pub struct Diagram {
    /// Vertices `0..roots` are external roots, one per tensor factor.
    pub roots: usize,
    pub vertices: Vec<Vertex>,
    /// Directed `P_χ` kernels, parent → child.
    pub p_edges: Vec<(usize, usize)>,
    /// Undirected covariances, stored with `u <= v`.
    pub q_edges: Vec<(usize, usize)>,
    pub symbols: Vec<RenormSymbol>,
    /// Argument slot when the diagram represents an operator applied to `Φ`.
    pub input: Option<usize>,
}

pub type DiagramSum = LinComb<Diagram>;

#[derive(Serialize, Deserialize)]
struct VertexRepr {
    id: usize,
    root: bool,
    legs: u32,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    kind: String,
    u: usize,
    v: usize,
}

/// Wire format: one vertex list and one edge list with `"p"` / `"q"` kind tags.
#[derive(Serialize, Deserialize)]
struct DiagramRepr {
    vertices: Vec<VertexRepr>,
    edges: Vec<EdgeRepr>,
    symbols: Vec<RenormSymbol>,
    input: Option<usize>,
}

impl From<Diagram> for DiagramRepr {
    fn from(d: Diagram) -> Self {
        let vertices = d
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| VertexRepr { id, root: id < d.roots, legs: v.legs, labels: v.labels.clone() })
            .collect();
        let mut edges: Vec<EdgeRepr> =
            d.p_edges.iter().map(|&(u, v)| EdgeRepr { kind: "p".into(), u, v }).collect();
        edges.extend(d.q_edges.iter().map(|&(u, v)| EdgeRepr { kind: "q".into(), u, v }));
        DiagramRepr { vertices, edges, symbols: d.symbols, input: d.input }
    }
}

impl TryFrom<DiagramRepr> for Diagram {
    type Error = String;
    fn try_from(r: DiagramRepr) -> std::result::Result<Self, String> {
        let roots = r.vertices.iter().take_while(|v| v.root).count();
        if r.vertices.iter().skip(roots).any(|v| v.root) {
            return Err("roots must precede internal vertices".into());
        }
        let n = r.vertices.len();
        let mut d = Diagram::with_roots(roots);
        d.vertices = r.vertices.into_iter().map(|v| Vertex { legs: v.legs, labels: v.labels }).collect();
        for e in r.edges {
            if e.u >= n || e.v >= n {
                return Err(format!("edge ({}, {}) out of range", e.u, e.v));
            }
            match e.kind.as_str() {
                "p" => {
                    d.add_p(e.u, e.v);
                }
                "q" => {
                    d.add_q(e.u, e.v);
                }
                k => return Err(format!("unknown edge kind `{k}`")),
            }
        }
        d.symbols = r.symbols;
        d.input = r.input;
        Ok(d)
    }
}

/// A single diagram with its coefficient, the serialized unit of a [`DiagramSum`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractedTerm {
    pub coeff: RatSer,
    pub diagram: Diagram,
}

pub fn to_terms(s: &DiagramSum) -> Vec<ContractedTerm> {
    s.iter().map(|(d, c)| ContractedTerm { coeff: RatSer(c.clone()), diagram: d.clone() }).collect()
}

pub fn from_terms(terms: &[ContractedTerm]) -> DiagramSum {
    terms.iter().map(|t| (t.diagram.canonical(), t.coeff.0.clone())).collect()
}

const PERM_CAP: usize = 200_000;

impl Diagram {
    pub fn with_roots(roots: usize) -> Self {
        Diagram {
            roots,
            vertices: vec![Vertex::default(); roots],
            p_edges: Vec::new(),
            q_edges: Vec::new(),
            symbols: Vec::new(),
            input: None,
        }
    }

    /// The constant functional `𝟏` on one root.
    pub fn unit() -> Self {
        Diagram::with_roots(1)
    }

    pub fn add_vertex(&mut self) -> usize {
        self.vertices.push(Vertex::default());
        self.vertices.len() - 1
    }

    pub fn add_legs(&mut self, v: usize, n: u32) -> &mut Self {
        self.vertices[v].legs += n;
        self
    }

    pub fn add_label(&mut self, v: usize, label: &str) -> &mut Self {
        self.vertices[v].labels.push(label.to_string());
        self.vertices[v].labels.sort();
        self
    }

    pub fn add_p(&mut self, parent: usize, child: usize) -> &mut Self {
        self.p_edges.push((parent, child));
        self
    }

    pub fn add_q(&mut self, u: usize, v: usize) -> &mut Self {
        self.q_edges.push((u.min(v), u.max(v)));
        self
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn total_legs(&self) -> u32 {
        self.vertices.iter().map(|v| v.legs).sum()
    }

    pub fn symbol_names(&self) -> Vec<&str> {
        self.symbols.iter().map(|s| s.name.as_str()).collect()
    }

    fn relabel(&self, perm: &[usize]) -> Diagram {
        let mut vertices = vec![Vertex::default(); self.n()];
        for (old, v) in self.vertices.iter().enumerate() {
            vertices[perm[old]] = v.clone();
        }
        let mut p_edges: Vec<_> = self.p_edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        p_edges.sort();
        let mut q_edges: Vec<_> = self
            .q_edges
            .iter()
            .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
            .collect();
        q_edges.sort();
        let mut symbols: Vec<_> = self.symbols.iter().map(|s| s.mapped(perm)).collect();
        symbols.sort();
        Diagram {
            roots: self.roots,
            vertices,
            p_edges,
            q_edges,
            symbols,
            input: self.input.map(|i| perm[i]),
        }
    }

    /// Colour classes of internal vertices by iterated neighbourhood refinement.
    fn colours(&self) -> Vec<usize> {
        let n = self.n();
        let initial: Vec<_> = (0..n)
            .map(|v| {
                let mut syms: Vec<(&str, &str)> = self
                    .symbols
                    .iter()
                    .filter(|s| s.vertices.contains(&v))
                    .map(|s| (s.name.as_str(), s.key.as_str()))
                    .collect();
                syms.sort();
                let root = if v < self.roots { v } else { usize::MAX };
                (root, self.input == Some(v), &self.vertices[v], syms)
            })
            .collect();
        let mut colour = rank(&initial);
        loop {
            let sigs: Vec<_> = (0..n)
                .map(|v| {
                    let mut nb: Vec<(u8, usize)> = Vec::new();
                    for &(a, b) in &self.p_edges {
                        if a == v {
                            nb.push((0, colour[b]));
                        }
                        if b == v {
                            nb.push((1, colour[a]));
                        }
                    }
                    for &(a, b) in &self.q_edges {
                        if a == v {
                            nb.push((2, colour[b]));
                        }
                        if b == v && a != v {
                            nb.push((2, colour[a]));
                        }
                    }
                    nb.sort();
                    let mut syms: Vec<Vec<usize>> = self
                        .symbols
                        .iter()
                        .filter(|s| s.vertices.contains(&v))
                        .map(|s| {
                            let mut c: Vec<usize> = s.vertices.iter().map(|&w| colour[w]).collect();
                            c.sort();
                            c
                        })
                        .collect();
                    syms.sort();
                    (colour[v], nb, syms)
                })
                .collect();
            let next = rank(&sigs);
            let classes = |c: &[usize]| c.iter().collect::<std::collections::BTreeSet<_>>().len();
            if classes(&next) == classes(&colour) {
                return next;
            }
            colour = next;
        }
    }

    /// Canonical representative: roots keep their indices, internal vertices are
    /// relabeled to minimise the encoding among colour-respecting permutations.
    pub fn canonical(&self) -> Diagram {
        let n = self.n();
        if n <= self.roots + 1 {
            return self.relabel(&(0..n).collect::<Vec<_>>());
        }
        let colour = self.colours();
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in self.roots..n {
            classes.entry(colour[v]).or_default().push(v);
        }
        let classes: Vec<Vec<usize>> = classes.into_values().collect();
        let mut count: usize = 1;
        for c in &classes {
            for k in 1..=c.len() {
                count = count.saturating_mul(k);
            }
        }
        assert!(count <= PERM_CAP, "diagram too symmetric for canonical labeling");
        let mut best: Option<Diagram> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut orders: Vec<Vec<usize>> = classes.clone();
        enumerate_class_perms(&classes, &mut orders, 0, &mut |orders| {
            let mut next = self.roots;
            for o in orders {
                for &v in o {
                    perm[v] = next;
                    next += 1;
                }
            }
            let cand = self.relabel(&perm);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        });
        best.unwrap()
    }

    /// Remap vertices by `map[old] = new`; several old vertices may share a new
    /// index, in which case their legs and labels are merged.
    pub fn merge_vertices(&self, map: &[usize], new_n: usize) -> Diagram {
        let mut vertices = vec![Vertex::default(); new_n];
        for (old, v) in self.vertices.iter().enumerate() {
            let t = &mut vertices[map[old]];
            t.legs += v.legs;
            t.labels.extend(v.labels.iter().cloned());
        }
        for v in &mut vertices {
            v.labels.sort();
        }
        Diagram {
            roots: self.roots,
            vertices,
            p_edges: self.p_edges.iter().map(|&(a, b)| (map[a], map[b])).collect(),
            q_edges: self
                .q_edges
                .iter()
                .map(|&(a, b)| (map[a].min(map[b]), map[a].max(map[b])))
                .collect(),
            symbols: self
                .symbols
                .iter()
                .map(|s| RenormSymbol {
                    vertices: s.vertices.iter().map(|&v| map[v]).collect(),
                    ..s.clone()
                })
                .collect(),
            input: self.input.map(|i| map[i]),
        }
    }

    /// Disjoint union; roots of `self` come first, then roots of `other`, then
    /// the internal vertices of each. Returns the union and the index maps.
    pub fn disjoint_union(&self, other: &Diagram) -> (Diagram, Vec<usize>, Vec<usize>) {
        let roots = self.roots + other.roots;
        let a_int = self.n() - self.roots;
        let map_a: Vec<usize> = (0..self.n())
            .map(|v| if v < self.roots { v } else { roots + (v - self.roots) })
            .collect();
        let map_b: Vec<usize> = (0..other.n())
            .map(|v| if v < other.roots { self.roots + v } else { roots + a_int + (v - other.roots) })
            .collect();
        let n = self.n() + other.n();
        let mut out = Diagram::with_roots(roots);
        out.vertices = vec![Vertex::default(); n];
        for (src, map) in [(self, &map_a), (other, &map_b)] {
            for (v, vx) in src.vertices.iter().enumerate() {
                out.vertices[map[v]] = vx.clone();
            }
            out.p_edges.extend(src.p_edges.iter().map(|&(a, b)| (map[a], map[b])));
            out.q_edges.extend(src.q_edges.iter().map(|&(a, b)| {
                let (x, y) = (map[a], map[b]);
                (x.min(y), x.max(y))
            }));
            out.symbols.extend(src.symbols.iter().map(|s| RenormSymbol {
                vertices: s.vertices.iter().map(|&v| map[v]).collect(),
                ..s.clone()
            }));
        }
        out.input = self.input.map(|i| map_a[i]).or(other.input.map(|i| map_b[i]));
        (out, map_a, map_b)
    }

    /// `P_χ⊛` applied to a single-root diagram: a fresh root with one `P`-child.
    pub fn wrap_p(&self) -> Result<Diagram> {
        if self.roots != 1 {
            return Err(Error::InvalidArgument("P⊛ acts on single-root diagrams".into()));
        }
        let (mut out, _, _) = Diagram::unit().disjoint_union(self);
        // The union has two roots; demote the old root to an internal vertex.
        out.roots = 1;
        out.add_p(0, 1);
        Ok(out.canonical())
    }

    /// Inverse of [`Diagram::wrap_p`]; `None` unless the root carries nothing
    /// but a single `P`-edge.
    pub fn unwrap_p(&self) -> Option<Diagram> {
        if self.roots != 1 || self.vertices[0].legs != 0 || !self.vertices[0].labels.is_empty() {
            return None;
        }
        if self.q_edges.iter().any(|&(a, b)| a == 0 || b == 0) {
            return None;
        }
        if self.symbols.iter().any(|s| s.vertices.contains(&0)) || self.input == Some(0) {
            return None;
        }
        let out_edges: Vec<_> = self.p_edges.iter().filter(|e| e.0 == 0).collect();
        if out_edges.len() != 1 || self.p_edges.iter().any(|e| e.1 == 0) {
            return None;
        }
        let child = out_edges[0].1;
        let mut map = vec![0usize; self.n()];
        let mut next = 1;
        for (v, m) in map.iter_mut().enumerate() {
            if v == 0 {
                continue;
            }
            if v == child {
                *m = 0;
            } else {
                *m = next;
                next += 1;
            }
        }
        let mut out = self.clone();
        out.p_edges.retain(|e| e.0 != 0);
        // Vertex 0 is empty once its P-edge is gone, so merging it into the child is harmless.
        Some(out.merge_vertices(&map, self.n() - 1).canonical())
    }

    /// Pointwise product of single-root diagrams: roots are identified, no contraction.
    pub fn pointwise(&self, other: &Diagram) -> Diagram {
        let (u, _, _) = self.disjoint_union(other);
        merge_roots(&u, 0, 1).canonical()
    }

    /// Substitute `arg` (single root) into the input slot of this operator diagram.
    pub fn plug(&self, arg: &Diagram) -> Result<Diagram> {
        let input = self
            .input
            .ok_or_else(|| Error::InvalidArgument("diagram has no input slot".into()))?;
        if arg.roots != 1 {
            return Err(Error::InvalidArgument("argument must have one root".into()));
        }
        let (mut u, map_a, map_b) = self.disjoint_union(arg);
        u.input = None;
        let mut out = identify(&u, map_a[input], map_b[0]);
        out.roots = self.roots;
        Ok(out.canonical())
    }

    /// Exchange roots `0` and `1` of a two-root diagram.
    pub fn swap_roots(&self) -> Diagram {
        let mut perm: Vec<usize> = (0..self.n()).collect();
        perm.swap(0, 1);
        self.relabel(&perm).canonical()
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{");
        for (i, v) in self.vertices.iter().enumerate() {
            let shape = if i < self.roots { "doublecircle" } else { "circle" };
            let mut label = format!("{i}");
            if v.legs > 0 {
                let _ = write!(label, "\\nΦ^{}", v.legs);
            }
            for l in &v.labels {
                let _ = write!(label, "\\n{l}");
            }
            if self.input == Some(i) {
                label.push_str("\\n(in)");
            }
            let _ = writeln!(s, "  v{i} [shape={shape}, label=\"{label}\"];");
        }
        for &(a, b) in &self.p_edges {
            let _ = writeln!(s, "  v{a} -> v{b} [label=\"P\"];");
        }
        for &(a, b) in &self.q_edges {
            let _ = writeln!(s, "  v{a} -> v{b} [label=\"Q\", dir=none, style=dashed];");
        }
        for (k, sym) in self.symbols.iter().enumerate() {
            let _ = writeln!(s, "  s{k} [shape=box, label=\"{}\"];", sym.name);
            for v in &sym.vertices {
                let _ = writeln!(s, "  s{k} -> v{v} [dir=none, style=dotted];");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Identify vertex `b` with vertex `a`; indices above `b` shift down by one.
pub(crate) fn identify(u: &Diagram, a: usize, b: usize) -> Diagram {
    let n = u.n();
    let mut map: Vec<usize> = (0..n).map(|v| if v > b { v - 1 } else { v }).collect();
    map[b] = map[a];
    let mut out = u.merge_vertices(&map, n - 1);
    if b < u.roots {
        out.roots = u.roots - 1;
    }
    out
}

/// Identify root `b` with root `a` and drop `b` from the root range.
pub(crate) fn merge_roots(u: &Diagram, a: usize, b: usize) -> Diagram {
    identify(u, a, b)
}

fn rank<T: Ord>(sigs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<&T> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(&s).unwrap()).collect()
}

fn enumerate_class_perms(
    classes: &[Vec<usize>],
    orders: &mut Vec<Vec<usize>>,
    i: usize,
    f: &mut dyn FnMut(&[Vec<usize>]),
) {
    if i == classes.len() {
        f(orders);
        return;
    }
    let mut items = classes[i].clone();
    heap_permute(&mut items, classes[i].len(), &mut |p| {
        orders[i] = p.to_vec();
        enumerate_class_perms(classes, orders, i + 1, f);
    });
}

fn heap_permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k <= 1 {
        f(items);
        return;
    }
    for i in 0..k - 1 {
        heap_permute(items, k - 1, f);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
    heap_permute(items, k - 1, f);
}

/// Canonicalize every diagram of a sum and recollect.
pub fn canonical_sum(s: &DiagramSum) -> DiagramSum {
    s.map_keys(Diagram::canonical)
}

pub fn scale_sum(s: &DiagramSum, c: &Rat) -> DiagramSum {
    s.scaled(c)
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let mut p = if i < self.roots { format!("x{i}") } else { format!("y{i}") };
            let mut dec = Vec::new();
            if v.legs > 0 {
                dec.push(format!("Φ^{}", v.legs));
            }
            dec.extend(v.labels.iter().cloned());
            if self.input == Some(i) {
                dec.push("in".into());
            }
            if !dec.is_empty() {
                p.push_str(&format!("[{}]", dec.join(",")));
            }
            parts.push(p);
        }
        for &(a, b) in &self.p_edges {
            parts.push(format!("P({a}→{b})"));
        }
        for &(a, b) in &self.q_edges {
            parts.push(format!("Q({a},{b})"));
        }
        for s in &self.symbols {
            let vs: Vec<String> = s.vertices.iter().map(|v| v.to_string()).collect();
            parts.push(format!("{}({})", s.name, vs.join(",")));
        }
        write!(f, "{}", parts.join(" "))
    }
}

pub fn format_sum(s: &DiagramSum) -> String {
    if s.is_empty() {
        return "0".into();
    }
    s.iter().map(|(d, c)| format!("({c}) {d}")).collect::<Vec<_>>().join("\n")
}
