//! Numerical values of terms and contracted diagrams on the lattice.
//!
//! Terms are evaluated sample by sample with `Φ ↦ φ̂`. Diagrams are evaluated
//! deterministically: legs become the shift `φ`, `P`-edges the lattice
//! `P_χ⊛`, `Q`-edges the exact lattice covariance and self-loops its diagonal.
//! Diagrams whose edges (self-loops aside) contain a cycle are not supported.

use super::lattice::{Field, Lattice};
use crate::contraction::{Diagram, DiagramSum};
use crate::error::{Error, Result};
use crate::linear::LinComb;
use crate::rational::to_f64;
use crate::term::Term;
use std::collections::BTreeMap;

pub type Labels = BTreeMap<String, Field>;

/// A term as a lattice field, given one realisation `phi_hat` of the field.
pub fn eval_term(lat: &Lattice, t: &Term, phi_hat: &Field, labels: &Labels) -> Result<Field> {
    Ok(match t {
        Term::Phi => phi_hat.clone(),
        Term::One => Field::constant(phi_hat.nt, phi_hat.sites, 1.0),
        Term::Smooth { label } => labels.get(label).cloned().ok_or_else(|| Error::UnknownSymbol(label.clone()))?,
        Term::Prod { children } => {
            let mut acc = Field::constant(phi_hat.nt, phi_hat.sites, 1.0);
            for c in children {
                acc.mul_assign(&eval_term(lat, c, phi_hat, labels)?);
            }
            acc
        }
        Term::Integ { child } => lat.propagate(&eval_term(lat, child, phi_hat, labels)?),
    })
}

pub fn eval_sum(lat: &Lattice, l: &LinComb<Term>, phi_hat: &Field, labels: &Labels) -> Result<Field> {
    let mut out = lat.zeros();
    for (t, c) in l.iter() {
        out.add_scaled(to_f64(c), &eval_term(lat, t, phi_hat, labels)?);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Edge {
    /// `P(parent → child)`.
    P(usize, usize),
    Q(usize, usize),
}

impl Edge {
    fn other(&self, v: usize) -> usize {
        match *self {
            Edge::P(a, b) | Edge::Q(a, b) => {
                if a == v {
                    b
                } else {
                    a
                }
            }
        }
    }
}

struct Evaluator<'a> {
    lat: &'a Lattice,
    weights: Vec<Field>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
}

impl Evaluator<'_> {
    /// Field at `v` collected from every edge except `skip`.
    fn collect(&self, v: usize, skip: Option<usize>) -> Field {
        let mut acc = self.weights[v].clone();
        for &e in &self.incident[v] {
            if Some(e) == skip {
                continue;
            }
            acc.mul_assign(&self.message(e, self.edges[e].other(v)));
        }
        acc
    }

    /// Message along `e` from the subtree rooted at `from` to the other end.
    fn message(&self, e: usize, from: usize) -> Field {
        let h = self.collect(from, Some(e));
        match self.edges[e] {
            Edge::P(_, child) if child == from => self.lat.propagate(&h),
            Edge::P(..) => self.lat.propagate_adjoint(&h),
            Edge::Q(..) => self.lat.covariance_apply(&h),
        }
    }
}

/// Value of one diagram with test function `roots[r]` at root `r`, shift
/// `phi` on uncontracted legs and fields for smooth labels.
pub fn eval_diagram(lat: &Lattice, d: &Diagram, roots: &[&Field], phi: &Field, labels: &Labels) -> Result<f64> {
    if d.input.is_some() {
        return Err(Error::NotEvaluable("operator diagrams need an argument".into()));
    }
    if let Some(s) = d.symbols.first() {
        return Err(Error::NotEvaluable(format!("renormalization symbol {} has no lattice value", s.name)));
    }
    if roots.len() != d.roots {
        return Err(Error::InvalidArgument(format!("{} test functions for {} roots", roots.len(), d.roots)));
    }
    let n = d.n();
    let diag = lat.diagonal_field();
    let mut weights = Vec::with_capacity(n);
    for (i, v) in d.vertices.iter().enumerate() {
        let mut w = if i < d.roots { roots[i].clone() } else { Field::constant(phi.nt, phi.sites, 1.0) };
        if v.legs > 0 {
            w.mul_assign(&phi.powi(v.legs as i32));
        }
        for l in &v.labels {
            w.mul_assign(labels.get(l).ok_or_else(|| Error::UnknownSymbol(l.clone()))?);
        }
        weights.push(w);
    }
    let mut edges = Vec::new();
    for &(a, b) in &d.p_edges {
        edges.push(Edge::P(a, b));
    }
    for &(a, b) in &d.q_edges {
        if a == b {
            weights[a].mul_assign(&diag);
        } else {
            edges.push(Edge::Q(a, b));
        }
    }
    // Union–find to reject cycles and find components.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut incident = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        let (a, b) = match *e {
            Edge::P(a, b) | Edge::Q(a, b) => (a, b),
        };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return Err(Error::NotEvaluable(format!("diagram has a loop through vertices {a} and {b}")));
        }
        parent[ra] = rb;
        incident[a].push(k);
        incident[b].push(k);
    }
    let ev = Evaluator { lat, weights, edges, incident };
    let mut seen = vec![false; n];
    let mut value = 1.0;
    for v in 0..n {
        let r = find(&mut parent, v);
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let total = ev.collect(v, None);
        value *= lat.pair(&total, &Field::constant(phi.nt, phi.sites, 1.0));
    }
    Ok(value)
}

pub fn eval_diagram_sum(lat: &Lattice, s: &DiagramSum, roots: &[&Field], phi: &Field, labels: &Labels) -> Result<f64> {
    let mut total = 0.0;
    for (d, c) in s.iter() {
        total += to_f64(c) * eval_diagram(lat, d, roots, phi, labels)?;
    }
    Ok(total)
}
