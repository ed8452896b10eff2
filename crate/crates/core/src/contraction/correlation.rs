//! Two-point correlations and the renormalized equation.

use super::diagram::{Diagram, DiagramSum};
use super::gamma::{Contractor, TensorWord};
use crate::error::{Error, Result};
use crate::linear::LinComb;
use crate::rational::int;
use crate::term::{expand_solution, FormalSeries};

impl Contractor {
    /// `Γ_·Q(F_j)` for `j = 0..=order`.
    pub fn gamma_orders(&self, order: usize) -> Result<Vec<DiagramSum>> {
        let series = expand_solution(order as i64)?;
        Ok((0..=order).map(|j| self.gamma_cdot_q_sum(&series.order(j))).collect())
    }

    /// `ω₂ = Σ_k λ^k Σ_j Γ_•Q(Γ_·Q(F_j) ⊗ Γ_·Q(F_{k−j}))`, truncated at `order`.
    pub fn two_point_correlation(&self, order: i64) -> Result<FormalSeries<Diagram>> {
        if order < 0 {
            return Err(Error::InvalidArgument(format!("order must be non-negative, got {order}")));
        }
        let order = order as usize;
        let g = self.gamma_orders(order)?;
        let mut out = FormalSeries::new(order);
        for k in 0..=order {
            let mut acc = LinComb::new();
            for j in 0..=k {
                let w = TensorWord::new(vec![g[j].clone(), g[k - j].clone()]);
                acc.add_all(&self.gamma_bullet_q(&w));
            }
            out.set(k, acc);
        }
        Ok(out)
    }

    /// Counterterm operators `M_1, …, M_order` of the renormalized equation
    /// `Ψ_·Q = Φ − λ P⊛Ψ_·Q³ − P⊛ M Ψ_·Q`, obtained by matching `Γ_·Q(Ψ)`
    /// order by order. Each operator is a sum of diagrams with an input slot.
    ///
    /// An operator is only determined by its action on `Φ`; the slot is put at
    /// the root when the root carries a leg and otherwise at the first vertex
    /// (in canonical order) that does.
    pub fn renormalized_equation(&self, order: i64) -> Result<Vec<(usize, DiagramSum)>> {
        if !(0..=MAX_RENORM_ORDER).contains(&order) {
            return Err(Error::InvalidArgument(format!(
                "renormalized equation supports orders 0..={MAX_RENORM_ORDER}, got {order}"
            )));
        }
        let order = order as usize;
        let g = self.gamma_orders(order)?;
        let mut ops: Vec<DiagramSum> = vec![LinComb::new()];
        for m in 1..=order {
            let mut residual = g[m].clone();
            for j1 in 0..m {
                for j2 in 0..m - j1 {
                    let j3 = m - 1 - j1 - j2;
                    let cube = pointwise_sum(&pointwise_sum(&g[j1], &g[j2]), &g[j3]);
                    residual.add_all(&wrap_sum(&cube)?);
                }
            }
            for k1 in 1..m {
                let applied = apply_operator(&ops[k1], &g[m - k1])?;
                residual.add_all(&wrap_sum(&applied)?);
            }
            // residual = −P⊛(M_m Φ)
            let mut op = LinComb::new();
            for (d, c) in residual.iter() {
                let inner = d.unwrap_p().ok_or_else(|| Error::MatchingResidual {
                    order: m,
                    detail: format!("term is not of the form P⊛(…): {d}"),
                })?;
                op.add(extract_input(&inner, m)?, -c.clone());
            }
            ops.push(op);
        }
        Ok(ops.into_iter().enumerate().skip(1).collect())
    }
}

pub const MAX_RENORM_ORDER: i64 = 3;

fn pointwise_sum(a: &DiagramSum, b: &DiagramSum) -> DiagramSum {
    let mut out = LinComb::new();
    for (da, ca) in a.iter() {
        for (db, cb) in b.iter() {
            out.add(da.pointwise(db), ca * cb);
        }
    }
    out
}

fn wrap_sum(s: &DiagramSum) -> Result<DiagramSum> {
    let mut out = LinComb::new();
    for (d, c) in s.iter() {
        out.add(d.wrap_p()?, c.clone());
    }
    Ok(out)
}

/// Apply an operator (diagrams with an input slot) to a single-root sum.
pub fn apply_operator(op: &DiagramSum, arg: &DiagramSum) -> Result<DiagramSum> {
    let mut out = LinComb::new();
    for (o, co) in op.iter() {
        for (a, ca) in arg.iter() {
            out.add(o.plug(a)?, co * ca);
        }
    }
    Ok(out)
}

fn extract_input(d: &Diagram, order: usize) -> Result<Diagram> {
    let legs = d.total_legs();
    if legs % 2 == 0 {
        return Err(Error::MatchingResidual {
            order,
            detail: format!("even Φ-degree {legs} cannot be M Φ: {d}"),
        });
    }
    let v = if d.vertices[0].legs > 0 {
        0
    } else {
        (0..d.n()).find(|&v| d.vertices[v].legs > 0).unwrap()
    };
    let mut op = d.clone();
    op.vertices[v].legs -= 1;
    op.input = Some(v);
    Ok(op.canonical())
}

/// The operator diagram acting on `Φ`, i.e. `M Φ` for an operator sum `M`.
pub fn act_on_phi(op: &DiagramSum) -> Result<DiagramSum> {
    let mut phi = Diagram::unit();
    phi.add_legs(0, 1);
    apply_operator(op, &LinComb::single(phi, int(1)))
}
