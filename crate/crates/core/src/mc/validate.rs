//! Monte-Carlo estimates compared with contraction-engine predictions.
//!
//! Predictions are the raw contractions (no divergent subgraph collapsed into
//! a symbol), evaluated on the same lattice as the samples, so an estimate and
//! its prediction differ only by sampling error.

use super::evaluate::{eval_diagram_sum, eval_sum, Labels};
use super::lattice::{Field, Lattice, LatticeConfig};
use crate::contraction::{Contractor, DiagramSum};
use crate::error::Result;
use crate::kernels::q_epsilon;
use crate::linear::LinComb;
use crate::scaling::TestFunction;
use crate::term::{expand_solution, Term};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    pub prediction: f64,
    /// `(estimate − prediction) / std_error`.
    pub z: f64,
}

impl Comparison {
    fn new(label: &str, (estimate, std_error): (f64, f64), prediction: f64) -> Self {
        let diff = estimate - prediction;
        let z = if std_error > 0.0 {
            diff / std_error
        } else if diff.abs() <= 1e-12 * prediction.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        };
        Comparison { label: label.to_string(), estimate, std_error, prediction, z }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub seed: u64,
    pub samples: usize,
    pub comparisons: Vec<Comparison>,
}

impl McReport {
    pub fn max_abs_z(&self) -> f64 {
        self.comparisons.iter().fold(0.0, |m, c| m.max(c.z.abs()))
    }

    pub fn within(&self, k: f64) -> bool {
        self.max_abs_z() <= k
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("label,estimate,std_error,prediction,z\n");
        for c in &self.comparisons {
            s.push_str(&format!("{},{:e},{:e},{:e},{:.3}\n", c.label, c.estimate, c.std_error, c.prediction, c.z));
        }
        s
    }
}

/// Per-sample statistics `stat(φ̂)` averaged over `cfg.samples` realisations.
/// Samples run in parallel; the reduction is in sample order.
pub fn run_samples(
    lat: &Lattice,
    shift: Option<&Field>,
    stat: impl Fn(&Field) -> Result<Vec<f64>> + Sync,
) -> Result<Vec<(f64, f64)>> {
    let rows: Vec<Vec<f64>> = (0..lat.cfg.samples as u64)
        .into_par_iter()
        .map(|k| stat(&lat.solve_linear(&lat.sample_noise(k), shift)))
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let width = rows.first().map_or(0, |r| r.len());
    Ok((0..width)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, (var / n).sqrt())
        })
        .collect())
}

/// The contractor used for predictions: at `d = 1` nothing is tagged.
fn raw() -> Contractor {
    Contractor::new(1)
}

struct Setup {
    lat: Lattice,
    phi: Field,
    labels: Labels,
}

fn setup(cfg: &LatticeConfig, phi: Option<&TestFunction>) -> Result<Setup> {
    let lat = Lattice::new(*cfg)?;
    let phi = match phi {
        Some(f) => lat.sample(f)?,
        None => lat.zeros(),
    };
    Ok(Setup { lat, phi, labels: Labels::new() })
}

/// Covariance of `φ̂(f₁), φ̂(f₂)` at zero shift and the local square
/// `E[φ̂²(f₁)] = Φ²(f₁; φ) + ∫ f₁ Q_ε(x, x)` at the given shift.
pub fn validate_covariance(
    cfg: &LatticeConfig,
    phi: Option<&TestFunction>,
    f1: &TestFunction,
    f2: &TestFunction,
) -> Result<McReport> {
    let s = setup(cfg, phi)?;
    let (g1, g2) = (s.lat.sample(f1)?, s.lat.sample(f2)?);
    let c = raw();
    let zero = s.lat.zeros();
    let cov = c.gamma_bullet_q(&crate::contraction::TensorWord::new(vec![
        c.gamma_cdot_q(&Term::Phi),
        c.gamma_cdot_q(&Term::Phi),
    ]));
    let cov_pred = eval_diagram_sum(&s.lat, &cov, &[&g1, &g2], &zero, &s.labels)?;
    let sq = c.gamma_cdot_q(&Term::phi_pow(2));
    let sq_pred = eval_diagram_sum(&s.lat, &sq, &[&g1], &s.phi, &s.labels)?;
    let lat = &s.lat;
    let shift = &s.phi;
    let stats = run_samples(lat, None, |u| {
        let mut shifted = u.clone();
        shifted.add_scaled(1.0, shift);
        Ok(vec![lat.pair(u, &g1) * lat.pair(u, &g2), lat.pair(&shifted.powi(2), &g1)])
    })?;
    Ok(McReport {
        seed: cfg.seed,
        samples: cfg.samples,
        comparisons: vec![Comparison::new("covariance", stats[0], cov_pred), Comparison::new("local square", stats[1], sq_pred)],
    })
}

fn orders(order: usize) -> Result<Vec<LinComb<Term>>> {
    let series = expand_solution(order as i64)?;
    Ok((0..=order).map(|j| series.order(j)).collect())
}

/// `E[ψ(f)]` for the first-order truncation `ψ = F₀ + λF₁` at shift `φ`,
/// order by order and summed.
pub fn validate_first_order(cfg: &LatticeConfig, phi: Option<&TestFunction>, lambda: f64, f: &TestFunction) -> Result<McReport> {
    let s = setup(cfg, phi)?;
    let g = s.lat.sample(f)?;
    let c = raw();
    let fs = orders(1)?;
    let preds: Vec<f64> = fs
        .iter()
        .map(|fj| eval_diagram_sum(&s.lat, &c.gamma_cdot_q_sum(fj), &[&g], &s.phi, &s.labels))
        .collect::<Result<_>>()?;
    let (lat, labels) = (&s.lat, &s.labels);
    let stats = run_samples(lat, Some(&s.phi), |u| {
        let v: Vec<f64> = fs.iter().map(|fj| eval_sum(lat, fj, u, labels).map(|x| lat.pair(&x, &g))).collect::<Result<_>>()?;
        Ok(vec![v[0], v[1], v[0] + lambda * v[1]])
    })?;
    Ok(McReport {
        seed: cfg.seed,
        samples: cfg.samples,
        comparisons: vec![
            Comparison::new("order 0", stats[0], preds[0]),
            Comparison::new("order 1", stats[1], preds[1]),
            Comparison::new("truncated sum", stats[2], preds[0] + lambda * preds[1]),
        ],
    })
}

/// `E[ψ(f₁) ψ(f₂)]` through order one, compared with the engine's `ω₂`.
pub fn validate_two_point(
    cfg: &LatticeConfig,
    phi: Option<&TestFunction>,
    lambda: f64,
    f1: &TestFunction,
    f2: &TestFunction,
) -> Result<McReport> {
    let s = setup(cfg, phi)?;
    let (g1, g2) = (s.lat.sample(f1)?, s.lat.sample(f2)?);
    let w = raw().two_point_correlation(1)?;
    let pred = |k: usize| -> Result<f64> {
        let o: DiagramSum = w.order(k);
        eval_diagram_sum(&s.lat, &o, &[&g1, &g2], &s.phi, &s.labels)
    };
    let (p0, p1) = (pred(0)?, pred(1)?);
    let fs = orders(1)?;
    let (lat, labels) = (&s.lat, &s.labels);
    let stats = run_samples(lat, Some(&s.phi), |u| {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for fj in &fs {
            let x = eval_sum(lat, fj, u, labels)?;
            a.push(lat.pair(&x, &g1));
            b.push(lat.pair(&x, &g2));
        }
        let y0 = a[0] * b[0];
        let y1 = a[1] * b[0] + a[0] * b[1];
        Ok(vec![y0, y1, y0 + lambda * y1])
    })?;
    Ok(McReport {
        seed: cfg.seed,
        samples: cfg.samples,
        comparisons: vec![
            Comparison::new("order 0", stats[0], p0),
            Comparison::new("order 1", stats[1], p1),
            Comparison::new("truncated sum", stats[2], p0 + lambda * p1),
        ],
    })
}

/// Largest relative gap between the lattice diagonal `Q_ε(z, z)` and the
/// continuum value, over time points with `t ≥ t_min`.
pub fn diagonal_discretization_gap(cfg: &LatticeConfig, t_min: f64) -> Result<f64> {
    let lat = Lattice::new(*cfg)?;
    let diag = lat.diagonal();
    let x = vec![0.0; cfg.d as usize];
    let mut gap = 0.0f64;
    for (n, v) in diag.iter().enumerate() {
        let t = lat.time(n);
        if t < t_min {
            continue;
        }
        let c = q_epsilon((t, &x), (t, &x), cfg.eps, cfg.t_window)?;
        gap = gap.max((v - c).abs() / c);
    }
    Ok(gap)
}
