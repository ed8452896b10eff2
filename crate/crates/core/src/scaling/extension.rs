//! Taylor-subtracted pairings with kernels singular at the origin.
//!
//! `⟨t̂, f⟩ = ⟨t, W_ρ f⟩` with `W_ρ f = f − Σ_{w(α) ≤ ρ} ∂^α f(0) ψ_α`, where
//! `ψ_α(y) = y^α/α! · g(‖y‖)` and `g` is a smooth cutoff equal to one near the
//! origin, so `∂^β ψ_α(0) = δ^β_α` holds without correction terms.
//!
//! The integral is taken outside a neighbourhood of the origin of size
//! `r_k = r₀ 2^{−k}`: a Euclidean ball in elliptic mode, the slab `|t| < r_k²`
//! in parabolic mode. Shells are added one at a time and the sequence is
//! extrapolated with Aitken's Δ².

use super::calculus::{Mode, ScalingContext};
use super::testfn::TestFunction;
use crate::error::{Error, Result};
use crate::quad::{adaptive, GaussLegendre, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtensionConfig {
    pub r0: f64,
    pub max_levels: usize,
    pub tol: f64,
    pub angular_nodes: usize,
    /// Outer radius of the cutoff `g`; it equals one on half this radius.
    pub bump_radius: f64,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        ExtensionConfig { r0: 0.5, max_levels: 60, tol: 1e-9, angular_nodes: 24, bump_radius: 1.0 }
    }
}

fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth radial cutoff: 1 on `[0, R/2]`, 0 beyond `R`.
pub fn cutoff(s: f64, radius: f64) -> f64 {
    let u = 2.0 * s / radius - 1.0;
    let a = smooth_step(1.0 - u);
    let b = smooth_step(u);
    a / (a + b)
}

/// Multi-indices with weighted order at most `rho`; the first coordinate has
/// weight `w0`, the rest weight one.
pub fn taylor_indices(dim: usize, rho: i64, w0: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, dim: usize, left: i64, w0: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == dim {
            out.push(acc.clone());
            return;
        }
        let w = if i == 0 { w0 as i64 } else { 1 };
        let mut k = 0;
        while k * w <= left {
            acc.push(k as u32);
            rec(i + 1, dim, left - k * w, w0, acc, out);
            acc.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    if rho >= 0 {
        rec(0, dim, rho, w0, &mut Vec::new(), &mut out);
    }
    out
}

/// Weighted orders beyond `ρ` kept for the near-origin remainder series.
const SERIES_ORDERS: i64 = 6;
/// Below this norm `f − Σ` is summed from its Taylor series instead of
/// subtracted, which avoids cancellation.
const SERIES_RADIUS: f64 = 1e-2;

/// Taylor data of `f` at the origin, paired with its multi-indices.
pub struct Subtraction {
    pub terms: Vec<(Vec<u32>, f64)>,
    series: Vec<(Vec<u32>, f64)>,
    radius: f64,
    parabolic: bool,
}

fn taylor_terms(f: &TestFunction, idx: Vec<Vec<u32>>) -> Vec<(Vec<u32>, f64)> {
    idx.into_iter()
        .map(|a| {
            let fact: f64 = a.iter().map(|&k| (1..=k).map(f64::from).product::<f64>()).product();
            let d = f.deriv_at_origin(&a);
            (a, d / fact)
        })
        .filter(|(_, c)| *c != 0.0)
        .collect()
}

fn monomials(terms: &[(Vec<u32>, f64)], y: &[f64]) -> f64 {
    terms.iter().map(|(a, c)| c * a.iter().zip(y).map(|(&k, &v)| v.powi(k as i32)).product::<f64>()).sum()
}

impl Subtraction {
    pub fn new(f: &TestFunction, rho: i64, mode: Mode, radius: f64) -> Self {
        let parabolic = mode == Mode::Parabolic;
        let w0 = if parabolic { 2 } else { 1 };
        let weight = |a: &[u32]| a[0] as i64 * w0 as i64 + a[1..].iter().map(|&k| k as i64).sum::<i64>();
        let terms = taylor_terms(f, taylor_indices(f.dim, rho, w0));
        let higher = taylor_indices(f.dim, rho.max(-1) + SERIES_ORDERS, w0).into_iter().filter(|a| weight(a) > rho).collect();
        let series = taylor_terms(f, higher);
        Subtraction { terms, series, radius, parabolic }
    }

    /// `f(y) − eval(y)`.
    pub fn remainder(&self, f: &TestFunction, y: &[f64]) -> f64 {
        if self.norm(y) < SERIES_RADIUS.min(0.5 * self.radius) {
            monomials(&self.series, y)
        } else {
            f.eval(y) - self.eval(y)
        }
    }

    fn norm(&self, y: &[f64]) -> f64 {
        if self.parabolic {
            let x2: f64 = y[1..].iter().map(|v| v * v).sum();
            (y[0] * y[0] + x2 * x2).sqrt().sqrt()
        } else {
            y.iter().map(|v| v * v).sum::<f64>().sqrt()
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let g = cutoff(self.norm(y), self.radius);
        if g == 0.0 {
            return 0.0;
        }
        monomials(&self.terms, y) * g
    }
}

/// Quadrature directions on the unit sphere of `ℝ^m`, `m ≤ 3`.
fn sphere_rule(m: usize, n: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    Ok(match m {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => (0..n)
            .map(|i| {
                let th = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                (vec![th.cos(), th.sin()], 2.0 * PI / n as f64)
            })
            .collect(),
        3 => {
            let gl = GaussLegendre::new(n);
            let mut out = Vec::new();
            for (c, w) in gl.nodes.iter().zip(&gl.weights) {
                let s = (1.0 - c * c).sqrt();
                for j in 0..2 * n {
                    let ph = PI * (j as f64 + 0.5) / n as f64;
                    out.push((vec![s * ph.cos(), s * ph.sin(), *c], w * PI / n as f64));
                }
            }
            out
        }
        _ => return Err(Error::InvalidArgument(format!("polar quadrature supports dimensions 1 to 3, got {m}"))),
    })
}

fn quad_tol(cfg: &ExtensionConfig) -> Tolerance {
    Tolerance { abs: cfg.tol * 1e-3, rel: cfg.tol * 1e-2, max_intervals: 4000 }
}

/// Aitken-extrapolated limit of partial sums `I(r_k)`.
fn extrapolate(mut shell: impl FnMut(usize) -> Result<f64>, outer: f64, cfg: &ExtensionConfig) -> Result<f64> {
    let mut sums = vec![outer];
    let mut prev: Option<f64> = None;
    for k in 0..cfg.max_levels {
        let s = shell(k)?;
        sums.push(sums.last().unwrap() + s);
        let n = sums.len();
        if n < 3 {
            continue;
        }
        let (a, b, c) = (sums[n - 3], sums[n - 2], sums[n - 1]);
        let (d1, d2) = (b - a, c - b);
        let scale = c.abs().max(1.0);
        let est = if d2.abs() <= 1e-3 * cfg.tol * scale || (d2 - d1).abs() < 1e-300 {
            c
        } else {
            c - d2 * d2 / (d2 - d1)
        };
        if let Some(p) = prev {
            if (est - p).abs() <= cfg.tol * scale && d2.abs() <= 1e3 * cfg.tol * scale {
                return Ok(est);
            }
        }
        prev = Some(est);
    }
    Err(Error::NonConvergence(format!(
        "radius extrapolation did not settle within {} levels",
        cfg.max_levels
    )))
}

/// `⟨t̂, f⟩` for a kernel `t` singular only at the origin. Elliptic mode works
/// on `ℝ^d` (`d ≤ 3`); parabolic mode on `ℝ × ℝ` with coordinates `(t, x)`.
pub fn extend_pairing(
    kernel: &(dyn Fn(&[f64]) -> f64 + Sync),
    rho: i64,
    f: &TestFunction,
    ctx: &ScalingContext,
    cfg: &ExtensionConfig,
) -> Result<f64> {
    extend_pairing_with(kernel, &Subtraction::new(f, rho, ctx.mode, cfg.bump_radius), f, ctx, cfg)
}

pub fn extend_pairing_with(
    kernel: &(dyn Fn(&[f64]) -> f64 + Sync),
    sub: &Subtraction,
    f: &TestFunction,
    ctx: &ScalingContext,
    cfg: &ExtensionConfig,
) -> Result<f64> {
    ctx.validate()?;
    let integrand = |y: &[f64]| {
        let k = kernel(y);
        if k == 0.0 {
            return 0.0;
        }
        k * sub.remainder(f, y)
    };
    let tol = quad_tol(cfg);
    match ctx.mode {
        Mode::Elliptic => {
            let m = ctx.d as usize;
            if f.dim != m {
                return Err(Error::InvalidArgument(format!("test function has dimension {}, expected {m}", f.dim)));
            }
            let dirs = sphere_rule(m, cfg.angular_nodes)?;
            let radial = |r: f64| -> f64 {
                let mut y = vec![0.0; m];
                let mut s = 0.0;
                for (u, w) in &dirs {
                    for i in 0..m {
                        y[i] = r * u[i];
                    }
                    s += w * integrand(&y);
                }
                s * r.powi(m as i32 - 1)
            };
            let reach = f.extent().iter().map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2)).sum::<f64>().sqrt();
            let big = reach.max(cfg.bump_radius).max(cfg.r0);
            let (outer, _) = adaptive(radial, cfg.r0, big, tol)?;
            extrapolate(
                |k| {
                    let hi = cfg.r0 * 0.5f64.powi(k as i32);
                    adaptive(radial, 0.5 * hi, hi, tol).map(|v| v.0)
                },
                outer,
                cfg,
            )
        }
        Mode::Parabolic => {
            if ctx.d != 1 || f.dim != 2 {
                return Err(Error::InvalidArgument("parabolic extension is implemented for d = 1".into()));
            }
            let ext = f.extent();
            let (xlo, xhi) = ext[1];
            let (xlo, xhi) = (xlo.min(-cfg.bump_radius), xhi.max(cfg.bump_radius));
            let slice = |t: f64| -> f64 {
                let mut pts = vec![xlo];
                let s = t.abs().sqrt();
                for c in [-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0] {
                    let x = c * s;
                    if x > xlo && x < xhi {
                        pts.push(x);
                    }
                }
                pts.push(xhi);
                pts.windows(2)
                    .map(|w| adaptive(|x| integrand(&[t, x]), w[0], w[1], tol).map(|v| v.0).unwrap_or(f64::NAN))
                    .sum()
            };
            let (tlo, thi) = ext[0];
            let (tlo, thi) = (tlo.min(-cfg.bump_radius * cfg.bump_radius), thi.max(cfg.bump_radius * cfg.bump_radius));
            let r2 = cfg.r0 * cfg.r0;
            let mut outer = 0.0;
            if thi > r2 {
                outer += adaptive(slice, r2, thi, tol)?.0;
            }
            if tlo < -r2 {
                outer += adaptive(slice, tlo, -r2, tol)?.0;
            }
            let v = extrapolate(
                |k| {
                    let hi = r2 * 0.25f64.powi(k as i32);
                    let a = adaptive(slice, 0.25 * hi, hi, tol)?.0;
                    let b = if tlo < 0.0 { adaptive(slice, -hi, -0.25 * hi, tol)?.0 } else { 0.0 };
                    Ok(a + b)
                },
                outer,
                cfg,
            )?;
            if v.is_nan() {
                return Err(Error::NonConvergence("inner quadrature failed".into()));
            }
            Ok(v)
        }
    }
}
