//! Heat kernels on `ℝ × ℝ^d` and on `ℝ × T^d`.

use crate::error::{Error, Result};
use crate::quad::{adaptive, Tolerance};
use std::f64::consts::PI;

/// `Θ(t)(4πκt)^{−d/2} exp(−|x|²/4κt)`.
pub fn heat_kernel(t: f64, x: &[f64], kappa: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * kappa * t).powf(-(x.len() as f64) / 2.0) * (-r2 / (4.0 * kappa * t)).exp()
}

/// Same as [`heat_kernel`] with the spatial point given by its norm.
pub fn heat_kernel_radial(t: f64, r: f64, d: u32, kappa: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (4.0 * PI * kappa * t).powf(-(d as f64) / 2.0) * (-r * r / (4.0 * kappa * t)).exp()
}

/// Fundamental solution of `∂_t − κΔ + z`.
pub fn massive_heat_kernel(t: f64, x: &[f64], kappa: f64, z: f64) -> f64 {
    heat_kernel(t, x, kappa) * (-z * t).exp()
}

fn heat_1d(t: f64, x: f64) -> f64 {
    (4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp()
}

/// One-dimensional image sum `Σ_{|n| ≤ terms} p(t, x + n)` and a bound on the
/// omitted terms, for `x ∈ (0, 1)`.
fn periodic_1d(t: f64, x: f64, terms: i64) -> (f64, f64) {
    let s: f64 = (-terms..=terms).map(|n| heat_1d(t, x + n as f64)).sum();
    // Every omitted image sits at distance ≥ m for m = terms, terms + 1, …, twice.
    let m = terms as f64;
    let q = (-(2.0 * m + 1.0) / (4.0 * t)).exp();
    let tail = if q < 1.0 { 2.0 * heat_1d(t, m) / (1.0 - q) } else { f64::INFINITY };
    (s, tail)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Heat kernel on the flat torus `(0, 1)^d` by the truncated image sum.
pub fn torus_kernel(t: f64, x: &[f64], terms: u32) -> Result<TorusValue> {
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("torus coordinates must lie in [0, 1]".into()));
    }
    if t <= 0.0 {
        return Ok(TorusValue { value: 0.0, tail_bound: 0.0 });
    }
    let parts: Vec<(f64, f64)> = x.iter().map(|&v| periodic_1d(t, v, terms as i64)).collect();
    let value: f64 = parts.iter().map(|p| p.0).product();
    let upper: f64 = parts.iter().map(|p| p.0 + p.1).product();
    Ok(TorusValue { value, tail_bound: upper - value })
}

/// Regularised covariance of the linear solution driven by noise mollified in
/// space with a Gaussian of standard deviation `eps`, switched on during
/// `[0, window]`:
///
/// `Q_ε((t₁,x₁),(t₂,x₂)) = ∫_0^{min(t₁,t₂,window)} ds ∫ dy p_ε(t₁−s, x₁−y) p_ε(t₂−s, x₂−y)`
///
/// with `p_ε(t, ·) = p(t + ε²/2, ·)`. The `y` integral is the semigroup
/// identity, the `s` integral is numerical.
pub fn q_epsilon(z1: (f64, &[f64]), z2: (f64, &[f64]), eps: f64, window: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if z1.1.len() != z2.1.len() {
        return Err(Error::InvalidArgument("points of different dimension".into()));
    }
    let top = z1.0.min(z2.0).min(window);
    if top <= 0.0 {
        return Ok(0.0);
    }
    let dx: Vec<f64> = z1.1.iter().zip(z2.1).map(|(a, b)| a - b).collect();
    let f = |s: f64| heat_kernel(z1.0 + z2.0 - 2.0 * s + eps * eps, &dx, 1.0);
    // The integrand peaks as s → top when the time gap is small.
    let mut cuts = vec![0.0];
    for k in [8.0, 2.0, 0.5] {
        let c = top - k * eps * eps;
        if c > 0.0 {
            cuts.push(c);
        }
    }
    cuts.push(top);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive(f, w[0], w[1], Tolerance { abs: 1e-14, rel: 1e-11, max_intervals: 2000 })?.0;
    }
    Ok(total)
}
