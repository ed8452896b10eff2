//! Numerical scaling degree by regression of `log |⟨t, f^λ⟩|` on `log λ`.

use super::calculus::{Mode, ScalingContext};
use crate::error::{Error, Result};
use crate::quad::{adaptive, Tolerance};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Kernels that depend on the spatial point only through its norm.
pub enum Sampler<'a> {
    /// `y ↦ K(|y|)` on `ℝ^d`.
    Radial(&'a (dyn Fn(f64) -> f64 + Sync)),
    /// `(t, x) ↦ K(t, |x|)` on `ℝ × ℝ^d`.
    SpaceRadial(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
}

/// Radial probe `|y|^{2·vanish} e^{−|y|²/width²}`; in parabolic mode it is
/// multiplied by a time bump on `time_window`, or by `e^{−t²}` when absent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub time_window: Option<(f64, f64)>,
    pub vanish: u32,
    pub width: f64,
}

impl Probe {
    /// A probe whose support stays away from the origin.
    pub fn off_origin(mode: Mode) -> Self {
        match mode {
            Mode::Elliptic => Probe { time_window: None, vanish: 6, width: 1.0 },
            Mode::Parabolic => Probe { time_window: Some((1.0, 2.0)), vanish: 0, width: 1.0 },
        }
    }

    /// A probe that does not vanish at the origin.
    pub fn centred() -> Self {
        Probe { time_window: None, vanish: 0, width: 1.0 }
    }

    fn space(&self, r: f64) -> f64 {
        r.powi(2 * self.vanish as i32) * (-(r * r) / (self.width * self.width)).exp()
    }

    fn time(&self, t: f64) -> f64 {
        match self.time_window {
            Some((lo, hi)) => super::testfn::Factor::bump(lo, hi).eval(t),
            None => (-t * t).exp(),
        }
    }

    fn time_range(&self) -> (f64, f64) {
        self.time_window.unwrap_or((-7.0, 7.0))
    }

    fn space_reach(&self) -> f64 {
        self.width * (45.0 + 4.0 * self.vanish as f64).sqrt()
    }
}

fn sphere_area(m: u32) -> f64 {
    2.0 * PI.powf(m as f64 / 2.0) / gamma(m as f64 / 2.0)
}

/// `⟨t, f^λ⟩ = ∫ t(λ^w y) f(y) dy`, the dilation moved onto the kernel.
pub fn scaled_pairing(s: &Sampler, ctx: &ScalingContext, probe: &Probe, lambda: f64) -> Result<f64> {
    let tol = Tolerance { abs: 1e-300, rel: 1e-11, max_intervals: 4000 };
    let d = ctx.d;
    let area = sphere_area(d);
    let reach = probe.space_reach();
    let radial = |k: &dyn Fn(f64) -> f64| -> Result<f64> {
        let pts = [0.0, 0.05 * reach, 0.25 * reach, reach];
        let mut s = 0.0;
        for w in pts.windows(2) {
            s += adaptive(|r| r.powi(d as i32 - 1) * k(r) * probe.space(r), w[0], w[1], tol)?.0;
        }
        Ok(area * s)
    };
    match (s, ctx.mode) {
        (Sampler::Radial(k), Mode::Elliptic) => radial(&|r| k(lambda * r)),
        (Sampler::SpaceRadial(k), Mode::Parabolic) => {
            let (lo, hi) = probe.time_range();
            let mut err = None;
            let inner = |t: f64| {
                let w = probe.time(t);
                if w == 0.0 {
                    return 0.0;
                }
                match radial(&|r| k(lambda * lambda * t, lambda * r)) {
                    Ok(v) => w * v,
                    Err(_) => f64::NAN,
                }
            };
            let mut total = 0.0;
            let cuts: Vec<f64> = if probe.time_window.is_some() {
                vec![lo, hi]
            } else {
                vec![lo, -1.0, 0.0, 1.0, hi]
            };
            for w in cuts.windows(2) {
                match adaptive(inner, w[0], w[1], tol) {
                    Ok(v) => total += v.0,
                    Err(e) => err = Some(e),
                }
            }
            if let Some(e) = err {
                return Err(e);
            }
            if total.is_nan() {
                return Err(Error::NonConvergence("inner radial quadrature failed".into()));
            }
            Ok(total)
        }
        _ => Err(Error::InvalidArgument("sampler kind does not match the scaling mode".into())),
    }
}

/// Least-squares slope of `log |⟨t, f^λ⟩|` against `log λ`, negated.
pub fn estimate_sd(s: &Sampler, ctx: &ScalingContext, grid: &[f64], probe: &Probe) -> Result<f64> {
    let mut pts = Vec::new();
    for &l in grid {
        let v = scaled_pairing(s, ctx, probe, l)?;
        if v.is_finite() && v.abs() > 1e-280 {
            pts.push((l.ln(), v.abs().ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateRegression(format!(
            "only {} of {} pairings above the noise floor",
            pts.len(),
            grid.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateRegression("λ grid has a single distinct value".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(-sxy / sxx)
}

/// Geometric grid from `lo` to `hi` with `n` points.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n.max(2) - 1) as f64)).collect()
}
