//! Quadrature rules: Gauss–Legendre, adaptive Gauss–Kronrod (7/15) and
//! tanh–sinh for endpoint singularities.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed Gauss–Legendre rule with cached nodes.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(|(x, w)| (c + h * x, w * h)).collect()
    }

    /// Composite rule over `panels` equal subintervals.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        (0..panels).flat_map(|k| self.mapped(a + k as f64 * h, a + (k + 1) as f64 * h)).collect()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10, max_intervals: 2000 }
    }
}

struct Cell {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss–Kronrod 7/15 on a finite interval.
/// Returns the estimate and its error bound.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<(f64, f64)> {
    let f: &dyn Fn(f64) -> f64 = &f;
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Cell { err: e, a, b, val: v });
    let (mut total, mut err) = (v, e);
    let mut count = 1;
    while err > tol.abs.max(tol.rel * total.abs()) {
        if count >= tol.max_intervals {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:e} after {count} intervals"
            )));
        }
        let c = heap.pop().unwrap();
        let m = 0.5 * (c.a + c.b);
        let (v1, e1) = gk15(f, c.a, m);
        let (v2, e2) = gk15(f, m, c.b);
        total += v1 + v2 - c.val;
        err += e1 + e2 - c.err;
        heap.push(Cell { err: e1, a: c.a, b: m, val: v1 });
        heap.push(Cell { err: e2, a: m, b: c.b, val: v2 });
        count += 1;
    }
    // Resum to shed accumulated rounding in the running totals.
    let total = heap.iter().map(|c| c.val).sum();
    let err = heap.iter().map(|c| c.err).sum();
    Ok((total, err))
}

/// Adaptive integral over `[a, ∞)` via `x = a + u / (1 − u)`.
pub fn adaptive_semi_infinite(f: impl Fn(f64) -> f64, a: f64, tol: Tolerance) -> Result<(f64, f64)> {
    adaptive(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - u;
            f(a + u / s) / (s * s)
        },
        0.0,
        1.0,
        tol,
    )
}

/// Tanh–sinh quadrature on `[a, b]`, robust to integrable endpoint singularities.
/// `f` receives the abscissa and its distances to `a` and `b`, so singular
/// factors can be evaluated without cancellation.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let ch = s.cosh();
        // Distance of the node from the nearer endpoint, in units of `half`.
        let dist = 1.0 / (s.abs().exp() * ch);
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        if dist * half == 0.0 || !w.is_finite() {
            return 0.0;
        }
        let (x, da, db) = if t < 0.0 {
            (a + half * dist, half * dist, 2.0 * half - half * dist)
        } else {
            (b - half * dist, 2.0 * half - half * dist, half * dist)
        };
        let v = f(x, da, db) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let est = sum * h * half;
        if (est - prev).abs() <= tol * est.abs().max(1e-300) {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::NonConvergence(format!("tanh-sinh on [{a}, {b}] did not reach {tol:e}")))
}
