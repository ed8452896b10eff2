//! Separable test functions with exact derivatives.
//!
//! A test function is a finite sum of products of one-dimensional factors.
//! Each factor is either `(y − c)^p e^{−q(y − c)²}` or the compact bump
//! `exp(−1/(1 − s²))` with `s` the affine image of `[lo, hi]` onto `[−1, 1]`.
//! Derivatives of every order are available in closed form, which is what the
//! Taylor subtraction and the adjoint operators need.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    Gauss { power: u32, center: f64, q: f64 },
    Bump { lo: f64, hi: f64 },
}

/// Polynomial coefficients, lowest degree first.
type Poly = Vec<f64>;

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_deriv(p: &[f64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn poly_add(a: &[f64], b: &[f64]) -> Poly {
    (0..a.len().max(b.len())).map(|i| a.get(i).unwrap_or(&0.0) + b.get(i).unwrap_or(&0.0)).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl Factor {
    pub fn gauss(power: u32, center: f64, q: f64) -> Self {
        Factor::Gauss { power, center, q }
    }

    pub fn bump(lo: f64, hi: f64) -> Self {
        Factor::Bump { lo, hi }
    }

    /// For a Gaussian factor, the polynomial `P_k` in `z = y − c` with
    /// `u^{(k)} = P_k(z) e^{−q z²}`.
    pub fn gauss_poly(power: u32, q: f64, k: u32) -> Poly {
        let mut p = vec![0.0; power as usize + 1];
        p[power as usize] = 1.0;
        for _ in 0..k {
            // (P e^{−qz²})' = (P' − 2qzP) e^{−qz²}
            let zp = poly_mul(&[0.0, -2.0 * q], &p);
            p = poly_add(&poly_deriv(&p), &zp);
        }
        p
    }

    pub fn deriv(&self, k: u32, y: f64) -> f64 {
        match *self {
            Factor::Gauss { power, center, q } => {
                let z = y - center;
                let e = (-q * z * z).exp();
                if e == 0.0 {
                    return 0.0;
                }
                poly_eval(&Self::gauss_poly(power, q, k), z) * e
            }
            Factor::Bump { lo, hi } => {
                let h = 0.5 * (hi - lo);
                let s = (y - (lo + h)) / h;
                if s.abs() >= 1.0 {
                    return 0.0;
                }
                let w = 1.0 - s * s;
                // h^{(k)}(s) = N_k(s) / w^{2k} · h(s), N_{k+1} = N_k' w² + 4k s w N_k − 2s N_k.
                let mut n: Poly = vec![1.0];
                for j in 0..k {
                    let w2 = [1.0, 0.0, -2.0, 0.0, 1.0];
                    let a = poly_mul(&poly_deriv(&n), &w2);
                    let b = poly_mul(&[0.0, 4.0 * j as f64, 0.0, -4.0 * j as f64], &n);
                    let c = poly_mul(&[0.0, -2.0], &n);
                    n = poly_add(&poly_add(&a, &b), &c);
                }
                let base = (-1.0 / w).exp();
                if base == 0.0 {
                    return 0.0;
                }
                poly_eval(&n, s) / w.powi(2 * k as i32) * base / h.powi(k as i32)
            }
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.deriv(0, y)
    }

    /// Interval outside of which the factor is below double precision.
    pub fn extent(&self) -> (f64, f64) {
        match *self {
            Factor::Gauss { power, center, q } => {
                let r = ((40.0 + power as f64 * 2.0) / q).sqrt();
                (center - r, center + r)
            }
            Factor::Bump { lo, hi } => (lo, hi),
        }
    }

    /// `u(y / s)` written as a factor of the same family, with the constant
    /// that multiplies it.
    pub fn dilated(&self, s: f64) -> (f64, Factor) {
        match *self {
            Factor::Gauss { power, center, q } => {
                (s.powi(-(power as i32)), Factor::Gauss { power, center: center * s, q: q / (s * s) })
            }
            Factor::Bump { lo, hi } => (1.0, Factor::Bump { lo: lo * s, hi: hi * s }),
        }
    }

    /// `∫ g_τ(y) u^{(k)}(y) dy` with `g_τ` the centred Gaussian of variance `2τ`
    /// (the one-dimensional heat kernel at diffusivity × time `τ`).
    /// Closed form for Gaussian factors.
    pub fn heat_smoothed(&self, k: u32, tau: f64) -> Result<f64> {
        let Factor::Gauss { power, center, q } = *self else {
            return Err(Error::InvalidArgument("heat smoothing needs a Gaussian factor".into()));
        };
        if tau <= 0.0 {
            return Ok(self.deriv(k, 0.0));
        }
        let s = 1.0 / (4.0 * tau);
        let p = s + q;
        // Exponent −s y² − q (y − c)² = −p (y − μ)² + (p μ² − q c²), μ = q c / p.
        let mu = q * center / p;
        let shift = p * mu * mu - q * center * center;
        let poly = Self::gauss_poly(power, q, k);
        // ∫ P(y − c) e^{−p(y−μ)²} dy with y − c = v + (μ − c).
        let delta = mu - center;
        let mut total = 0.0;
        for (i, &ci) in poly.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            let mut term = 0.0;
            let mut binom = 1.0;
            for j in 0..=i {
                if j % 2 == 0 {
                    let m = double_factorial(j as i64 - 1) / (2.0 * p).powi(j as i32 / 2) * (std::f64::consts::PI / p).sqrt();
                    term += binom * delta.powi((i - j) as i32) * m;
                }
                binom = binom * (i - j) as f64 / (j + 1) as f64;
            }
            total += ci * term;
        }
        let norm = (4.0 * std::f64::consts::PI * tau).sqrt();
        Ok(total * shift.exp() / norm)
    }
}

fn double_factorial(n: i64) -> f64 {
    let mut r = 1.0;
    let mut k = n;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

/// `Σ coeff · Π_i factor_i(y_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub dim: usize,
    pub terms: Vec<(f64, Vec<Factor>)>,
}

impl TestFunction {
    pub fn product(factors: Vec<Factor>) -> Self {
        TestFunction { dim: factors.len(), terms: vec![(1.0, factors)] }
    }

    /// Isotropic Gaussian `e^{−q|y|²}` times the monomial `y^powers`.
    pub fn gauss_monomial(powers: &[u32], q: f64) -> Self {
        Self::product(powers.iter().map(|&p| Factor::gauss(p, 0.0, q)).collect())
    }

    pub fn plus(mut self, coeff: f64, other: &TestFunction) -> Self {
        assert_eq!(self.dim, other.dim);
        self.terms.extend(other.terms.iter().map(|(c, f)| (c * coeff, f.clone())));
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.0 *= c);
        self
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|(c, fs)| c * fs.iter().zip(y).map(|(f, &x)| f.eval(x)).product::<f64>()).sum()
    }

    pub fn deriv(&self, alpha: &[u32], y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, fs)| c * fs.iter().zip(alpha).zip(y).map(|((f, &k), &x)| f.deriv(k, x)).product::<f64>())
            .sum()
    }

    pub fn deriv_at_origin(&self, alpha: &[u32]) -> f64 {
        self.deriv(alpha, &vec![0.0; self.dim])
    }

    /// Bounding box of the effective support.
    pub fn extent(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for (_, fs) in &self.terms {
            for (i, f) in fs.iter().enumerate() {
                let (lo, hi) = f.extent();
                b[i] = (b[i].0.min(lo), b[i].1.max(hi));
            }
        }
        b
    }

    /// `f^λ(y) = λ^{−Σw} f(y_0/λ^{w_0}, …)` with per-coordinate weights `w`
    /// (all ones for isotropic scaling, `(2, 1, …, 1)` for parabolic).
    pub fn dilated(&self, lambda: f64, weights: &[u32]) -> Self {
        let total: u32 = weights.iter().sum();
        let pre = lambda.powi(-(total as i32));
        let terms = self
            .terms
            .iter()
            .map(|(c, fs)| {
                let mut coeff = c * pre;
                let g = fs
                    .iter()
                    .zip(weights)
                    .map(|(f, &w)| {
                        let (k, h) = f.dilated(lambda.powi(w as i32));
                        coeff *= k;
                        h
                    })
                    .collect();
                (coeff, g)
            })
            .collect();
        TestFunction { dim: self.dim, terms }
    }
}
