//! Powers of the heat kernel: spectral representation over massive kernels
//! and the extensions `_a p^{n+1}` obtained by pulling `(H + a)^ℓ` out of the
//! damped spectral integral.

use super::heat::{heat_kernel, massive_heat_kernel};
use crate::error::{Error, Result};
use crate::quad::{adaptive, tanh_sinh, Tolerance};
use crate::scaling::TestFunction;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub d: u32,
    /// The kernel power is `n + 1`.
    pub n: u32,
    pub a: f64,
    pub kappa: f64,
    pub ell: u32,
}

impl KernelSpec {
    pub fn new(d: u32, n: u32, a: f64) -> Result<Self> {
        Self::with_kappa(d, n, a, 1.0)
    }

    pub fn with_kappa(d: u32, n: u32, a: f64, kappa: f64) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidArgument("d and n must be positive".into()));
        }
        if !(a > 0.0) || !(kappa > 0.0) {
            return Err(Error::InvalidArgument(format!("a and kappa must be positive, got a = {a}, kappa = {kappa}")));
        }
        Ok(KernelSpec { d, n, a, kappa, ell: n * d / 2 })
    }

    /// Exponent of the spectral weight `z^{α−1}`, `α = nd/2`.
    pub fn alpha(&self) -> f64 {
        (self.n * self.d) as f64 / 2.0
    }

    /// Diffusivity of the massive kernels, `κ/(n + 1)`.
    pub fn kappa_prime(&self) -> f64 {
        self.kappa / (self.n + 1) as f64
    }

    /// `c_{n,d} = (4πκ)^{−nd/2} (n+1)^{−d/2} / Γ(nd/2)`.
    pub fn prefactor(&self) -> f64 {
        (4.0 * PI * self.kappa).powf(-self.alpha()) * ((self.n + 1) as f64).powf(-(self.d as f64) / 2.0)
            / gamma(self.alpha())
    }

    fn check_dim(&self, f: &TestFunction) -> Result<()> {
        if f.dim != self.d as usize + 1 {
            return Err(Error::InvalidArgument(format!(
                "test function has dimension {}, expected 1 + {}",
                f.dim, self.d
            )));
        }
        Ok(())
    }
}

/// `p(t, x)^{n+1}` evaluated directly.
pub fn heat_power(spec: &KernelSpec, t: f64, x: &[f64]) -> f64 {
    heat_kernel(t, x, spec.kappa).powi(spec.n as i32 + 1)
}

/// The spectral integral `c_{n,d} ∫_0^∞ z^{nd/2−1} p_{κ',z}(t, x) dz`, by
/// tanh–sinh quadrature after `z = s·u/(1 − u)` with `s = 1/t`.
pub fn kl_representation(spec: &KernelSpec, t: f64, x: &[f64], tol: f64) -> Result<f64> {
    if x.len() != spec.d as usize {
        return Err(Error::InvalidArgument("point dimension does not match d".into()));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let s = 1.0 / t;
    let alpha = spec.alpha();
    let kp = spec.kappa_prime();
    let v = tanh_sinh(
        |_, u, w| {
            let z = s * u / w;
            let jac = s / (w * w);
            z.powf(alpha - 1.0) * massive_heat_kernel(t, x, kp, z) * jac
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(spec.prefactor() * v)
}

/// Terms `(c, α)` of `(∂_t + κ'Δ + a)^q` as `Σ c ∂^α` on `ℝ × ℝ^d`.
pub fn adjoint_operator(spec: &KernelSpec, q: u32) -> Vec<(f64, Vec<u32>)> {
    let d = spec.d as usize;
    let kp = spec.kappa_prime();
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let mut out: Vec<(f64, Vec<u32>)> = Vec::new();
    for i in 0..=q {
        for j in 0..=q - i {
            let k = q - i - j;
            let multi = fact(q) / (fact(i) * fact(j) * fact(k)) * kp.powi(j as i32) * spec.a.powi(k as i32);
            // Δ^j = Σ_{|β| = j} j!/β! ∂^{2β}
            let mut betas = Vec::new();
            fn comps(left: u32, parts: usize, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
                if parts == 1 {
                    acc.push(left);
                    out.push(acc.clone());
                    acc.pop();
                    return;
                }
                for b in 0..=left {
                    acc.push(b);
                    comps(left - b, parts - 1, acc, out);
                    acc.pop();
                }
            }
            comps(j, d, &mut Vec::new(), &mut betas);
            for b in betas {
                let c = fact(j) / b.iter().map(|&x| fact(x)).product::<f64>();
                let mut alpha = vec![i];
                alpha.extend(b.iter().map(|&x| 2 * x));
                match out.iter_mut().find(|e| e.1 == alpha) {
                    Some(e) => e.0 += multi * c,
                    None => out.push((multi * c, alpha)),
                }
            }
        }
    }
    out
}

/// `∫ p_{κ'}(t, x) [(∂_t + κ'Δ + a)^ℓ f](t, x) dx`, with the spatial integral
/// in closed form (the spatial factors of `f` must be Gaussian).
fn smoothed_source(spec: &KernelSpec, ops: &[(f64, Vec<u32>)], f: &TestFunction, t: f64) -> Result<f64> {
    let tau = spec.kappa_prime() * t;
    let mut total = 0.0;
    for (c, alpha) in ops {
        for (cf, factors) in &f.terms {
            let mut v = c * cf * factors[0].deriv(alpha[0], t);
            if v == 0.0 {
                continue;
            }
            for (fac, &k) in factors[1..].iter().zip(&alpha[1..]) {
                v *= fac.heat_smoothed(k, tau)?;
            }
            total += v;
        }
    }
    Ok(total)
}

/// Which change of variables maps the spectral parameter onto `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Substitution {
    /// `z = a·u/(1 − u)`
    Rational,
    /// `z = a·(u/(1 − u))²`
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairingConfig {
    pub tol: f64,
    pub substitution: Substitution,
}

impl Default for PairingConfig {
    fn default() -> Self {
        PairingConfig { tol: 1e-10, substitution: Substitution::Rational }
    }
}

/// `⟨_a p^{n+1}, f⟩ = c ∫_0^∞ dz z^{α−1}(z+a)^{−ℓ} ∫_0^∞ dt e^{−zt} ∫ dx p_{κ'}(t,x) [(∂_t + κ'Δ + a)^ℓ f](t,x)`.
pub fn extended_power_pairing(spec: &KernelSpec, f: &TestFunction, cfg: &PairingConfig) -> Result<f64> {
    spec.check_dim(f)?;
    let ops = adjoint_operator(spec, spec.ell);
    let (tlo, thi) = f.extent()[0];
    let lo = tlo.max(0.0);
    if thi <= lo {
        return Ok(0.0);
    }
    let h = |t: f64| smoothed_source(spec, &ops, f, t).unwrap_or(f64::NAN);
    let tol = Tolerance { abs: 1e-300, rel: cfg.tol * 1e-2, max_intervals: 4000 };
    let inner = |z: f64| -> f64 {
        // e^{−zt} lives on a scale 1/z near the lower end.
        let top = if z > 0.0 { thi.min(lo + 60.0 / z) } else { thi };
        let mut cuts = vec![lo];
        for k in [1.0, 8.0] {
            let c = lo + k / z.max(1e-300);
            if c < top {
                cuts.push(c);
            }
        }
        cuts.push(top);
        cuts.windows(2)
            .map(|w| adaptive(|t| (-z * t).exp() * h(t), w[0], w[1], tol).map(|v| v.0).unwrap_or(f64::NAN))
            .sum()
    };
    let alpha = spec.alpha();
    let (a, ell) = (spec.a, spec.ell as i32);
    let weight = |z: f64| z.powf(alpha - 1.0) * (z + a).powi(-ell);
    let v = match cfg.substitution {
        Substitution::Rational => tanh_sinh(
            |_, u, w| {
                let z = a * u / w;
                weight(z) * inner(z) * a / (w * w)
            },
            0.0,
            1.0,
            cfg.tol,
        )?,
        Substitution::Quadratic => tanh_sinh(
            |_, u, w| {
                let r = u / w;
                let z = a * r * r;
                weight(z) * inner(z) * 2.0 * a * r / (w * w)
            },
            0.0,
            1.0,
            cfg.tol,
        )?,
    };
    if !v.is_finite() {
        return Err(Error::NonConvergence("inner time quadrature failed".into()));
    }
    Ok(spec.prefactor() * v)
}

/// `⟨_b p^{n+1}, f⟩ − ⟨_a p^{n+1}, f⟩` for two specs sharing `(d, n, κ)`.
pub fn extension_difference(a: &KernelSpec, b: &KernelSpec, f: &TestFunction, cfg: &PairingConfig) -> Result<f64> {
    if (a.d, a.n, a.kappa) != (b.d, b.n, b.kappa) {
        return Err(Error::InvalidArgument("extension difference needs equal d, n and kappa".into()));
    }
    if a.a == b.a {
        return Ok(0.0);
    }
    Ok(extended_power_pairing(b, f, cfg)? - extended_power_pairing(a, f, cfg)?)
}

/// `⟨(H + a)^q δ, f⟩ = [(∂_t + κ'Δ + a)^q f](0, 0)` for `q < ℓ`.
pub fn difference_basis(spec: &KernelSpec, f: &TestFunction) -> Vec<f64> {
    (0..spec.ell)
        .map(|q| adjoint_operator(spec, q).iter().map(|(c, al)| c * f.deriv_at_origin(al)).sum())
        .collect()
}

/// `∫ p^{n+1} f` for test functions vanishing near `t = 0`, spatial integral
/// in closed form: `p^{n+1} = (4πκt)^{−nd/2} (n+1)^{−d/2} p_{κ'}`.
pub fn plain_power_pairing(spec: &KernelSpec, f: &TestFunction, tol: f64) -> Result<f64> {
    spec.check_dim(f)?;
    let (tlo, thi) = f.extent()[0];
    if tlo <= 0.0 {
        return Err(Error::InvalidArgument("plain pairing needs a test function supported in t > 0".into()));
    }
    let ops = vec![(1.0, vec![0; f.dim])];
    let pre = ((spec.n + 1) as f64).powf(-(spec.d as f64) / 2.0);
    let g = |t: f64| {
        (4.0 * PI * spec.kappa * t).powf(-spec.alpha()) * pre * smoothed_source(spec, &ops, f, t).unwrap_or(f64::NAN)
    };
    let v = adaptive(g, tlo, thi, Tolerance { abs: 1e-300, rel: tol, max_intervals: 4000 })?.0;
    if !v.is_finite() {
        return Err(Error::NonConvergence("plain pairing".into()));
    }
    Ok(v)
}

/// Least-squares fit of extension differences onto the basis
/// `{(H + a)^q δ : q < ℓ}` over a family of test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceFit {
    pub zeta: Vec<f64>,
    pub differences: Vec<f64>,
    /// Largest absolute residual, relative to the largest difference.
    pub residual: f64,
}

pub fn fit_extension_difference(
    a: &KernelSpec,
    b: &KernelSpec,
    fs: &[TestFunction],
    cfg: &PairingConfig,
) -> Result<DifferenceFit> {
    let k = a.ell as usize;
    if fs.len() < k {
        return Err(Error::InvalidArgument(format!("need at least {k} test functions, got {}", fs.len())));
    }
    let diffs = fs.iter().map(|f| extension_difference(a, b, f, cfg)).collect::<Result<Vec<f64>>>()?;
    let rows: Vec<Vec<f64>> = fs.iter().map(|f| difference_basis(a, f)).collect();
    let m = nalgebra::DMatrix::from_fn(fs.len(), k, |i, j| rows[i][j]);
    let y = nalgebra::DVector::from_vec(diffs.clone());
    let zeta = if k == 0 {
        nalgebra::DVector::zeros(0)
    } else {
        m.clone()
            .svd(true, true)
            .solve(&y, 1e-14)
            .map_err(|e| Error::DegenerateRegression(e.to_string()))?
    };
    let fitted = &m * &zeta;
    let scale = diffs.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let residual = (0..fs.len()).map(|i| (y[i] - fitted[i]).abs()).fold(0.0, f64::max) / scale;
    Ok(DifferenceFit { zeta: zeta.iter().copied().collect(), differences: diffs, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert_eq!(KernelSpec::new(2, 2, 1.0).unwrap().ell, 2);
        assert_eq!(KernelSpec::new(3, 1, 1.0).unwrap().ell, 1);
        assert_eq!(KernelSpec::new(1, 1, 1.0).unwrap().ell, 0);
        assert!(KernelSpec::new(2, 1, 0.0).is_err());
    }

    #[test]
    fn operator_expansion() {
        // (∂_t + κ'Δ + a)¹ in d = 2 with κ' = 1/2: ∂_t + ½∂²_x + ½∂²_y + a.
        let spec = KernelSpec::new(2, 1, 3.0).unwrap();
        let mut ops = adjoint_operator(&spec, 1);
        ops.sort_by(|a, b| a.1.cmp(&b.1));
        assert_eq!(
            ops,
            vec![(3.0, vec![0, 0, 0]), (0.5, vec![0, 0, 2]), (0.5, vec![0, 2, 0]), (1.0, vec![1, 0, 0])]
        );
        let total: f64 = adjoint_operator(&spec, 2).iter().map(|o| o.0).sum();
        // Sum of coefficients is (1 + κ'·d + a)^q.
        assert!((total - 25.0).abs() < 1e-12);
    }
}
