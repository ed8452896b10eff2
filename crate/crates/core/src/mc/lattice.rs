//! Periodic space-time lattice for the linear equation `∂_t u = Δu + χ ξ_ε`.
//!
//! Time points are `t_n = n·dt`, `n = 0..nt`, spatial points
//! `x_i = (i − nx/2)·dx` on a periodic box. The scheme is explicit Euler:
//! `u_{n+1} = (I + dt Δ_h) u_n + dt χ_n s_n`, `u_0 = 0`. Sources at time
//! `t_n` are kept when `t_n < t_window`.

use crate::error::{Error, Result};
use crate::scaling::TestFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub d: u32,
    pub nt: usize,
    pub nx: usize,
    pub dt: f64,
    pub dx: f64,
    pub t_window: f64,
    pub eps: f64,
    pub seed: u64,
    pub samples: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            d: 1,
            nt: 64,
            nx: 64,
            dt: 0.125 * 0.125 / 2.0,
            dx: 0.125,
            t_window: 0.4,
            eps: 0.25,
            seed: 7,
            samples: 10_000,
        }
    }
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.d) {
            return Err(Error::InvalidArgument(format!("lattice dimension must be 1 or 2, got {}", self.d)));
        }
        if self.nt < 2 || self.nx < 3 {
            return Err(Error::InvalidArgument(format!("grid {}×{} is too small", self.nt, self.nx)));
        }
        if !(self.dt > 0.0 && self.dx > 0.0 && self.eps > 0.0 && self.t_window > 0.0) {
            return Err(Error::InvalidArgument("dt, dx, eps and t_window must be positive".into()));
        }
        if self.samples < 100 {
            return Err(Error::InvalidArgument(format!("at least 100 samples are required, got {}", self.samples)));
        }
        let limit = self.dx * self.dx / (2.0 * self.d as f64);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Stability { dt: self.dt, limit });
        }
        Ok(())
    }

    /// Number of spatial sites, `nx^d`.
    pub fn sites(&self) -> usize {
        self.nx.pow(self.d)
    }

    /// Volume of one space-time cell.
    pub fn cell(&self) -> f64 {
        self.dt * self.dx.powi(self.d as i32)
    }
}

/// A real field on the lattice, indexed `[n·sites + i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub nt: usize,
    pub sites: usize,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zeros(nt: usize, sites: usize) -> Self {
        Field { nt, sites, data: vec![0.0; nt * sites] }
    }

    pub fn constant(nt: usize, sites: usize, v: f64) -> Self {
        Field { nt, sites, data: vec![v; nt * sites] }
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        &self.data[n * self.sites..(n + 1) * self.sites]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[n * self.sites..(n + 1) * self.sites]
    }

    pub fn mul_assign(&mut self, other: &Field) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a *= b);
    }

    pub fn add_scaled(&mut self, c: f64, other: &Field) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += c * b);
    }

    pub fn powi(&self, k: i32) -> Field {
        Field { data: self.data.iter().map(|v| v.powi(k)).collect(), ..*self }
    }

    fn dot(&self, other: &Field) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}

/// Precomputed lattice operators for one configuration.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub cfg: LatticeConfig,
    /// Symmetric mollifier weights for offsets `−w..=w`, summing to one.
    weights: Vec<f64>,
    /// `χ_n`.
    window: Vec<bool>,
}

impl Lattice {
    pub fn new(cfg: LatticeConfig) -> Result<Self> {
        cfg.validate()?;
        let half = ((8.0 * cfg.eps / cfg.dx).ceil() as usize).min((cfg.nx - 1) / 2);
        let mut weights: Vec<f64> = (0..=2 * half)
            .map(|j| {
                let x = (j as f64 - half as f64) * cfg.dx;
                (-x * x / (2.0 * cfg.eps * cfg.eps)).exp()
            })
            .collect();
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        let window = (0..cfg.nt).map(|n| (n as f64) * cfg.dt < cfg.t_window).collect();
        Ok(Lattice { cfg, weights, window })
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.cfg.nt, self.cfg.sites())
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.cfg.dt
    }

    fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.cfg.nx / 2) as f64) * self.cfg.dx
    }

    /// Spatial coordinates of site `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let nx = self.cfg.nx;
        match self.cfg.d {
            1 => vec![self.coord(i)],
            _ => vec![self.coord(i / nx), self.coord(i % nx)],
        }
    }

    /// `f(t_n, x_i)` on every lattice point.
    pub fn sample(&self, f: &TestFunction) -> Result<Field> {
        if f.dim != self.cfg.d as usize + 1 {
            return Err(Error::InvalidArgument(format!(
                "function has dimension {}, lattice needs 1 + {}",
                f.dim, self.cfg.d
            )));
        }
        let mut out = self.zeros();
        let pts: Vec<Vec<f64>> = (0..self.cfg.sites()).map(|i| self.point(i)).collect();
        let mut y = vec![0.0; f.dim];
        for n in 0..self.cfg.nt {
            y[0] = self.time(n);
            let row = out.slice_mut(n);
            for (i, p) in pts.iter().enumerate() {
                y[1..].copy_from_slice(p);
                row[i] = f.eval(&y);
            }
        }
        Ok(out)
    }

    /// `Σ f g · dt dx^d`.
    pub fn pair(&self, f: &Field, g: &Field) -> f64 {
        self.cfg.cell() * f.dot(g)
    }

    /// I.i.d. centred Gaussians of variance `1/(dt dx^d)`, one per cell. The
    /// stream is selected by `sample`, so every sample is reproducible alone.
    pub fn sample_noise(&self, sample: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(sample);
        let sd = self.cfg.cell().powf(-0.5);
        let mut f = self.zeros();
        for v in f.data.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = sd * z;
        }
        f
    }

    fn convolve_1d(&self, src: &[f64], dst: &mut [f64], stride: usize, len: usize, offset: usize) {
        let half = (self.weights.len() / 2) as isize;
        let n = len as isize;
        for i in 0..len {
            let mut s = 0.0;
            for (j, w) in self.weights.iter().enumerate() {
                let k = (i as isize + j as isize - half).rem_euclid(n) as usize;
                s += w * src[offset + k * stride];
            }
            dst[offset + i * stride] = s;
        }
    }

    /// Spatial Gaussian mollification of one time slice.
    fn mollify_slice(&self, u: &[f64], out: &mut [f64]) {
        let nx = self.cfg.nx;
        match self.cfg.d {
            1 => self.convolve_1d(u, out, 1, nx, 0),
            _ => {
                let mut tmp = vec![0.0; u.len()];
                for r in 0..nx {
                    self.convolve_1d(u, &mut tmp, 1, nx, r * nx);
                }
                for c in 0..nx {
                    self.convolve_1d(&tmp, out, nx, nx, c);
                }
            }
        }
    }

    pub fn mollify(&self, f: &Field) -> Field {
        let mut out = self.zeros();
        for n in 0..self.cfg.nt {
            let (src, dst) = (f.slice(n), &mut out.data[n * f.sites..(n + 1) * f.sites]);
            self.mollify_slice(src, dst);
        }
        out
    }

    /// `u + dt Δ_h u`.
    fn step(&self, u: &[f64], out: &mut [f64]) {
        let nx = self.cfg.nx;
        let c = self.cfg.dt / (self.cfg.dx * self.cfg.dx);
        match self.cfg.d {
            1 => {
                for i in 0..nx {
                    let l = u[(i + nx - 1) % nx];
                    let r = u[(i + 1) % nx];
                    out[i] = u[i] + c * (l - 2.0 * u[i] + r);
                }
            }
            _ => {
                for a in 0..nx {
                    for b in 0..nx {
                        let i = a * nx + b;
                        let nb = u[((a + nx - 1) % nx) * nx + b]
                            + u[((a + 1) % nx) * nx + b]
                            + u[a * nx + (b + nx - 1) % nx]
                            + u[a * nx + (b + 1) % nx];
                        out[i] = u[i] + c * (nb - 4.0 * u[i]);
                    }
                }
            }
        }
    }

    /// The lattice `P_χ⊛`: solves the scheme with source `s` from zero data.
    pub fn propagate(&self, s: &Field) -> Field {
        let (nt, ns) = (self.cfg.nt, self.cfg.sites());
        let mut out = self.zeros();
        let mut next = vec![0.0; ns];
        for n in 0..nt - 1 {
            self.step(out.slice(n), &mut next);
            if self.window[n] {
                for (v, src) in next.iter_mut().zip(s.slice(n)) {
                    *v += self.cfg.dt * src;
                }
            }
            out.slice_mut(n + 1).copy_from_slice(&next);
        }
        out
    }

    /// Transpose of [`Lattice::propagate`] as a matrix.
    pub fn propagate_adjoint(&self, h: &Field) -> Field {
        let (nt, ns) = (self.cfg.nt, self.cfg.sites());
        let mut out = self.zeros();
        // r_m = h_{m+1} + A r_{m+1}, r_{nt−1} = 0; result_m = dt χ_m r_m.
        let mut r = vec![0.0; ns];
        let mut tmp = vec![0.0; ns];
        for m in (0..nt - 1).rev() {
            self.step(&r, &mut tmp);
            for (t, v) in tmp.iter_mut().zip(h.slice(m + 1)) {
                *t += v;
            }
            std::mem::swap(&mut r, &mut tmp);
            if self.window[m] {
                for (o, v) in out.slice_mut(m).iter_mut().zip(&r) {
                    *o = self.cfg.dt * v;
                }
            }
        }
        out
    }

    /// `φ̂ = P_χ⊛ ξ_ε + φ`.
    pub fn solve_linear(&self, noise: &Field, shift: Option<&Field>) -> Field {
        let mut u = self.propagate(&self.mollify(noise));
        if let Some(s) = shift {
            u.add_scaled(1.0, s);
        }
        u
    }

    /// `(Q_ε g)(z) = Σ_{z'} Q_ε(z, z') g(z') dt dx^d` for the covariance of the
    /// linear solution.
    pub fn covariance_apply(&self, g: &Field) -> Field {
        let a = self.propagate_adjoint(g);
        let b = self.mollify(&self.mollify(&a));
        self.propagate(&b)
    }

    /// `Q_ε(z, z)` as a function of the time index, from the discrete Fourier
    /// symbols of the scheme and the mollifier.
    pub fn diagonal(&self) -> Vec<f64> {
        let nx = self.cfg.nx;
        let half = (self.weights.len() / 2) as isize;
        let modes: Vec<(f64, f64)> = (0..nx)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / nx as f64;
                let mu = 4.0 / (self.cfg.dx * self.cfg.dx) * (th / 2.0).sin().powi(2);
                let m: f64 =
                    self.weights.iter().enumerate().map(|(j, w)| w * ((j as isize - half) as f64 * th).cos()).sum();
                (mu, m)
            })
            .collect();
        let symbols: Vec<(f64, f64)> = match self.cfg.d {
            1 => modes.iter().map(|&(mu, m)| (1.0 - self.cfg.dt * mu, m * m)).collect(),
            _ => modes
                .iter()
                .flat_map(|&(mu1, m1)| modes.iter().map(move |&(mu2, m2)| (mu1 + mu2, m1 * m2)))
                .map(|(mu, m)| (1.0 - self.cfg.dt * mu, m * m))
                .collect(),
        };
        let norm = self.cfg.dt / (self.cfg.dx.powi(self.cfg.d as i32) * symbols.len() as f64);
        let mut c = vec![0.0; symbols.len()];
        let mut out = vec![0.0; self.cfg.nt];
        for n in 0..self.cfg.nt {
            out[n] = norm * c.iter().sum::<f64>();
            for (ck, &(a, m2)) in c.iter_mut().zip(&symbols) {
                *ck = a * a * *ck + if self.window[n] { m2 } else { 0.0 };
            }
        }
        out
    }

    /// [`Lattice::diagonal`] spread over all sites.
    pub fn diagonal_field(&self) -> Field {
        let d = self.diagonal();
        let mut f = self.zeros();
        for (n, v) in d.iter().enumerate() {
            f.slice_mut(n).fill(*v);
        }
        f
    }
}
