use crate::config::FileConfig;
use crate::Format;
use phi3ren::contraction::{to_terms, ContractedTerm, DiagramSum};
use phi3ren::graphs::{csv_row, divergent_graphs, threshold, CSV_HEADER};
use phi3ren::kernels::{
    fit_extension_difference, heat_kernel_radial, heat_power, kl_representation, KernelSpec, PairingConfig,
};
use phi3ren::mc::{validate_covariance, validate_first_order, validate_two_point, McReport};
use phi3ren::rational::RatSer;
use phi3ren::scaling::{
    estimate_sd, geometric_grid, sd_parametrix, Factor, Mode, Probe, Sampler, ScalingContext, TestFunction,
};
use phi3ren::term::expand_solution;
use phi3ren::{Contractor, Error, LatticeConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Rendered command output and whether the command's own check passed.
pub struct Output {
    pub text: String,
    pub ok: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, ok: true }
    }
}

fn unsupported(cmd: &str, f: Format) -> anyhow::Error {
    Error::InvalidArgument(format!("{cmd} does not support --format {}", f.name())).into()
}

fn json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn rat_csv(c: &RatSer) -> String {
    if c.0.is_integer() {
        c.0.numer().to_string()
    } else {
        format!("{}/{}", c.0.numer(), c.0.denom())
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn expand(order: i64, format: Format) -> anyhow::Result<Output> {
    let series = expand_solution(order)?;
    match format {
        Format::Json => Ok(Output::ok(json(&series)?)),
        Format::Csv => {
            let mut s = String::from("order,coeff,term\n");
            for j in 0..=series.truncation {
                for (t, c) in series.order(j).iter() {
                    s.push_str(&format!("{j},{},{}\n", rat_csv(&RatSer(c.clone())), quote(&t.to_string())));
                }
            }
            Ok(Output::ok(s))
        }
        f => Err(unsupported("expand", f)),
    }
}

pub fn diagrams(d: u32, nmax: Option<usize>, format: Format) -> anyhow::Result<Output> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()).into());
    }
    let Some(th) = threshold(d) else {
        return Err(Error::NotSubcritical(d).into());
    };
    let reports = divergent_graphs(d, nmax.unwrap_or(th))?;
    let text = match format {
        Format::Csv => {
            let mut s = format!("{CSV_HEADER}\n");
            for r in &reports {
                s.push_str(&csv_row(r));
                s.push('\n');
            }
            s
        }
        Format::Json => json(&reports)?,
        Format::Dot => reports.iter().map(|r| r.graph.to_dot(&format!("{} rho={}", r.graph.key(), r.rho))).collect(),
    };
    Ok(Output::ok(text))
}

#[derive(Serialize)]
struct OrderTerms {
    order: usize,
    terms: Vec<ContractedTerm>,
}

fn sums_csv(rows: &[(usize, &DiagramSum)]) -> String {
    let mut s = String::from("order,coeff,diagram\n");
    for (k, sum) in rows {
        for t in to_terms(sum) {
            s.push_str(&format!("{k},{},{}\n", rat_csv(&t.coeff), quote(&t.diagram.to_string())));
        }
    }
    s
}

fn sums_dot(rows: &[(usize, &DiagramSum)]) -> String {
    let mut s = String::new();
    for (k, sum) in rows {
        for (i, (d, c)) in sum.iter().enumerate() {
            s.push_str(&d.to_dot(&format!("order {k} term {i} coeff {c}")));
        }
    }
    s
}

pub fn correlate(d: u32, order: i64, format: Format) -> anyhow::Result<Output> {
    let w = Contractor::new(d).two_point_correlation(order)?;
    let sums: Vec<DiagramSum> = (0..=w.truncation).map(|k| w.order(k)).collect();
    let rows: Vec<(usize, &DiagramSum)> = sums.iter().enumerate().collect();
    let text = match format {
        Format::Json => json(&w)?,
        Format::Csv => sums_csv(&rows),
        Format::Dot => sums_dot(&rows),
    };
    Ok(Output::ok(text))
}

pub fn renorm_eq(d: u32, order: i64, format: Format) -> anyhow::Result<Output> {
    let ops = Contractor::new(d).renormalized_equation(order)?;
    let rows: Vec<(usize, &DiagramSum)> = ops.iter().map(|(m, s)| (*m, s)).collect();
    let text = match format {
        Format::Json => {
            let v: Vec<OrderTerms> = ops.iter().map(|(m, s)| OrderTerms { order: *m, terms: to_terms(s) }).collect();
            json(&v)?
        }
        Format::Csv => sums_csv(&rows),
        Format::Dot => sums_dot(&rows),
    };
    Ok(Output::ok(text))
}

#[derive(Serialize)]
struct SdRow {
    d: u32,
    power: u32,
    analytic: f64,
    estimate: f64,
    abs_error: f64,
}

pub fn sd(d: u32, power: u32, cfg: &FileConfig, format: Format) -> anyhow::Result<Output> {
    if d == 0 || power == 0 {
        return Err(Error::InvalidArgument("d and power must be positive".into()).into());
    }
    let ctx = ScalingContext::parabolic(d);
    let analytic = power as f64 * sd_parametrix(&ScalingContext::parabolic_spatial(d)).as_f64();
    let grid = geometric_grid(
        cfg.sd_lambda_min.unwrap_or(0.05),
        cfg.sd_lambda_max.unwrap_or(1.0),
        cfg.sd_points.unwrap_or(6),
    );
    let kernel = move |t: f64, r: f64| heat_kernel_radial(t, r, d, 1.0).powi(power as i32);
    let estimate = estimate_sd(&Sampler::SpaceRadial(&kernel), &ctx, &grid, &Probe::off_origin(Mode::Parabolic))?;
    let row = SdRow { d, power, analytic, estimate, abs_error: (estimate - analytic).abs() };
    let text = match format {
        Format::Csv => format!(
            "d,power,analytic,estimate,abs_error\n{},{},{},{:.6},{:.3e}\n",
            row.d, row.power, row.analytic, row.estimate, row.abs_error
        ),
        Format::Json => json(&row)?,
        f => return Err(unsupported("sd", f)),
    };
    Ok(Output::ok(text))
}

/// The `(d, n)` pairs checked by `kernel --kl` when neither is given.
pub const KL_CATALOG: [(u32, u32); 5] = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)];

#[derive(Serialize)]
struct KlRow {
    d: u32,
    n: u32,
    a: f64,
    points: usize,
    max_rel_error: f64,
}

fn kl_row(spec: &KernelSpec, points: usize, seed: u64, tol: f64) -> anyhow::Result<KlRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let t = rng.random_range(0.05..3.0);
        let x: Vec<f64> = (0..spec.d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let direct = heat_power(spec, t, &x);
        let kl = kl_representation(spec, t, &x, tol)?;
        worst = worst.max((kl - direct).abs() / direct.abs().max(1e-300));
    }
    Ok(KlRow { d: spec.d, n: spec.n, a: spec.a, points, max_rel_error: worst })
}

pub fn kernel_kl(d: Option<u32>, n: Option<u32>, cfg: &FileConfig, format: Format) -> anyhow::Result<Output> {
    let pairs: Vec<(u32, u32)> = match (d, n) {
        (Some(d), Some(n)) => vec![(d, n)],
        (Some(d), None) => KL_CATALOG.iter().copied().filter(|p| p.0 == d).collect(),
        (None, Some(n)) => KL_CATALOG.iter().copied().filter(|p| p.1 == n).collect(),
        (None, None) => KL_CATALOG.to_vec(),
    };
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no (d, n) pair selected".into()).into());
    }
    let points = cfg.kl_points.unwrap_or(20);
    let tol = cfg.tol.unwrap_or(1e-12);
    let rows = pairs
        .iter()
        .map(|&(d, n)| {
            let spec = KernelSpec::with_kappa(d, n, cfg.a.unwrap_or(1.0), cfg.kappa.unwrap_or(1.0))?;
            kl_row(&spec, points, cfg.seed.unwrap_or(7), tol)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let text = match format {
        Format::Csv => {
            let mut s = String::from("d,n,a,points,max_rel_error\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{},{:.3e}\n", r.d, r.n, r.a, r.points, r.max_rel_error));
            }
            s
        }
        Format::Json => json(&rows)?,
        f => return Err(unsupported("kernel", f)),
    };
    Ok(Output::ok(text))
}

/// A deterministic family of Gaussian test functions on `ℝ × ℝ^d`.
pub fn fit_family(d: u32, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut v = vec![Factor::gauss(i as u32 % 2, 0.15 * i as f64 - 0.3, 0.8 + 0.1 * i as f64)];
            for _ in 0..d {
                v.push(Factor::gauss(rng.random_range(0..2), rng.random_range(-0.5..0.5), rng.random_range(0.6..1.6)));
            }
            TestFunction::product(v)
        })
        .collect()
}

#[derive(Serialize)]
struct FitReport {
    d: u32,
    n: u32,
    a: f64,
    b: f64,
    zeta: Vec<f64>,
    residual: f64,
}

pub fn kernel_fit(d: u32, n: u32, cfg: &FileConfig, format: Format) -> anyhow::Result<Output> {
    let kappa = cfg.kappa.unwrap_or(1.0);
    let (a, b) = (cfg.a.unwrap_or(1.0), cfg.b.unwrap_or(2.0));
    let sa = KernelSpec::with_kappa(d, n, a, kappa)?;
    let sb = KernelSpec::with_kappa(d, n, b, kappa)?;
    let fs = fit_family(d, cfg.fit_functions.unwrap_or(6), cfg.seed.unwrap_or(7));
    let pc = PairingConfig { tol: cfg.tol.unwrap_or(1e-10), ..Default::default() };
    let fit = fit_extension_difference(&sa, &sb, &fs, &pc)?;
    let report = FitReport { d, n, a, b, zeta: fit.zeta, residual: fit.residual };
    let text = match format {
        Format::Csv => {
            let mut s = String::from("q,zeta,residual\n");
            for (q, z) in report.zeta.iter().enumerate() {
                s.push_str(&format!("{q},{z:.10e},{:.3e}\n", report.residual));
            }
            s
        }
        Format::Json => json(&report)?,
        f => return Err(unsupported("kernel", f)),
    };
    Ok(Output::ok(text))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Validation {
    Covariance,
    FirstOrder,
    TwoPoint,
}

pub fn lattice_config(cfg: &FileConfig) -> LatticeConfig {
    let base = LatticeConfig::default();
    let dx = cfg.dx.unwrap_or(base.dx);
    LatticeConfig {
        d: 1,
        nt: cfg.nt.unwrap_or(base.nt),
        nx: cfg.nx.unwrap_or(base.nx),
        dx,
        // Keep the default ratio dt = dx²/2 when only dx is changed.
        dt: cfg.dt.unwrap_or(if cfg.dx.is_some() { dx * dx / 2.0 } else { base.dt }),
        t_window: cfg.t_window.unwrap_or(base.t_window),
        eps: cfg.eps.unwrap_or(base.eps),
        seed: cfg.seed.unwrap_or(base.seed),
        samples: cfg.samples.unwrap_or(base.samples),
    }
}

/// Test functions used by `mc`: two time-bumped Gaussians and a smooth shift.
pub fn mc_functions() -> (TestFunction, TestFunction, TestFunction) {
    let f1 = TestFunction::product(vec![Factor::bump(0.15, 0.45), Factor::gauss(0, 0.0, 4.0)]);
    let f2 = TestFunction::product(vec![Factor::bump(0.2, 0.48), Factor::gauss(0, 0.4, 4.0)]);
    let shift = TestFunction::product(vec![Factor::gauss(0, 0.2, 2.0), Factor::gauss(0, 0.1, 1.0)]).scaled(0.8);
    (f1, f2, shift)
}

/// Standard errors within which every comparison must fall.
pub const MC_TOLERANCE: f64 = 3.0;

pub fn mc(kind: Validation, cfg: &FileConfig, format: Format) -> anyhow::Result<Output> {
    let lc = lattice_config(cfg);
    lc.validate()?;
    let (f1, f2, shift) = mc_functions();
    let phi = if cfg.shift.unwrap_or(true) { Some(&shift) } else { None };
    let lambda = cfg.lambda.unwrap_or(0.1);
    let report: McReport = match kind {
        Validation::Covariance => validate_covariance(&lc, phi, &f1, &f2)?,
        Validation::FirstOrder => validate_first_order(&lc, phi, lambda, &f1)?,
        Validation::TwoPoint => validate_two_point(&lc, phi, lambda, &f1, &f2)?,
    };
    let text = match format {
        Format::Csv => report.csv(),
        Format::Json => json(&report)?,
        f => return Err(unsupported("mc", f)),
    };
    Ok(Output { text, ok: report.within(MC_TOLERANCE) })
}
