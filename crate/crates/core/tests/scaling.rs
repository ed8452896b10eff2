use nalgebra::{DMatrix, DVector};
use phi3ren::kernels::heat_kernel_radial;
use phi3ren::scaling::{
    cutoff, estimate_sd, extend_pairing, geometric_grid, ExtensionConfig, Factor, Mode, Probe, Sampler,
    ScalingContext, TestFunction,
};
use proptest::prelude::*;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Composite three-point Gauss rule; never samples the endpoints.
fn gauss3(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let x = (0.6f64).sqrt();
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for i in 0..panels {
        let m = a + (i as f64 + 0.5) * h;
        let r = 0.5 * h;
        s += r * (5.0 / 9.0 * f(m - r * x) + 8.0 / 9.0 * f(m) + 5.0 / 9.0 * f(m + r * x));
    }
    s
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

#[test]
fn integrable_parabolic_kernel_needs_no_subtraction() {
    // p(t, x)² on ℝ × ℝ is locally integrable, so the extension is the plain integral.
    let kernel = |y: &[f64]| heat_kernel_radial(y[0], y[1].abs(), 1, 1.0).powi(2);
    let f = TestFunction::product(vec![Factor::gauss(1, 0.3, 1.0), Factor::gauss(0, 0.2, 1.5)]);
    let got = extend_pairing(&kernel, -1, &f, &ScalingContext::parabolic(1), &ExtensionConfig::default()).unwrap();

    // t = s², x = s·u: dt dx p² = 2 s² ds du (4π s²)^{-1} e^{-u²/2}.
    let oracle = gauss3(
        |s| {
            let inner = gauss3(|u| (-u * u / 2.0).exp() * f.eval(&[s * s, s * u]), -12.0, 12.0, 400);
            2.0 * inner / (4.0 * PI)
        },
        0.0,
        3.0,
        600,
    );
    assert!(rel(got, oracle) < 1e-6, "{got} vs {oracle}");
}

#[test]
fn log_divergent_parabolic_kernel() {
    // p³ on ℝ × ℝ with ρ = 0: only f(0) is subtracted, with the cutoff of the
    // parabolic norm (t² + x⁴)^{1/4}.
    let cfg = ExtensionConfig::default();
    let kernel = |y: &[f64]| heat_kernel_radial(y[0], y[1].abs(), 1, 1.0).powi(3);
    let f = TestFunction::product(vec![Factor::gauss(0, 0.25, 1.0), Factor::gauss(0, -0.3, 1.2)]);
    let got = extend_pairing(&kernel, 0, &f, &ScalingContext::parabolic(1), &cfg).unwrap();

    let f0 = f.eval(&[0.0, 0.0]);
    // t = s², x = s·u: dt dx p³ = 2 s² ds du (4π s²)^{-3/2} e^{-3u²/4}.
    let oracle = gauss3(
        |s| {
            let inner = gauss3(
                |u| {
                    let g = cutoff(s * (1.0 + u.powi(4)).powf(0.25), cfg.bump_radius);
                    (-0.75 * u * u).exp() * (f.eval(&[s * s, s * u]) - f0 * g)
                },
                -14.0,
                14.0,
                600,
            );
            2.0 * inner / ((4.0 * PI).powf(1.5) * s)
        },
        0.0,
        4.0,
        1500,
    );
    assert!(rel(got, oracle) < 1e-6, "{got} vs {oracle}");
}

#[test]
fn flat_test_function_pairs_directly() {
    // |y|^{-3} on ℝ² against y₁² e^{-|y|²}: π ∫ e^{-r²} dr = π^{3/2}/2.
    let kernel = |y: &[f64]| (y[0] * y[0] + y[1] * y[1]).powf(-1.5);
    let f = TestFunction::gauss_monomial(&[2, 0], 1.0);
    let got = extend_pairing(&kernel, 1, &f, &ScalingContext::elliptic(2), &ExtensionConfig::default()).unwrap();
    let exact = PI.powf(1.5) / 2.0;
    assert!(rel(got, exact) < 1e-7, "{got} vs {exact}");
}

#[test]
fn subtracted_pairing_matches_polar_quadrature() {
    let cfg = ExtensionConfig::default();
    let kernel = |y: &[f64]| (y[0] * y[0] + y[1] * y[1]).powf(-1.5);
    let f = TestFunction::product(vec![Factor::gauss(0, 0.4, 1.0), Factor::gauss(1, -0.3, 0.8)]);
    let got = extend_pairing(&kernel, 1, &f, &ScalingContext::elliptic(2), &cfg).unwrap();

    let f0 = f.eval(&[0.0, 0.0]);
    let g = [f.deriv(&[1, 0], &[0.0, 0.0]), f.deriv(&[0, 1], &[0.0, 0.0])];
    let n_theta = 64;
    let oracle = gauss3(
        |r| {
            let mut s = 0.0;
            for j in 0..n_theta {
                let th = 2.0 * PI * j as f64 / n_theta as f64;
                let y = [r * th.cos(), r * th.sin()];
                let taylor = (f0 + g[0] * y[0] + g[1] * y[1]) * cutoff(r, cfg.bump_radius);
                s += f.eval(&y) - taylor;
            }
            s * 2.0 * PI / n_theta as f64 * r.powi(-2)
        },
        0.0,
        9.0,
        3000,
    );
    assert!(rel(got, oracle) < 1e-6, "{got} vs {oracle}");
}

#[test]
fn log_divergent_radial_kernel() {
    // |y|^{-d} against e^{-|y|²} at ρ = 0 reduces to ω_d ∫ (e^{-r²} − g(r)) dr / r.
    let cfg = ExtensionConfig::default();
    for d in 1..=3u32 {
        let kernel = move |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().powf(-(d as f64) / 2.0);
        let f = TestFunction::gauss_monomial(&vec![0; d as usize], 1.0);
        let got = extend_pairing(&kernel, 0, &f, &ScalingContext::elliptic(d), &cfg).unwrap();
        let oracle = sphere_area(d)
            * gauss3(|r| ((-r * r).exp() - cutoff(r, cfg.bump_radius)) / r, 0.0, 10.0, 20000);
        assert!((got - oracle).abs() < 1e-6 * oracle.abs().max(1.0), "d={d}: {got} vs {oracle}");
    }
}

#[test]
fn extension_is_linear() {
    let cfg = ExtensionConfig::default();
    let ctx = ScalingContext::elliptic(3);
    let kernel = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().powf(-1.75);
    let f = TestFunction::product(vec![Factor::gauss(0, 0.2, 1.0), Factor::gauss(1, 0.3, 1.2), Factor::gauss(0, -0.1, 0.9)]);
    let g = TestFunction::product(vec![Factor::gauss(2, 0.1, 1.5), Factor::gauss(0, 0.0, 1.0), Factor::gauss(1, -0.4, 1.1)]);
    let h = f.clone().plus(-2.5, &g);
    let e = |u: &TestFunction| extend_pairing(&kernel, 0, u, &ctx, &cfg).unwrap();
    let (a, b, c) = (e(&f), e(&g), e(&h));
    assert!(a.abs() > 1e-3 && b.abs() > 1e-3, "{a} {b}");
    assert!((c - (a - 2.5 * b)).abs() < 1e-7 * (a.abs() + b.abs()), "{c} vs {}", a - 2.5 * b);
}

#[test]
fn cutoff_change_is_a_local_term() {
    // Changing the cutoff radius shifts the extension by Σ_{|α| ≤ ρ} c_α ∂^α f(0).
    let ctx = ScalingContext::elliptic(2);
    let kernel = |y: &[f64]| (y[0] * y[0] + y[1] * y[1]).powf(-1.5);
    let a = ExtensionConfig::default();
    let b = ExtensionConfig { bump_radius: 1.7, ..a };
    let fs: Vec<TestFunction> = [(0.0, 0.0, 1.0), (0.5, 0.1, 1.0), (-0.3, 0.4, 0.7), (0.2, -0.6, 1.3), (0.7, 0.7, 0.9), (-0.5, -0.2, 1.1)]
        .iter()
        .map(|&(c0, c1, q)| TestFunction::product(vec![Factor::gauss(0, c0, q), Factor::gauss(0, c1, q)]))
        .collect();
    let idx: [[u32; 2]; 3] = [[0, 0], [1, 0], [0, 1]];
    let m = DMatrix::from_fn(fs.len(), 3, |i, j| fs[i].deriv_at_origin(&idx[j]));
    let y = DVector::from_iterator(
        fs.len(),
        fs.iter().map(|f| extend_pairing(&kernel, 1, f, &ctx, &b).unwrap() - extend_pairing(&kernel, 1, f, &ctx, &a).unwrap()),
    );
    let c = m.clone().svd(true, true).solve(&y, 1e-14).unwrap();
    let resid = (&m * &c - &y).amax();
    assert!(resid < 1e-6 * y.amax(), "residual {resid}, diffs {y}");
    // By symmetry the odd coefficients vanish.
    assert!(c[1].abs() < 1e-6 && c[2].abs() < 1e-6, "{c}");
    // The constant term is ω ∫ (g_a − g_b)/r³ · r dr.
    let c0 = 2.0 * PI * gauss3(|r| (cutoff(r, 1.0) - cutoff(r, 1.7)) / (r * r), 0.4, 1.8, 4000);
    assert!(rel(c[0], c0) < 1e-6, "{} vs {c0}", c[0]);
}

#[test]
fn heat_kernel_powers_scale_parabolically() {
    let probe = Probe::off_origin(Mode::Parabolic);
    let grid = geometric_grid(0.05, 1.0, 6);
    for d in 1..=3u32 {
        let ctx = ScalingContext::parabolic(d);
        for k in 1..=3i32 {
            let kernel = move |t: f64, r: f64| heat_kernel_radial(t, r, d, 1.0).powi(k);
            let sd = estimate_sd(&Sampler::SpaceRadial(&kernel), &ctx, &grid, &probe).unwrap();
            assert!((sd - (k * d as i32) as f64).abs() < 0.15, "d={d} k={k}: {sd}");
        }
    }
}

#[test]
fn mollified_delta_scales_like_delta() {
    let eps = 0.01;
    for d in 1..=3u32 {
        let ctx = ScalingContext::elliptic(d);
        let kernel = move |r: f64| (2.0 * PI * eps * eps).powf(-(d as f64) / 2.0) * (-r * r / (2.0 * eps * eps)).exp();
        let sd = estimate_sd(&Sampler::Radial(&kernel), &ctx, &geometric_grid(0.2, 2.0, 5), &Probe::centred()).unwrap();
        assert!((sd - d as f64).abs() < 0.1, "d={d}: {sd}");
    }
}

#[test]
fn smooth_kernel_has_nonpositive_degree() {
    let ctx = ScalingContext::parabolic(2);
    let kernel = |t: f64, r: f64| 1.0 + t + r * r;
    let probe = Probe { time_window: None, vanish: 0, width: 1.0 };
    let sd = estimate_sd(&Sampler::SpaceRadial(&kernel), &ctx, &geometric_grid(1e-3, 0.1, 5), &probe).unwrap();
    assert!(sd <= 1e-3, "{sd}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_law_degree_recovered(a in 0.1f64..5.0, d in 1u32..=3) {
        let k = move |r: f64| r.powf(-a);
        let ctx = ScalingContext::elliptic(d);
        let sd = estimate_sd(&Sampler::Radial(&k), &ctx, &geometric_grid(0.01, 1.0, 4), &Probe::off_origin(Mode::Elliptic)).unwrap();
        prop_assert!((sd - a).abs() < 1e-6, "a={} sd={}", a, sd);
    }
}
