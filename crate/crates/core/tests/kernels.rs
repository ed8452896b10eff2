use phi3ren::kernels::{
    difference_basis, extended_power_pairing, extension_difference, fit_extension_difference, heat_kernel, heat_power,
    kl_representation, plain_power_pairing, q_epsilon, torus_kernel, KernelSpec, PairingConfig, Substitution,
};
use phi3ren::scaling::{Factor, TestFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

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

fn spatial_gauss(d: usize, seed: u64) -> Vec<Factor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| Factor::gauss(rng.random_range(0..2), rng.random_range(-0.5..0.5), rng.random_range(0.6..1.6))).collect()
}

fn with_time(time: Factor, space: Vec<Factor>) -> TestFunction {
    let mut v = vec![time];
    v.extend(space);
    TestFunction::product(v)
}

#[test]
fn spectral_representation_reproduces_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (d, n) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)] {
        let spec = KernelSpec::new(d, n, 1.0).unwrap();
        for _ in 0..20 {
            let t = rng.random_range(0.05..3.0);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let direct = heat_power(&spec, t, &x);
            let kl = kl_representation(&spec, t, &x, 1e-12).unwrap();
            assert!(rel(kl, direct) < 1e-5, "(d,n)=({d},{n}) t={t} x={x:?}: {kl} vs {direct}");
        }
        assert_eq!(kl_representation(&spec, 0.0, &vec![0.1; d as usize], 1e-10).unwrap(), 0.0);
        assert_eq!(kl_representation(&spec, -0.4, &vec![0.1; d as usize], 1e-10).unwrap(), 0.0);
    }
}

#[test]
fn spectral_representation_respects_kappa() {
    let spec = KernelSpec::with_kappa(2, 2, 0.7, 1.9).unwrap();
    let (t, x) = (0.8, [0.3, -0.9]);
    let direct = heat_kernel(t, &x, 1.9).powi(3);
    assert!(rel(kl_representation(&spec, t, &x, 1e-12).unwrap(), direct) < 1e-6);
}

#[test]
fn integrable_case_is_the_plain_integral() {
    // d = 1, n = 1: ℓ = 0 and p² is integrable near the origin.
    let spec = KernelSpec::new(1, 1, 1.0).unwrap();
    let f = TestFunction::product(vec![Factor::gauss(1, 0.3, 1.0), Factor::gauss(0, 0.2, 1.5)]);
    let got = extended_power_pairing(&spec, &f, &PairingConfig::default()).unwrap();
    // t = s², x = s·u.
    let oracle = gauss3(
        |s| 2.0 * gauss3(|u| (-u * u / 2.0).exp() * f.eval(&[s * s, s * u]), -12.0, 12.0, 400) / (4.0 * PI),
        0.0,
        3.0,
        600,
    );
    assert!(rel(got, oracle) < 1e-6, "{got} vs {oracle}");
}

#[test]
fn extension_agrees_away_from_the_origin() {
    // d = 2, n = 1: for f supported in t > 0 the extension is ∫ p² f.
    let spec = KernelSpec::new(2, 1, 1.0).unwrap();
    let f = with_time(Factor::bump(0.5, 1.5), vec![Factor::gauss(0, 0.3, 1.0), Factor::gauss(1, -0.2, 0.8)]);
    let cfg = PairingConfig::default();
    let got = extended_power_pairing(&spec, &f, &cfg).unwrap();
    let brute = gauss3(
        |t| {
            gauss3(
                |x1| gauss3(|x2| heat_kernel(t, &[x1, x2], 1.0).powi(2) * f.eval(&[t, x1, x2]), -9.0, 9.0, 120),
                -9.0,
                9.0,
                120,
            )
        },
        0.5,
        1.5,
        100,
    );
    assert!(rel(got, brute) < 1e-6, "{got} vs {brute}");
    let plain = plain_power_pairing(&spec, &f, 1e-11).unwrap();
    assert!(rel(plain, brute) < 1e-7, "{plain} vs {brute}");
}

#[test]
fn substitutions_agree() {
    for (d, n) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
        let spec = KernelSpec::new(d, n, 0.8).unwrap();
        let f = with_time(Factor::gauss(0, 0.2, 1.1), spatial_gauss(d as usize, 11 + d as u64));
        let a = PairingConfig { tol: 1e-10, substitution: Substitution::Rational };
        let b = PairingConfig { tol: 1e-10, substitution: Substitution::Quadratic };
        let (va, vb) = (extended_power_pairing(&spec, &f, &a).unwrap(), extended_power_pairing(&spec, &f, &b).unwrap());
        assert!((va - vb).abs() < 2e-8 * va.abs().max(1e-3), "(d,n)=({d},{n}): {va} vs {vb}");
    }
}

#[test]
fn pairing_is_linear() {
    let spec = KernelSpec::new(2, 2, 1.3).unwrap();
    let cfg = PairingConfig::default();
    let f = with_time(Factor::gauss(0, 0.1, 1.0), spatial_gauss(2, 3));
    let g = with_time(Factor::gauss(1, -0.2, 0.7), spatial_gauss(2, 4));
    let h = f.clone().plus(3.0, &g);
    let e = |u: &TestFunction| extended_power_pairing(&spec, u, &cfg).unwrap();
    let (a, b, c) = (e(&f), e(&g), e(&h));
    assert!((c - a - 3.0 * b).abs() < 1e-8 * (a.abs() + b.abs()), "{c} vs {}", a + 3.0 * b);
}

#[test]
fn difference_vanishes_on_flat_functions() {
    let a = KernelSpec::new(2, 1, 1.0).unwrap();
    let b = KernelSpec::new(2, 1, 2.5).unwrap();
    let cfg = PairingConfig::default();
    // f(0) = 0 is all that ℓ = 1 sees.
    let f = with_time(Factor::gauss(0, 0.3, 1.0), vec![Factor::gauss(2, 0.0, 1.0), Factor::gauss(0, 0.4, 0.9)]);
    assert_eq!(difference_basis(&a, &f)[0], 0.0);
    let diff = extension_difference(&a, &b, &f, &cfg).unwrap();
    assert!(diff.abs() < 1e-6, "{diff}");
    assert_eq!(extension_difference(&a, &a, &f, &cfg).unwrap(), 0.0);
}

#[test]
fn first_order_difference_coefficient() {
    // ℓ = 1: ⟨_b − _a, f⟩ = c ∫ z^{α−1} [1/(z+a) − 1/(z+b)] dz · f(0).
    let cfg = PairingConfig::default();
    let (ra, rb) = (0.7, 2.0);
    for d in [2u32, 3] {
        let a = KernelSpec::new(d, 1, ra).unwrap();
        let b = KernelSpec::new(d, 1, rb).unwrap();
        let expected = if d == 2 { a.prefactor() * (rb / ra).ln() } else { a.prefactor() * PI * (rb.sqrt() - ra.sqrt()) };
        let fs: Vec<TestFunction> =
            (0..4).map(|i| with_time(Factor::gauss(i % 2, 0.1 * i as f64, 1.0), spatial_gauss(d as usize, 20 + i as u64))).collect();
        let fit = fit_extension_difference(&a, &b, &fs, &cfg).unwrap();
        assert!(fit.residual < 1e-5, "d={d}: residual {}", fit.residual);
        assert!(rel(fit.zeta[0], expected) < 1e-6, "d={d}: {} vs {expected}", fit.zeta[0]);
    }
}

#[test]
fn second_order_difference_coefficients() {
    // d = 2, n = 2: α = ℓ = 2 and
    // ζ₀ = c (b − a − a ln(b/a)), ζ₁ = c ln(b/a) against the basis of `a`.
    let (ra, rb) = (0.9, 1.6);
    let a = KernelSpec::new(2, 2, ra).unwrap();
    let b = KernelSpec::new(2, 2, rb).unwrap();
    let cfg = PairingConfig::default();
    let fs: Vec<TestFunction> = (0..6)
        .map(|i| with_time(Factor::gauss(i % 2, 0.15 * i as f64 - 0.3, 0.8 + 0.1 * i as f64), spatial_gauss(2, 40 + i as u64)))
        .collect();
    let fit = fit_extension_difference(&a, &b, &fs, &cfg).unwrap();
    assert!(fit.residual < 1e-5, "residual {}", fit.residual);
    let c = a.prefactor();
    let z0 = c * (rb - ra - ra * (rb / ra).ln());
    let z1 = c * (rb / ra).ln();
    assert!(rel(fit.zeta[0], z0) < 1e-5, "{} vs {z0}", fit.zeta[0]);
    assert!(rel(fit.zeta[1], z1) < 1e-5, "{} vs {z1}", fit.zeta[1]);

    // A disjoint family of test functions gives the same coefficients.
    let gs: Vec<TestFunction> =
        (0..6).map(|i| with_time(Factor::gauss(0, 0.05 * i as f64, 1.2), spatial_gauss(2, 90 + i as u64))).collect();
    let other = fit_extension_difference(&a, &b, &gs, &cfg).unwrap();
    for q in 0..2 {
        assert!(rel(other.zeta[q], fit.zeta[q]) < 1e-5);
    }
}

#[test]
fn too_few_functions_rejected() {
    let a = KernelSpec::new(2, 2, 1.0).unwrap();
    let b = KernelSpec::new(2, 2, 2.0).unwrap();
    let f = with_time(Factor::gauss(0, 0.0, 1.0), spatial_gauss(2, 1));
    assert!(fit_extension_difference(&a, &b, &[f], &PairingConfig::default()).is_err());
}

#[test]
fn semigroup_identity() {
    for (t, s, x) in [(0.3, 0.5, 0.4), (1.2, 0.1, -1.0), (0.05, 0.7, 0.2)] {
        let conv = gauss3(|y| heat_kernel(t, &[x - y], 1.0) * heat_kernel(s, &[y], 1.0), -12.0, 12.0, 3000);
        assert!(rel(conv, heat_kernel(t + s, &[x], 1.0)) < 1e-9);
    }
    let (t, s, x) = (0.4, 0.25, [0.3, -0.5]);
    let conv = gauss3(
        |y1| gauss3(|y2| heat_kernel(t, &[x[0] - y1, x[1] - y2], 1.0) * heat_kernel(s, &[y1, y2], 1.0), -9.0, 9.0, 300),
        -9.0,
        9.0,
        300,
    );
    assert!(rel(conv, heat_kernel(t + s, &x, 1.0)) < 1e-9);
}

#[test]
fn torus_kernel_properties() {
    for t in [0.01, 0.2, 1.5] {
        let m1 = gauss3(|x| torus_kernel(t, &[x], 20).unwrap().value, 0.0, 1.0, 400);
        assert!((m1 - 1.0).abs() < 1e-9, "t={t}: {m1}");
        let m2 = gauss3(|x| gauss3(|y| torus_kernel(t, &[x, y], 20).unwrap().value, 0.0, 1.0, 200), 0.0, 1.0, 200);
        assert!((m2 - 1.0).abs() < 1e-8, "t={t}: {m2}");
        // With few images the reported tail accounts for the missing mass.
        let few = gauss3(|x| torus_kernel(t, &[x], 2).unwrap().value, 0.0, 1.0, 400);
        let tail = gauss3(|x| torus_kernel(t, &[x], 2).unwrap().tail_bound, 0.0, 1.0, 400);
        assert!(1.0 - few <= tail + 1e-12, "t={t}: missing {} tail {tail}", 1.0 - few);
    }
    assert_eq!(torus_kernel(0.0, &[0.3], 4).unwrap().value, 0.0);
    assert_eq!(torus_kernel(-1.0, &[0.3, 0.2], 4).unwrap().value, 0.0);
    assert!(torus_kernel(0.1, &[1.3], 4).is_err());
    // Near the diagonal the torus kernel is the plane kernel plus a smooth remainder.
    for t in [1e-2, 1e-3, 1e-4] {
        let h = 1e-3;
        let r = |x: f64| torus_kernel(t, &[x], 4).unwrap().value - heat_kernel(t, &[x], 1.0);
        for x in [0.0, 0.05, 0.2] {
            let xs = x + h;
            let second = (r(xs + h) - 2.0 * r(xs) + r(xs - h)) / (h * h);
            assert!(r(xs).abs() < 2.0 && second.abs() < 20.0, "t={t} x={x}");
        }
    }
    let tv = torus_kernel(0.5, &[0.4], 8).unwrap();
    assert!(tv.tail_bound >= 0.0 && tv.tail_bound < 1e-6);
}

#[test]
fn regularised_covariance_converges() {
    // Away from the diagonal Q_ε → ∫_0^{min} p(t₁ + t₂ − 2s, x₁ − x₂) ds.
    let (t1, t2, x1, x2, window) = (0.4, 0.3, [0.2], [-0.1], 0.5);
    let limit = gauss3(|s| heat_kernel(t1 + t2 - 2.0 * s, &[x1[0] - x2[0]], 1.0), 0.0, t2, 2000);
    let errs: Vec<f64> =
        [0.1, 0.05, 0.025, 0.0125].iter().map(|&e| (q_epsilon((t1, &x1), (t2, &x2), e, window).unwrap() - limit).abs()).collect();
    for w in errs.windows(2) {
        assert!(w[1] < 0.5 * w[0], "{errs:?}");
    }
    assert!(errs[3] < 1e-3 * limit);
}
