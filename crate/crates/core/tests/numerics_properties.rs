use heisenberg_core::numerics::{
    beta_fn, gamma_fn, integrate_1d, integrate_nested, mc_integrate, BoxSampler,
    KoranyiBallSampler, MCSpec, NestedDim, QuadratureSpec,
};
use heisenberg_core::HeisenbergSpace;
use proptest::prelude::*;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn poly_integral(c: &[f64], a: f64, b: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, ck)| ck * (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0))
        .sum()
}

#[test]
fn mc_coverage_over_seeds() {
    // int_{[0,1]^2} x y^2 = 1/6
    let b = BoxSampler::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let mut covered = 0;
    for seed in 0..50 {
        let r = mc_integrate(
            |p: &Vec<f64>| p[0] * p[1] * p[1],
            &b,
            &MCSpec::new(5_000, seed, 4).unwrap(),
        )
        .unwrap();
        if (r.value - 1.0 / 6.0).abs() <= 2.0 * r.error_estimate {
            covered += 1;
        }
    }
    assert!(covered >= 45, "coverage {covered}/50");
}

#[test]
fn mc_ball_volume_and_half_ball() {
    let s = HeisenbergSpace::new(1).unwrap();
    let ball = KoranyiBallSampler::new(s, 1.0).unwrap();
    let spec = MCSpec::new(100_000, 2, 8).unwrap();
    let one = mc_integrate(|_| 1.0, &ball, &spec).unwrap();
    assert!((one.value - s.ball_volume()).abs() <= 1e-12 * s.ball_volume());
    let half = mc_integrate(|y| if y.norm() <= 0.5 { 1.0 } else { 0.0 }, &ball, &spec).unwrap();
    assert!((half.value - s.ball_volume() / 16.0).abs() <= 3.0 * half.error_estimate);
}

#[test]
fn quadrature_examples() {
    let spec = QuadratureSpec::default();
    let r = integrate_1d(|x| x.powi(3), 0.0, 1.0, &spec).unwrap();
    assert!((r.value - 0.25).abs() < 1e-14);
    let r = integrate_1d(|x| x / (1.0 + x.powi(4)), 0.0, f64::INFINITY, &spec).unwrap();
    assert!((r.value - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
    let s = spec.with_singularities(Some(0.5), Some(2.5));
    let r = integrate_1d(
        |t| t.powf(-0.5) * (1.0 + t).powi(-2),
        0.0,
        f64::INFINITY,
        &s,
    )
    .unwrap();
    assert!((r.value - beta_fn(0.5, 1.5).unwrap()).abs() < 1e-10);
    let r = integrate_nested(
        |t| (1.0 + t[0]).powi(-2),
        &[NestedDim::new(0.0, f64::INFINITY)],
        &spec,
    )
    .unwrap();
    assert!((r.value - 1.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quadrature_is_exact_on_polynomials_and_additive(
        c in prop::collection::vec(-5.0f64..5.0, 1..8),
        d in prop::collection::vec(-5.0f64..5.0, 1..8),
        a in -3.0f64..0.0,
        mid in 0.0f64..1.0,
        b in 1.0f64..3.0,
        lambda in -4.0f64..4.0,
    ) {
        let spec = QuadratureSpec::new(1e-13, 1e-12, 200).unwrap();
        let m = a + mid * (b - a);
        let whole = integrate_1d(|x| poly(&c, x), a, b, &spec).unwrap().value;
        let exact = poly_integral(&c, a, b);
        let scale = c.iter().map(|v| v.abs()).sum::<f64>() * 3f64.powi(c.len() as i32 + 1);
        prop_assert!((whole - exact).abs() <= 1e-12 * scale);
        let split = integrate_1d(|x| poly(&c, x), a, m, &spec).unwrap().value
            + integrate_1d(|x| poly(&c, x), m, b, &spec).unwrap().value;
        prop_assert!((split - whole).abs() <= 1e-12 * scale);
        let combo = integrate_1d(|x| poly(&c, x) + lambda * poly(&d, x), a, b, &spec).unwrap().value;
        let parts = whole + lambda * integrate_1d(|x| poly(&d, x), a, b, &spec).unwrap().value;
        let dscale = scale + 4.0 * d.iter().map(|v| v.abs()).sum::<f64>() * 3f64.powi(d.len() as i32 + 1);
        prop_assert!((combo - parts).abs() <= 1e-12 * dscale);
    }

    #[test]
    fn gamma_recurrence(x in 0.1f64..40.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }

    #[test]
    fn gamma_reflection(x in 0.001f64..0.999) {
        let lhs = gamma_fn(x).unwrap() * gamma_fn(1.0 - x).unwrap();
        let rhs = std::f64::consts::PI / (std::f64::consts::PI * x).sin();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-11);
    }

    #[test]
    fn beta_symmetry(a in 0.05f64..30.0, b in 0.05f64..30.0) {
        let x = beta_fn(a, b).unwrap();
        let y = beta_fn(b, a).unwrap();
        prop_assert!(((x - y) / x).abs() < 1e-13);
    }
}
