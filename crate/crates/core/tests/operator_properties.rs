use heisenberg_core::constants::{sharp_constant, ConstantRequest, OperatorKind};
use heisenberg_core::mixed::{
    mixed_norm, radialize, random_product_function, random_radial_function, MixedNormParams,
    NormConfig, Support, TestFunction,
};
use heisenberg_core::numerics::{mc_integrate, BallProductSampler, MCSpec, QuadratureSpec};
use heisenberg_core::operators::{
    apply_general, apply_general_sphere_mean, apply_mlinear, apply_radial, image, operator_ratio,
    Kernel,
};
use heisenberg_core::{sample_sphere, HeisenbergSpace};
use proptest::prelude::*;

fn h1() -> HeisenbergSpace {
    HeisenbergSpace::new(1).unwrap()
}

fn cfg() -> NormConfig {
    NormConfig {
        mc: MCSpec::new(20_000, 3, 8).unwrap(),
        ..NormConfig::default()
    }
}

fn linear_constant(space: HeisenbergSpace, kernel: &Kernel, p: f64) -> f64 {
    let op = match kernel {
        Kernel::Hilbert => OperatorKind::Hilbert,
        Kernel::Hlp => OperatorKind::Hlp,
        _ => unreachable!(),
    };
    sharp_constant(
        &ConstantRequest::linear(space, op, p),
        &QuadratureSpec::default(),
    )
    .unwrap()
    .closed_form_value
}

/// Pointwise sum of two radial functions.
fn radial_sum(f: &TestFunction, g: &TestFunction) -> TestFunction {
    let (a, b) = (f.clone(), g.clone());
    let r_max = f.support().r_max.max(g.support().r_max);
    let origin = f
        .envelope()
        .origin_power
        .zip(g.envelope().origin_power)
        .map(|(x, y)| x.min(y));
    TestFunction::radial(
        move |r| a.radial_value(r).unwrap() + b.radial_value(r).unwrap(),
        Support::new(0.0, r_max).unwrap(),
    )
    .with_powers(origin, None)
    .with_breakpoints(vec![f.support().r_max, g.support().r_max])
}

#[test]
fn kernel_invariants_hold_on_sampled_pairs() {
    for n in [1, 2] {
        let s = HeisenbergSpace::new(n).unwrap();
        let custom = Kernel::custom(
            "hlp-copy",
            |rho| 1.0 / rho.powi(4).max(1.0),
            0.0,
            4.0,
            vec![1.0],
        )
        .unwrap();
        for kernel in [Kernel::Hilbert, Kernel::Hlp, custom] {
            let check = kernel.check_invariants(&s, 1000, 17).unwrap();
            assert!(check.passes(1e-10), "{check:?}");
        }
    }
}

#[test]
fn commutation_with_radialization() {
    let s = h1();
    let mc = MCSpec::new(40_000, 9, 8).unwrap();
    let quad = QuadratureSpec::default();
    for i in 0..20 {
        let f = random_product_function(23, i);
        let g = radialize(&f, &s, &mc).unwrap();
        let mean = g.angular_mean.unwrap();
        for kernel in [Kernel::Hilbert, Kernel::Hlp] {
            for r in [0.5, 1.0, 2.0] {
                let lhs =
                    apply_general_sphere_mean(&kernel, &f, r, &s, &mc.with_seed(100 + i)).unwrap();
                let rhs = apply_radial(&kernel, &g.function, r, &s, &quad).unwrap();
                let se = lhs.error_estimate
                    + rhs.value.abs() * mean.relative_error()
                    + rhs.error_estimate;
                assert!(
                    (lhs.value - rhs.value).abs() <= 3.0 * se,
                    "f #{i}, {}, r = {r}: {} vs {} (se {se})",
                    kernel.name(),
                    lhs.value,
                    rhs.value
                );
            }
        }
    }
}

#[test]
fn radialization_dominates_the_ratio() {
    let s = h1();
    let cfg = cfg();
    let params = MixedNormParams::new(2.0, 2.0).unwrap();
    for i in 0..20 {
        let f = random_product_function(29, i);
        let g = radialize(&f, &s, &cfg.mc).unwrap().function;
        for kernel in [Kernel::Hilbert, Kernel::Hlp] {
            let rf = operator_ratio(
                &kernel,
                std::slice::from_ref(&f),
                &[params],
                params,
                &s,
                &cfg,
            )
            .unwrap();
            let rg = operator_ratio(
                &kernel,
                std::slice::from_ref(&g),
                &[params],
                params,
                &s,
                &cfg,
            )
            .unwrap();
            assert!(
                rf.value <= rg.value + 3.0 * (rf.error_estimate + rg.error_estimate),
                "f #{i}, {}: {} > {}",
                kernel.name(),
                rf.value,
                rg.value
            );
        }
    }
}

#[test]
fn images_obey_the_sharp_bound() {
    let s = h1();
    let cfg = cfg();
    for kernel in [Kernel::Hilbert, Kernel::Hlp] {
        for p in [1.5, 2.0, 3.0] {
            let constant = linear_constant(s, &kernel, p);
            let params = MixedNormParams::new(p, 2.0).unwrap();
            for i in 0..50 {
                let f = random_radial_function(31, i);
                let tf = image(&kernel, &f, &s, &cfg).unwrap().function;
                let nt = mixed_norm(&tf, params, &s, &cfg).unwrap();
                let nf = mixed_norm(&f, params, &s, &cfg).unwrap();
                let tol =
                    nt.error_estimate + constant * nf.error_estimate + 1e-9 * constant * nf.value;
                assert!(
                    nt.value <= constant * nf.value + tol,
                    "{} p = {p} f #{i}: {} > {}",
                    kernel.name(),
                    nt.value,
                    constant * nf.value
                );
            }
        }
    }
}

#[test]
fn mlinear_is_additive_and_homogeneous_in_each_slot() {
    let s = h1();
    let quad = QuadratureSpec::default();
    for i in 0..5 {
        let (f, g, h) = (
            random_radial_function(37, 3 * i),
            random_radial_function(37, 3 * i + 1),
            random_radial_function(37, 3 * i + 2),
        );
        let sum = radial_sum(&f, &g);
        for r in [0.5, 2.0] {
            let v = |fs: &[TestFunction]| apply_mlinear(fs, r, &s, &quad).unwrap().value;
            for slot in 0..2 {
                let place = |x: &TestFunction| {
                    if slot == 0 {
                        vec![x.clone(), h.clone()]
                    } else {
                        vec![h.clone(), x.clone()]
                    }
                };
                let lhs = v(&place(&sum));
                let rhs = v(&place(&f)) + v(&place(&g));
                assert!(
                    ((lhs - rhs) / rhs).abs() < 1e-8,
                    "additivity f #{i} slot {slot}"
                );
                let scaled = v(&place(&f.scaled(2.5)));
                let base = v(&place(&f));
                assert!(
                    ((scaled - 2.5 * base) / base).abs() < 1e-8,
                    "homogeneity f #{i} slot {slot}"
                );
            }
        }
    }
}

#[test]
fn bilinear_indicator_against_cartesian_monte_carlo() {
    let s = h1();
    let ball = TestFunction::ball_indicator(1.0).unwrap();
    let kernel = Kernel::multilinear(2).unwrap();
    let sampler = BallProductSampler::new(s, &[1.0, 1.0]).unwrap();
    for r in [0.5, 1.0, 2.0] {
        let quad = apply_mlinear(
            &[ball.clone(), ball.clone()],
            r,
            &s,
            &QuadratureSpec::default(),
        )
        .unwrap();
        let x = s.reference_point().dilate(r).unwrap();
        let mc = mc_integrate(
            |ys| kernel.eval(&s, &x, ys).unwrap(),
            &sampler,
            &MCSpec::new(200_000, 4, 8).unwrap(),
        )
        .unwrap();
        assert!(
            (quad.value - mc.value).abs() <= 3.0 * mc.error_estimate,
            "r = {r}: {} vs {}",
            quad.value,
            mc.value
        );
    }
}

#[test]
fn reference_point_is_immaterial() {
    let s = h1();
    let f = TestFunction::ball_indicator(1.5).unwrap();
    let mc = MCSpec::new(20_000, 12, 4).unwrap();
    let e = s.reference_point();
    for kernel in [Kernel::Hilbert, Kernel::Hlp] {
        for theta in sample_sphere(&s, 5, 13) {
            for r in [0.5, 2.0] {
                let a = apply_general(&kernel, &f, &e.dilate(r).unwrap(), &s, &mc)
                    .unwrap()
                    .value;
                let b = apply_general(&kernel, &f, &theta.dilate(r).unwrap(), &s, &mc)
                    .unwrap()
                    .value;
                assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dilation_covariance(seed in 0u64..1000, lambda in 0.1f64..10.0, r in 0.2f64..5.0) {
        let s = h1();
        let f = random_radial_function(seed, 0);
        let quad = QuadratureSpec::default();
        for kernel in [Kernel::Hilbert, Kernel::Hlp] {
            let lhs = apply_radial(&kernel, &f.dilated(lambda).unwrap(), r, &s, &quad).unwrap().value;
            let rhs = apply_radial(&kernel, &f, lambda * r, &s, &quad).unwrap().value;
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-8);
        }
    }

    #[test]
    fn ratio_is_dilation_and_scale_invariant(seed in 0u64..1000, lambda in 0.2f64..5.0, c in 0.1f64..10.0) {
        let s = h1();
        let cfg = cfg();
        let params = [MixedNormParams::new(2.0, 2.0).unwrap()];
        let f = random_radial_function(seed, 1);
        for kernel in [Kernel::Hilbert, Kernel::Hlp] {
            let base = operator_ratio(&kernel, std::slice::from_ref(&f), &params, params[0], &s, &cfg).unwrap().value;
            let moved = operator_ratio(&kernel, &[f.dilated(lambda).unwrap().scaled(c)], &params, params[0], &s, &cfg).unwrap().value;
            prop_assert!(((moved - base) / base).abs() < 1e-8);
        }
    }
}
