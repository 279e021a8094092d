use heisenberg_core::group::horizontal_sphere_area;
use heisenberg_core::numerics::{
    integrate_1d, mc_integrate, BoxSampler, KoranyiBallSampler, MCSpec, QuadratureSpec,
};
use heisenberg_core::{
    sample_ball, unit_ball_volume, GroupPoint, HeisenbergSpace, HorizontalRotation,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> GroupPoint {
    GroupPoint::new(
        (0..2 * n + 1)
            .map(|_| scale * rng.gen_range(-1.0..1.0))
            .collect(),
    )
    .unwrap()
}

fn magnitude(x: &GroupPoint) -> f64 {
    x.coords().iter().map(|c| c.abs()).sum()
}

fn dyadic_point(rng: &mut ChaCha8Rng, n: usize) -> GroupPoint {
    // multiples of 2^-8 in [-4, 4]: every group product is exact in f64
    GroupPoint::new(
        (0..2 * n + 1)
            .map(|_| rng.gen_range(-1024i32..=1024) as f64 / 256.0)
            .collect(),
    )
    .unwrap()
}

fn max_coord_gap(a: &GroupPoint, b: &GroupPoint) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

#[test]
fn associativity_on_sampled_triples() {
    for n in 1..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..10_000 {
            let (x, y, z) = (
                dyadic_point(&mut rng, n),
                dyadic_point(&mut rng, n),
                dyadic_point(&mut rng, n),
            );
            let left = x.mul(&y).unwrap().mul(&z).unwrap();
            let right = x.mul(&y.mul(&z).unwrap()).unwrap();
            let d = left.distance(&right).unwrap();
            assert!(d <= 1e-10 * (1.0 + magnitude(&x) + magnitude(&y) + magnitude(&z)));
        }
    }
}

#[test]
fn associativity_in_floating_point() {
    // a rounding error e in t moves the Koranyi distance by sqrt(e), so
    // generic inputs are compared coordinate-wise
    for n in 1..=3 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
        for _ in 0..10_000 {
            let (x, y, z) = (
                random_point(&mut rng, n, 3.0),
                random_point(&mut rng, n, 3.0),
                random_point(&mut rng, n, 3.0),
            );
            let left = x.mul(&y).unwrap().mul(&z).unwrap();
            let right = x.mul(&y.mul(&z).unwrap()).unwrap();
            let scale = 1.0 + magnitude(&x) + magnitude(&y) + magnitude(&z);
            assert!(max_coord_gap(&left, &right) <= 1e-12 * scale * scale);
        }
    }
}

#[test]
fn identity_and_inverse_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let s = HeisenbergSpace::new(2).unwrap();
    for _ in 0..10_000 {
        let x = random_point(&mut rng, 2, 5.0);
        let e = s.zero();
        assert_eq!(x.mul(&e).unwrap(), x);
        assert_eq!(e.mul(&x).unwrap(), x);
        let a = x.mul(&x.inverse()).unwrap();
        let b = x.inverse().mul(&x).unwrap();
        assert!(a.norm() <= 1e-12 && b.norm() <= 1e-12);
    }
}

#[test]
fn left_invariance_of_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let (a, x, y) = (
            random_point(&mut rng, 1, 2.0),
            random_point(&mut rng, 1, 2.0),
            random_point(&mut rng, 1, 2.0),
        );
        let d = x.distance(&y).unwrap();
        let da = a.mul(&x).unwrap().distance(&a.mul(&y).unwrap()).unwrap();
        assert!((da - d).abs() <= 1e-10 * d.max(1e-3));
    }
}

#[test]
fn triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10_000 {
        let (x, y, z) = (
            random_point(&mut rng, 1, 2.0),
            random_point(&mut rng, 1, 2.0),
            random_point(&mut rng, 1, 2.0),
        );
        let lhs = x.distance(&z).unwrap();
        let rhs = x.distance(&y).unwrap() + y.distance(&z).unwrap();
        assert!(lhs <= rhs + 1e-12);
    }
}

#[test]
fn norm_homogeneity_on_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let x = random_point(&mut rng, 2, 1.0);
        for k in -6..=6 {
            let r = 10f64.powf(k as f64 / 2.0);
            let lhs = x.dilate(r).unwrap().norm();
            assert!((lhs - r * x.norm()).abs() <= 1e-12 * r * x.norm());
        }
    }
}

#[test]
fn rotations_preserve_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let rot = HorizontalRotation::random(4, &mut rng);
        let x = random_point(&mut rng, 2, 2.0);
        let y = x.rotate_horizontal(&rot).unwrap();
        assert!((y.norm() - x.norm()).abs() <= 1e-12 * x.norm());
        assert_eq!(y.vertical(), x.vertical());
    }
}

#[test]
fn ball_volume_closed_form_vs_quadrature() {
    for n in 1..=3 {
        let closed = unit_ball_volume(n).unwrap().lebesgue;
        let q = integrate_1d(
            |r: f64| r.powi(2 * n as i32 - 1) * 2.0 * (1.0 - r.powi(4)).sqrt(),
            0.0,
            1.0,
            &QuadratureSpec::default().with_singularities(None, Some(0.5)),
        )
        .unwrap();
        let quad = horizontal_sphere_area(n) * q.value;
        assert!(((quad - closed) / closed).abs() < 1e-10, "n = {n}");
    }
}

#[test]
fn ball_volume_vs_cartesian_monte_carlo() {
    for n in [1, 2] {
        let s = HeisenbergSpace::new(n).unwrap();
        let boxed = BoxSampler::koranyi_bounding_box(&s);
        let inside = |c: &Vec<f64>| {
            let z2: f64 = c[..2 * n].iter().map(|v| v * v).sum();
            if z2 * z2 + c[2 * n] * c[2 * n] <= 1.0 {
                1.0
            } else {
                0.0
            }
        };
        let est = mc_integrate(inside, &boxed, &MCSpec::new(1_000_000, 21, 16).unwrap()).unwrap();
        assert!(
            (est.value - s.ball_volume()).abs() <= 3.0 * est.error_estimate,
            "n = {n}"
        );
    }
}

#[test]
fn measure_scales_with_dilation() {
    // |delta_r B(0,1)| = r^Q |B(0,1)|, sampled inside the box of B(0, r)
    let s = HeisenbergSpace::new(1).unwrap();
    for r in [0.5, 2.0] {
        let boxed = BoxSampler::new(vec![-r, -r, -r * r], vec![r, r, r * r]).unwrap();
        let est = mc_integrate(
            |c: &Vec<f64>| {
                let p = GroupPoint::new(c.clone()).unwrap();
                if p.norm() <= r {
                    1.0
                } else {
                    0.0
                }
            },
            &boxed,
            &MCSpec::new(400_000, 3, 8).unwrap(),
        )
        .unwrap();
        assert!((est.value - r.powi(4) * s.ball_volume()).abs() <= 3.0 * est.error_estimate);
    }
    let half = mc_integrate(
        |y: &GroupPoint| if y.norm() <= 0.5 { 1.0 } else { 0.0 },
        &KoranyiBallSampler::new(s, 1.0).unwrap(),
        &MCSpec::new(400_000, 4, 8).unwrap(),
    )
    .unwrap();
    assert!((half.value - s.ball_volume() / 16.0).abs() <= 3.0 * half.error_estimate);
}

#[test]
fn sample_ball_acceptance_fraction() {
    // box rejection accepts with probability vol / 2^3
    let s = HeisenbergSpace::new(1).unwrap();
    let boxed = BoxSampler::koranyi_bounding_box(&s);
    let est = mc_integrate(
        |c: &Vec<f64>| {
            if c[0].hypot(c[1]).powi(4) + c[2] * c[2] <= 1.0 {
                1.0
            } else {
                0.0
            }
        },
        &boxed,
        &MCSpec::new(200_000, 5, 8).unwrap(),
    )
    .unwrap();
    let fraction = est.value / 8.0;
    assert!((fraction - 0.6169).abs() <= 3.0 * est.error_estimate / 8.0 + 1e-4);
    assert!(sample_ball(&s, 0, 1).is_empty());
    let pts = sample_ball(&s, 1000, 5);
    assert!(pts.iter().all(|p| p.norm() <= 1.0));
}

proptest! {
    #[test]
    fn dilation_is_a_homomorphism(
        a in prop::collection::vec(-3.0f64..3.0, 3),
        b in prop::collection::vec(-3.0f64..3.0, 3),
        r in 0.01f64..50.0,
    ) {
        let (x, y) = (GroupPoint::new(a).unwrap(), GroupPoint::new(b).unwrap());
        let lhs = x.mul(&y).unwrap().dilate(r).unwrap();
        let rhs = x.dilate(r).unwrap().mul(&y.dilate(r).unwrap()).unwrap();
        let scale = r.max(r * r) * (1.0 + magnitude(&x) + magnitude(&y)).powi(2);
        prop_assert!(max_coord_gap(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn polar_round_trip(c in prop::collection::vec(-10.0f64..10.0, 5)) {
        let x = GroupPoint::new(c).unwrap();
        prop_assume!(x.norm() > 1e-6);
        let polar = heisenberg_core::polar_decompose(&x).unwrap();
        prop_assert!((polar.theta.norm() - 1.0).abs() < 1e-12);
        let back = polar.compose();
        for (u, v) in back.coords().iter().zip(x.coords()) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()) * 10.0);
        }
    }
}
