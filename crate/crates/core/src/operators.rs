//! Integral operators `Tf(x) = int K(x, y) f(y) dy` on `H^n`.
//!
//! Every kernel here is homogeneous of degree `-Q` per input slot and
//! depends on `y` only through `|y|_h`, so `K(x, y) = |x|_h^{-Q} k(|y|_h / |x|_h)`
//! for a radial profile `k`. For radial `f` this gives
//!
//! ```text
//! Tf(r) = omega_Q int_0^inf k(rho) f(r rho) rho^{Q-1} d rho
//! ```
//!
//! and `Tf` is radial again. The multilinear Hilbert kernel is
//! `(|x|^Q + sum_i |y_i|^Q)^{-m}`; the Hardy–Littlewood–Pólya kernel is
//! `1 / max(|x|^Q, |y|^Q)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Endpoint, Error, Result};
use crate::group::{draw_ball_coords, GroupPoint, HeisenbergSpace, HorizontalRotation};
use crate::mixed::{
    mixed_norm, radial_integral, radialize, Envelope, Form, MixedNormParams, NormConfig, RadialFn,
    SphereSampler, Support, TestFunction,
};
use crate::numerics::montecarlo::substream;
use crate::numerics::{
    integrate_nested, mc_integrate, DomainSampler, IntegralResult, KoranyiBallSampler, MCSpec,
    NestedDim, QuadratureSpec,
};

/// A user-supplied radial profile `k(rho) = K(e, y)`, `|y|_h = rho`.
///
/// `origin_power` is the exponent of `k` near `rho = 0` (`+inf` when `k`
/// vanishes there) and `tail_decay` the exponent `kappa` in
/// `k(rho) ~ rho^{-kappa}` at infinity.
pub struct CustomKernel {
    pub name: String,
    pub profile: RadialFn,
    pub origin_power: f64,
    pub tail_decay: f64,
    pub breakpoints: Vec<f64>,
}

#[derive(Clone)]
pub enum Kernel {
    Hilbert,
    Hlp,
    MultilinearHilbert { m: usize },
    Custom(Arc<CustomKernel>),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Kernel {
    pub fn multilinear(m: usize) -> Result<Self> {
        match m {
            0 => Err(Error::invalid("multilinear arity must be at least 1")),
            1 => Ok(Kernel::Hilbert),
            _ => Ok(Kernel::MultilinearHilbert { m }),
        }
    }

    pub fn custom<F>(
        name: &str,
        profile: F,
        origin_power: f64,
        tail_decay: f64,
        breakpoints: Vec<f64>,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if origin_power.is_nan() || !tail_decay.is_finite() {
            return Err(Error::invalid(
                "custom kernel needs a declared origin power and a finite tail decay",
            ));
        }
        Ok(Kernel::Custom(Arc::new(CustomKernel {
            name: name.to_string(),
            profile: Arc::new(profile),
            origin_power,
            tail_decay,
            breakpoints,
        })))
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Hilbert => "hilbert".into(),
            Kernel::Hlp => "hlp".into(),
            Kernel::MultilinearHilbert { m } => format!("mlinear-{m}"),
            Kernel::Custom(c) => c.name.clone(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Kernel::MultilinearHilbert { m } => *m,
            _ => 1,
        }
    }

    /// `K(delta_l x, delta_l y) = l^{d} K(x, y)` with `d = -arity * Q`.
    pub fn homogeneity_degree(&self, space: &HeisenbergSpace) -> f64 {
        -(self.arity() as f64) * space.qf()
    }

    /// `K(x, y_1, ..., y_m)`.
    pub fn eval(&self, space: &HeisenbergSpace, x: &GroupPoint, ys: &[GroupPoint]) -> Result<f64> {
        if ys.len() != self.arity() {
            return Err(Error::invalid(format!(
                "kernel {} takes {} arguments, got {}",
                self.name(),
                self.arity(),
                ys.len()
            )));
        }
        let q = space.qf();
        let xq = x.norm().powf(q);
        Ok(match self {
            Kernel::Hilbert | Kernel::MultilinearHilbert { .. } => {
                let s: f64 = xq + ys.iter().map(|y| y.norm().powf(q)).sum::<f64>();
                s.powi(-(ys.len() as i32))
            }
            Kernel::Hlp => 1.0 / xq.max(ys[0].norm().powf(q)),
            Kernel::Custom(c) => {
                let r = x.norm();
                if r == 0.0 {
                    return Err(Error::domain("custom kernels are not defined at x = 0"));
                }
                (c.profile)(ys[0].norm() / r) / xq
            }
        })
    }

    /// `K(e, y_1, ..., y_m)` for `|y_i|_h = rhos[i]`.
    pub fn profile(&self, rhos: &[f64], q: f64) -> f64 {
        match self {
            Kernel::Hilbert | Kernel::MultilinearHilbert { .. } => {
                let s: f64 = 1.0 + rhos.iter().map(|r| r.powf(q)).sum::<f64>();
                s.powi(-(rhos.len() as i32))
            }
            Kernel::Hlp => 1.0 / rhos[0].powf(q).max(1.0),
            Kernel::Custom(c) => (c.profile)(rhos[0]),
        }
    }

    /// Exponent of the linear profile at `rho = 0`.
    pub fn origin_power(&self) -> f64 {
        match self {
            Kernel::Custom(c) => c.origin_power,
            _ => 0.0,
        }
    }

    /// `kappa` in `k(rho) ~ rho^{-kappa}` for the linear profile.
    pub fn tail_decay(&self, q: f64) -> f64 {
        match self {
            Kernel::Custom(c) => c.tail_decay,
            _ => q,
        }
    }

    /// Radii where the linear profile has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Kernel::Hlp => vec![1.0],
            Kernel::Custom(c) => c.breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    /// Spot-check homogeneity, horizontal rotation invariance and
    /// nonnegativity on `pairs` random argument tuples.
    pub fn check_invariants(
        &self,
        space: &HeisenbergSpace,
        pairs: usize,
        seed: u64,
    ) -> Result<KernelCheck> {
        let dim = space.dim();
        let degree = self.homogeneity_degree(space);
        let mut check = KernelCheck {
            kernel: self.name(),
            pairs,
            homogeneity_max_rel: 0.0,
            rotation_max_rel: 0.0,
            min_value: f64::INFINITY,
        };
        for i in 0..pairs as u64 {
            let mut rng = substream(seed, i);
            let point = |rng: &mut rand_chacha::ChaCha8Rng| {
                let scale = 0.2 + 2.8 * rng.gen::<f64>();
                GroupPoint::new(draw_ball_coords(dim, rng)).map(|p| p.dilate_unchecked(scale))
            };
            let x = point(&mut rng)?;
            let ys = (0..self.arity())
                .map(|_| point(&mut rng))
                .collect::<Result<Vec<_>>>()?;
            let lambda = 10f64.powf(2.0 * rng.gen::<f64>() - 1.0);
            let rotation = HorizontalRotation::random(2 * space.n(), &mut rng);

            let base = self.eval(space, &x, &ys)?;
            check.min_value = check.min_value.min(base);
            let dilated = self.eval(
                space,
                &x.dilate_unchecked(lambda),
                &ys.iter()
                    .map(|y| y.dilate_unchecked(lambda))
                    .collect::<Vec<_>>(),
            )?;
            let expected = lambda.powf(degree) * base;
            check.homogeneity_max_rel = check
                .homogeneity_max_rel
                .max(relative_gap(dilated, expected));
            let rotated = self.eval(
                space,
                &rotation.apply(&x)?,
                &ys.iter()
                    .map(|y| rotation.apply(y))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            check.rotation_max_rel = check.rotation_max_rel.max(relative_gap(rotated, base));
        }
        Ok(check)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCheck {
    pub kernel: String,
    pub pairs: usize,
    pub homogeneity_max_rel: f64,
    pub rotation_max_rel: f64,
    pub min_value: f64,
}

impl KernelCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.homogeneity_max_rel <= tol && self.rotation_max_rel <= tol && self.min_value >= 0.0
    }
}

fn require_linear(kernel: &Kernel) -> Result<()> {
    if kernel.arity() != 1 {
        return Err(Error::invalid(format!(
            "kernel {} is {}-linear; use apply_mlinear",
            kernel.name(),
            kernel.arity()
        )));
    }
    Ok(())
}

/// `Tf(r) = omega_Q int k(rho) f(r rho) rho^{Q-1} d rho` for a radial
/// profile given with its support and envelope.
fn radial_image_value(
    kernel: &Kernel,
    profile: &(dyn Fn(f64) -> f64 + Send + Sync),
    support: Support,
    envelope: &Envelope,
    r: f64,
    space: &HeisenbergSpace,
    quad: &QuadratureSpec,
) -> Result<IntegralResult> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!(
            "radius must be finite and positive, got {r}"
        )));
    }
    let q = space.qf();
    let scaled = Support {
        r_min: support.r_min / r,
        r_max: support.r_max / r,
    };
    let h = |rho: f64| {
        let fv = if support.contains(r * rho) {
            profile(r * rho)
        } else {
            0.0
        };
        if fv == 0.0 {
            return 0.0;
        }
        kernel.profile(&[rho], q) * fv * rho.powf(q - 1.0)
    };
    let mut breakpoints = kernel.breakpoints();
    breakpoints.extend(envelope.breakpoints.iter().map(|b| b / r));
    let origin = envelope
        .origin_power
        .map(|a| a + kernel.origin_power() + q - 1.0);
    let tail = envelope
        .tail_power
        .map(|a| a + q - 1.0 - kernel.tail_decay(q));
    let integral = radial_integral(
        h,
        scaled,
        origin,
        tail,
        &breakpoints,
        quad,
        NormConfig::default().divergence_ratio,
    )?;
    Ok(integral.scaled(space.sphere_mass()))
}

/// `Tf` at any point of radius `x_radius`, for radial `f`.
pub fn apply_radial(
    kernel: &Kernel,
    f: &TestFunction,
    x_radius: f64,
    space: &HeisenbergSpace,
    quad: &QuadratureSpec,
) -> Result<IntegralResult> {
    require_linear(kernel)?;
    match f.form() {
        Form::Radial(profile) => radial_image_value(
            kernel,
            profile.as_ref(),
            f.support(),
            f.envelope(),
            x_radius,
            space,
            quad,
        ),
        _ => Err(Error::invalid(
            "apply_radial needs a radial function; use image for product inputs",
        )),
    }
}

/// Monte Carlo estimate of `Tf(x)` in full coordinates over the (bounded)
/// support of `f`.
pub fn apply_general(
    kernel: &Kernel,
    f: &TestFunction,
    x: &GroupPoint,
    space: &HeisenbergSpace,
    mc: &MCSpec,
) -> Result<IntegralResult> {
    require_linear(kernel)?;
    if !f.support().is_bounded() {
        return Err(Error::Unsupported(
            "Monte Carlo application needs a bounded support".into(),
        ));
    }
    let sampler = KoranyiBallSampler::new(*space, f.support().r_max)?;
    mc_integrate(
        |y| {
            let v = f.eval(y);
            if v == 0.0 {
                0.0
            } else {
                kernel
                    .eval(space, x, std::slice::from_ref(y))
                    .unwrap_or(f64::NAN)
                    * v
            }
        },
        &sampler,
        mc,
    )
}

/// Sphere mean `(1/omega_Q) int_S Tf(delta_r theta) d sigma(theta)` by Monte
/// Carlo over independent pairs `(theta, y)`.
pub fn apply_general_sphere_mean(
    kernel: &Kernel,
    f: &TestFunction,
    r: f64,
    space: &HeisenbergSpace,
    mc: &MCSpec,
) -> Result<IntegralResult> {
    require_linear(kernel)?;
    if !f.support().is_bounded() {
        return Err(Error::Unsupported(
            "Monte Carlo application needs a bounded support".into(),
        ));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!(
            "radius must be finite and positive, got {r}"
        )));
    }
    let sampler = SphereBallSampler {
        sphere: SphereSampler::new(*space),
        ball: KoranyiBallSampler::new(*space, f.support().r_max)?,
    };
    mc_integrate(
        |(theta, y)| {
            let v = f.eval(y);
            if v == 0.0 {
                0.0
            } else {
                let x = theta.dilate_unchecked(r);
                kernel
                    .eval(space, &x, std::slice::from_ref(y))
                    .unwrap_or(f64::NAN)
                    * v
            }
        },
        &sampler,
        mc,
    )
}

struct SphereBallSampler {
    sphere: SphereSampler,
    ball: KoranyiBallSampler,
}

impl DomainSampler for SphereBallSampler {
    type Point = (GroupPoint, GroupPoint);

    fn measure(&self) -> f64 {
        self.ball.measure()
    }

    fn draw(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Self::Point {
        let theta = self.sphere.draw(rng);
        (theta, self.ball.draw(rng))
    }
}

/// `Tf` as a radial test function, with the sampled angular mean for
/// product inputs (`T(R A) = mean(A) T(R)` for radial-profile kernels).
#[derive(Debug, Clone)]
pub struct OperatorImage {
    pub function: TestFunction,
    pub angular_mean: Option<IntegralResult>,
}

pub fn image(
    kernel: &Kernel,
    f: &TestFunction,
    space: &HeisenbergSpace,
    cfg: &NormConfig,
) -> Result<OperatorImage> {
    require_linear(kernel)?;
    let (radial, angular_mean) = match f.form() {
        Form::Radial(_) => (f.clone(), None),
        Form::Product { .. } => {
            let r = radialize(f, space, &cfg.mc)?;
            (r.function, r.angular_mean)
        }
        Form::General(_) => {
            return Err(Error::Unsupported(
                "operator images need radial or product inputs".into(),
            ));
        }
    };
    let profile = match radial.form() {
        Form::Radial(p) => p.clone(),
        _ => unreachable!("radialize returns radial functions"),
    };
    let support = radial.support();
    let envelope = radial.envelope().clone();
    let quad = cfg.quad.tightened(0.1);
    // convergence does not depend on the radius; fail early with the cause
    radial_image_value(
        kernel,
        profile.as_ref(),
        support,
        &envelope,
        1.0,
        space,
        &quad,
    )?;

    let q = space.qf();
    let a0 = if support.r_min > 0.0 {
        Some(f64::INFINITY)
    } else {
        envelope.origin_power
    };
    let a_inf = if support.is_bounded() {
        Some(-f64::INFINITY)
    } else {
        envelope.tail_power
    };
    let image_envelope = Envelope {
        origin_power: a0.map(|a| a.min(kernel.tail_decay(q) - q)),
        tail_power: a_inf.map(|a| a.max(-q - kernel.origin_power())),
        breakpoints: image_breakpoints(&kernel.breakpoints(), support, &envelope.breakpoints),
    };
    let (k, sp) = (kernel.clone(), *space);
    let env = envelope.clone();
    let function = TestFunction::radial(
        move |r| match radial_image_value(&k, profile.as_ref(), support, &env, r, &sp, &quad) {
            Ok(v) => v.value,
            Err(Error::Accuracy { best, .. }) => best.value,
            Err(_) => f64::NAN,
        },
        Support::full(),
    )
    .with_powers(image_envelope.origin_power, image_envelope.tail_power)
    .with_breakpoints(image_envelope.breakpoints);
    Ok(OperatorImage {
        function,
        angular_mean,
    })
}

/// Radii where `Tf` can kink: a support edge or profile kink of `f` meets a
/// kernel kink.
fn image_breakpoints(kernel_breaks: &[f64], support: Support, f_breaks: &[f64]) -> Vec<f64> {
    let mut edges: Vec<f64> = f_breaks.to_vec();
    if support.r_min > 0.0 {
        edges.push(support.r_min);
    }
    if support.is_bounded() {
        edges.push(support.r_max);
    }
    let mut out: Vec<f64> = kernel_breaks
        .iter()
        .flat_map(|c| edges.iter().map(move |s| s / c))
        .filter(|b| b.is_finite() && *b > 0.0)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn radial_profiles(fs: &[TestFunction]) -> Result<Vec<RadialFn>> {
    fs.iter()
        .map(|f| match f.form() {
            Form::Radial(p) => Ok(p.clone()),
            _ => Err(Error::invalid(
                "multilinear application needs radial inputs",
            )),
        })
        .collect()
}

/// `T_m(f_1, ..., f_m)` at radius `x_radius` by nested quadrature of
///
/// ```text
/// omega_Q^m int prod_i f_i(r rho_i) rho_i^{Q-1} / (1 + sum_i rho_i^Q)^m d rho
/// ```
pub fn apply_mlinear(
    fs: &[TestFunction],
    x_radius: f64,
    space: &HeisenbergSpace,
    quad: &QuadratureSpec,
) -> Result<IntegralResult> {
    let m = fs.len();
    if m == 0 {
        return Err(Error::invalid("need at least one input"));
    }
    if m > crate::numerics::quadrature::MAX_NESTED_DIMS {
        return Err(Error::Unsupported(format!(
            "nested quadrature covers m <= 3, got m = {m}; use the Monte Carlo path"
        )));
    }
    if !(x_radius > 0.0) || !x_radius.is_finite() {
        return Err(Error::invalid(format!(
            "radius must be finite and positive, got {x_radius}"
        )));
    }
    let profiles = radial_profiles(fs)?;
    let q = space.qf();
    let r = x_radius;
    let mut dims = Vec::with_capacity(m);
    for (j, f) in fs.iter().enumerate() {
        let s = f.support();
        let lower = if s.r_min == 0.0 {
            match f.envelope().origin_power.map(|a| a + q - 1.0) {
                Some(e) if e <= -1.0 => {
                    return Err(Error::Divergence {
                        endpoint: Endpoint::Origin,
                        detail: format!("input {j} behaves like r^{}", e - q + 1.0),
                    })
                }
                Some(e) if e < 0.0 => Some(-e),
                _ => None,
            }
        } else {
            None
        };
        let upper = if s.is_bounded() {
            None
        } else {
            slot_tail_decay(fs, j, q)?
        };
        dims.push(NestedDim::new(s.r_min / r, s.r_max / r).with_singularities(lower, upper));
    }
    let kernel = Kernel::MultilinearHilbert { m };
    let integrand = |rho: &[f64]| {
        let mut v = 1.0;
        for ((p, f), &x) in profiles.iter().zip(fs).zip(rho) {
            if !f.support().contains(r * x) {
                return 0.0;
            }
            v *= p(r * x) * x.powf(q - 1.0);
            if v == 0.0 {
                return 0.0;
            }
        }
        v * kernel.profile(rho, q)
    };
    let result = integrate_nested(integrand, &dims, quad)?;
    Ok(result.scaled(space.sphere_mass().powi(m as i32)))
}

/// Decay exponent in `rho_j` once the slots after `j` are integrated out.
fn slot_tail_decay(fs: &[TestFunction], j: usize, q: f64) -> Result<Option<f64>> {
    let m = fs.len();
    let Some(a_j) = fs[j].envelope().tail_power else {
        return Ok(None);
    };
    let mut s = m as f64;
    for f in &fs[j + 1..] {
        if f.support().is_bounded() {
            continue;
        }
        match f.envelope().tail_power {
            Some(a) => s -= ((q + a) / q).max(0.0),
            None => return Ok(None),
        }
    }
    let decay = q * s - (q - 1.0 + a_j);
    if decay <= 1.0 {
        return Err(Error::Divergence {
            endpoint: Endpoint::Infinity,
            detail: format!("input {j} decays too slowly (integrand ~ rho^-{decay})"),
        });
    }
    // vanishing tails need no substitution
    Ok(decay.is_finite().then_some(decay))
}

/// `T_m(f_1, ..., f_m)` as a radial test function.
pub fn mlinear_image(
    fs: &[TestFunction],
    space: &HeisenbergSpace,
    cfg: &NormConfig,
) -> Result<TestFunction> {
    let quad = cfg.quad.tightened(0.1);
    apply_mlinear(fs, 1.0, space, &quad)?;
    let q = space.qf();
    let mut origin = Some(0.0);
    let mut tail = Some(0.0);
    let all_touch_origin = fs.iter().all(|f| f.support().r_min == 0.0);
    for f in fs {
        let env = f.envelope();
        if all_touch_origin {
            origin = origin.zip(env.origin_power).map(|(o, a)| o + a);
        }
        let a_inf = if f.support().is_bounded() {
            Some(-f64::INFINITY)
        } else {
            env.tail_power
        };
        tail = tail.zip(a_inf).map(|(t, a)| t + a.max(-q));
    }
    let origin = origin.map(|o: f64| o.min(0.0));
    let inputs = fs.to_vec();
    let sp = *space;
    Ok(TestFunction::radial(
        move |r| match apply_mlinear(&inputs, r, &sp, &quad) {
            Ok(v) => v.value,
            Err(Error::Accuracy { best, .. }) => best.value,
            Err(_) => f64::NAN,
        },
        Support::full(),
    )
    .with_powers(origin, tail))
}

/// `||T(f_1..f_m)||_{out} / prod_i ||f_i||_{in_i}` with its error estimate.
///
/// `params_in` holds one entry per input or a single entry for all.
pub fn operator_ratio(
    kernel: &Kernel,
    inputs: &[TestFunction],
    params_in: &[MixedNormParams],
    params_out: MixedNormParams,
    space: &HeisenbergSpace,
    cfg: &NormConfig,
) -> Result<IntegralResult> {
    let m = kernel.arity();
    if inputs.len() != m {
        return Err(Error::invalid(format!(
            "kernel {} takes {m} inputs, got {}",
            kernel.name(),
            inputs.len()
        )));
    }
    if params_in.len() != 1 && params_in.len() != m {
        return Err(Error::invalid("params_in needs one entry or one per input"));
    }
    // images are sampled at the inner tolerance
    let mut rel = 0.1 * cfg.quad.rel_tol;
    let image_fn = if m == 1 {
        let img = image(kernel, &inputs[0], space, cfg)?;
        if let Some(mean) = img.angular_mean {
            rel += mean.relative_error();
        }
        img.function
    } else {
        match kernel {
            Kernel::MultilinearHilbert { .. } => mlinear_image(inputs, space, cfg)?,
            _ => {
                return Err(Error::Unsupported(format!(
                    "no multilinear image for {}",
                    kernel.name()
                )))
            }
        }
    };
    let numerator = mixed_norm(&image_fn, params_out, space, cfg)?;
    rel += numerator.relative_error();
    let mut denominator = 1.0;
    let mut evaluations = numerator.evaluations;
    for (i, f) in inputs.iter().enumerate() {
        let params = params_in[if params_in.len() == 1 { 0 } else { i }];
        let norm = mixed_norm(f, params, space, cfg)?;
        rel += norm.relative_error();
        denominator *= norm.value;
        evaluations += norm.evaluations;
    }
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(Error::domain(format!(
            "input norm product is {denominator}"
        )));
    }
    let value = numerator.value / denominator;
    Ok(IntegralResult {
        value,
        error_estimate: value * rel,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixed::{extremizer_family, ExtremizerSide};
    use std::f64::consts::{LN_2, PI};

    fn h1() -> HeisenbergSpace {
        HeisenbergSpace::new(1).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn hilbert_on_indicator() {
        let f = TestFunction::ball_indicator(1.0).unwrap();
        let v = apply_radial(&Kernel::Hilbert, &f, 1.0, &h1(), &quad()).unwrap();
        assert!(rel(v.value, PI * PI / 2.0 * LN_2) < 1e-10);
        assert!(rel(v.value, 3.420_544_231_928_558) < 1e-10);
    }

    #[test]
    fn hlp_on_indicator_is_ball_volume() {
        let s = h1();
        let f = TestFunction::ball_indicator(1.0).unwrap();
        let v = apply_radial(&Kernel::Hlp, &f, 1.0, &s, &quad()).unwrap();
        assert!(rel(v.value, s.ball_volume()) < 1e-10);
    }

    #[test]
    fn zero_input_gives_zero() {
        let s = h1();
        for k in [Kernel::Hilbert, Kernel::Hlp] {
            assert_eq!(
                apply_radial(&k, &TestFunction::zero(), 2.0, &s, &quad())
                    .unwrap()
                    .value,
                0.0
            );
        }
        let f = TestFunction::ball_indicator(1.0).unwrap();
        let v = apply_mlinear(&[f, TestFunction::zero()], 1.0, &s, &quad()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn kernel_invariants() {
        let s = h1();
        for k in [
            Kernel::Hilbert,
            Kernel::Hlp,
            Kernel::MultilinearHilbert { m: 2 },
            Kernel::MultilinearHilbert { m: 3 },
        ] {
            let check = k.check_invariants(&s, 1000, 3).unwrap();
            assert!(check.passes(1e-10), "{check:?}");
        }
    }

    #[test]
    fn mlinear_m1_matches_hilbert() {
        let s = h1();
        let f = TestFunction::radial(|r| (-r).exp(), Support::new(0.0, 3.0).unwrap())
            .with_powers(Some(0.0), None);
        for r in [0.3, 1.0, 2.5] {
            let a = apply_radial(&Kernel::Hilbert, &f, r, &s, &quad())
                .unwrap()
                .value;
            let b = apply_mlinear(std::slice::from_ref(&f), r, &s, &quad())
                .unwrap()
                .value;
            assert!(rel(a, b) < 1e-10);
        }
    }

    #[test]
    fn bilinear_indicator_value() {
        let s = h1();
        let f = TestFunction::ball_indicator(1.0).unwrap();
        let v = apply_mlinear(&[f.clone(), f], 1.0, &s, &quad()).unwrap();
        // high-precision reference for omega^2 int_[0,1]^2 r^3 s^3 / (1 + r^4 + s^4)^2
        assert!(rel(v.value, 7.005_712_296_076_503) < 1e-9);
    }

    #[test]
    fn m4_is_unsupported() {
        let f = TestFunction::ball_indicator(1.0).unwrap();
        let fs = vec![f; 4];
        assert!(matches!(
            apply_mlinear(&fs, 1.0, &h1(), &quad()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn general_path_matches_radial() {
        let s = h1();
        let f = TestFunction::ball_indicator(1.0).unwrap();
        let x = s.reference_point().dilate(1.5).unwrap();
        let mc = MCSpec::new(200_000, 17, 16).unwrap();
        for k in [Kernel::Hilbert, Kernel::Hlp] {
            let exact = apply_radial(&k, &f, 1.5, &s, &quad()).unwrap().value;
            let est = apply_general(&k, &f, &x, &s, &mc).unwrap();
            assert!(
                (est.value - exact).abs() <= 3.0 * est.error_estimate,
                "{k:?}"
            );
        }
    }

    #[test]
    fn dilation_covariance() {
        // T(f o delta_l)(x) = Tf(delta_l x)
        let s = h1();
        let f = TestFunction::product(
            |r| 1.0 + r,
            |t| 1.0 + t.coords()[0],
            Support::new(0.0, 2.0).unwrap(),
        );
        let x = s.point(vec![0.4, -0.3, 0.5]).unwrap();
        let mc = MCSpec::new(100_000, 8, 8).unwrap();
        let lambda = 1.7;
        let a = apply_general(&Kernel::Hilbert, &f.dilated(lambda).unwrap(), &x, &s, &mc).unwrap();
        let b = apply_general(&Kernel::Hilbert, &f, &x.dilate(lambda).unwrap(), &s, &mc).unwrap();
        assert!((a.value - b.value).abs() <= 3.0 * (a.error_estimate + b.error_estimate));
    }

    #[test]
    fn ratio_invariances() {
        let s = h1();
        let cfg = NormConfig::default();
        let pr = MixedNormParams::new(2.0, 2.0).unwrap();
        let f = extremizer_family(&s, 2.0, 0.2, ExtremizerSide::Inner).unwrap();
        let base = operator_ratio(
            &Kernel::Hilbert,
            std::slice::from_ref(&f),
            &[pr],
            pr,
            &s,
            &cfg,
        )
        .unwrap();
        assert!(base.value <= PI.powi(3) / 2.0 + base.error_estimate);
        let dil = operator_ratio(
            &Kernel::Hilbert,
            &[f.dilated(3.0).unwrap()],
            &[pr],
            pr,
            &s,
            &cfg,
        )
        .unwrap();
        assert!(rel(dil.value, base.value) < 1e-8);
        let scaled =
            operator_ratio(&Kernel::Hilbert, &[f.scaled(4.0)], &[pr], pr, &s, &cfg).unwrap();
        assert!(rel(scaled.value, base.value) < 1e-10);
    }

    #[test]
    fn ratio_of_zero_is_domain_error() {
        let s = h1();
        let pr = MixedNormParams::new(2.0, 2.0).unwrap();
        let err = operator_ratio(
            &Kernel::Hlp,
            &[TestFunction::zero()],
            &[pr],
            pr,
            &s,
            &NormConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn custom_kernel_reproduces_hlp() {
        let s = h1();
        let q = s.qf();
        let k = Kernel::custom(
            "hlp-copy",
            move |r: f64| 1.0 / r.powf(q).max(1.0),
            0.0,
            q,
            vec![1.0],
        )
        .unwrap();
        let f = TestFunction::radial(|r| 1.0 / (1.0 + r * r), Support::new(0.0, 5.0).unwrap())
            .with_powers(Some(0.0), None);
        for r in [0.5, 1.0, 3.0] {
            let a = apply_radial(&k, &f, r, &s, &quad()).unwrap().value;
            let b = apply_radial(&Kernel::Hlp, &f, r, &s, &quad())
                .unwrap()
                .value;
            assert!(rel(a, b) < 1e-12);
        }
    }

    #[test]
    fn divergent_application_is_reported() {
        let s = h1();
        let f = TestFunction::power(-1.5, Support::new(1.0, f64::INFINITY).unwrap());
        // integrand ~ rho^{-1.5 + 3 - 4}: fine
        assert!(apply_radial(&Kernel::Hilbert, &f, 1.0, &s, &quad()).is_ok());
        let f = TestFunction::power(0.5, Support::new(1.0, f64::INFINITY).unwrap());
        let err = apply_radial(&Kernel::Hilbert, &f, 1.0, &s, &quad()).unwrap_err();
        assert!(matches!(
            err,
            Error::Divergence {
                endpoint: Endpoint::Infinity,
                ..
            }
        ));
    }
}
