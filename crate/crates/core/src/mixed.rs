//! Test functions on `H^n` and the mixed radial-angular norm
//!
//! ```text
//! ||f||_{p, pbar} = ( int_0^inf ( int_S |f(delta_r theta)|^pbar d sigma )^{p/pbar} r^{Q-1} dr )^{1/p}
//! ```
//!
//! The sphere measure `sigma` has total mass `omega_Q`. Sphere averages are
//! taken over radially projected uniform ball points, whose law is exactly
//! `sigma / omega_Q`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Endpoint, Error, Result};
use crate::group::{
    draw_sphere_point, polar_decompose, sample_sphere, GroupPoint, HeisenbergSpace,
};
use crate::numerics::montecarlo::substream;
use crate::numerics::{
    integrate_pieces, mc_integrate, DomainSampler, IntegralResult, MCSpec, QuadratureSpec,
};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PointFn = Arc<dyn Fn(&GroupPoint) -> f64 + Send + Sync>;

/// Radial truncation `r_min <= |x|_h <= r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Support {
    pub r_min: f64,
    pub r_max: f64,
}

impl Support {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min >= 0.0) || !r_min.is_finite() || !(r_max > r_min) {
            return Err(Error::invalid(format!(
                "support needs 0 <= r_min < r_max <= inf, got [{r_min}, {r_max}]"
            )));
        }
        Ok(Self { r_min, r_max })
    }

    pub fn full() -> Self {
        Self {
            r_min: 0.0,
            r_max: f64::INFINITY,
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    pub fn is_bounded(&self) -> bool {
        self.r_max.is_finite()
    }
}

/// Declared radial behaviour of `|f|`, used to pick quadrature substitutions
/// and to decide convergence without a truncation sweep.
///
/// `origin_power = a` means `|f| ~ r^a` as `r -> 0`, `tail_power` likewise as
/// `r -> inf`. Breakpoints are radii where `f` has a kink or jump.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Envelope {
    pub origin_power: Option<f64>,
    pub tail_power: Option<f64>,
    pub breakpoints: Vec<f64>,
}

#[derive(Clone)]
pub enum Form {
    Radial(RadialFn),
    Product { radial: RadialFn, angular: PointFn },
    General(PointFn),
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Radial(_) => "Radial",
            Form::Product { .. } => "Product",
            Form::General(_) => "General",
        })
    }
}

/// A function on `H^n`, zero outside its support.
///
/// Product angular factors receive the point `theta` of the unit sphere.
#[derive(Clone, Debug)]
pub struct TestFunction {
    form: Form,
    support: Support,
    envelope: Envelope,
}

impl TestFunction {
    pub fn radial<F>(f: F, support: Support) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            form: Form::Radial(Arc::new(f)),
            support,
            envelope: Envelope::default(),
        }
    }

    pub fn product<R, A>(radial: R, angular: A, support: Support) -> Self
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        A: Fn(&GroupPoint) -> f64 + Send + Sync + 'static,
    {
        Self {
            form: Form::Product {
                radial: Arc::new(radial),
                angular: Arc::new(angular),
            },
            support,
            envelope: Envelope::default(),
        }
    }

    pub fn general<F>(f: F, support: Support) -> Self
    where
        F: Fn(&GroupPoint) -> f64 + Send + Sync + 'static,
    {
        Self {
            form: Form::General(Arc::new(f)),
            support,
            envelope: Envelope::default(),
        }
    }

    pub fn zero() -> Self {
        Self::radial(|_| 0.0, Support::full()).with_powers(Some(0.0), Some(-f64::INFINITY))
    }

    /// `|x|_h^a` on `support`.
    pub fn power(a: f64, support: Support) -> Self {
        Self::radial(move |r| r.powf(a), support).with_powers(Some(a), Some(a))
    }

    /// Indicator of the ball `|x|_h <= radius`.
    pub fn ball_indicator(radius: f64) -> Result<Self> {
        Ok(Self::radial(|_| 1.0, Support::new(0.0, radius)?).with_powers(Some(0.0), None))
    }

    pub fn with_powers(mut self, origin: Option<f64>, tail: Option<f64>) -> Self {
        self.envelope.origin_power = origin;
        self.envelope.tail_power = tail;
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.envelope.breakpoints = breakpoints;
        self
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.form, Form::Radial(_))
    }

    /// Profile value at radius `r` for radial functions (zero off support).
    pub fn radial_value(&self, r: f64) -> Option<f64> {
        match &self.form {
            Form::Radial(f) => Some(if self.support.contains(r) { f(r) } else { 0.0 }),
            _ => None,
        }
    }

    pub fn eval(&self, x: &GroupPoint) -> f64 {
        let r = x.norm();
        if !self.support.contains(r) {
            return 0.0;
        }
        match &self.form {
            Form::Radial(f) => f(r),
            Form::Product { radial, angular } => {
                let theta = match polar_decompose(x) {
                    Ok(polar) => polar.theta,
                    Err(_) => reference_direction(x.n()),
                };
                radial(r) * angular(&theta)
            }
            Form::General(f) => f(x),
        }
    }

    /// The same function seen only through point evaluation.
    pub fn as_general(&self) -> Self {
        let inner = self.clone();
        Self {
            form: Form::General(Arc::new(move |x| inner.eval(x))),
            support: self.support,
            envelope: self.envelope.clone(),
        }
    }

    /// `x -> f(delta_lambda x)`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        let form = match &self.form {
            Form::Radial(f) => {
                let f = f.clone();
                Form::Radial(Arc::new(move |r| f(lambda * r)))
            }
            Form::Product { radial, angular } => {
                let radial = radial.clone();
                Form::Product {
                    radial: Arc::new(move |r| radial(lambda * r)),
                    angular: angular.clone(),
                }
            }
            Form::General(f) => {
                let f = f.clone();
                Form::General(Arc::new(move |x| f(&x.dilate_unchecked(lambda))))
            }
        };
        Ok(Self {
            form,
            support: Support {
                r_min: self.support.r_min / lambda,
                r_max: self.support.r_max / lambda,
            },
            envelope: Envelope {
                breakpoints: self
                    .envelope
                    .breakpoints
                    .iter()
                    .map(|b| b / lambda)
                    .collect(),
                ..self.envelope.clone()
            },
        })
    }

    /// `c f`.
    pub fn scaled(&self, c: f64) -> Self {
        let form = match &self.form {
            Form::Radial(f) => {
                let f = f.clone();
                Form::Radial(Arc::new(move |r| c * f(r)))
            }
            Form::Product { radial, angular } => {
                let radial = radial.clone();
                Form::Product {
                    radial: Arc::new(move |r| c * radial(r)),
                    angular: angular.clone(),
                }
            }
            Form::General(f) => {
                let f = f.clone();
                Form::General(Arc::new(move |x| c * f(x)))
            }
        };
        Self {
            form,
            support: self.support,
            envelope: self.envelope.clone(),
        }
    }
}

fn reference_direction(n: usize) -> GroupPoint {
    let mut coords = vec![0.0; 2 * n + 1];
    coords[0] = 1.0;
    GroupPoint::new(coords).expect("odd length")
}

/// Exponents of `L^p_{|x|_h} L^pbar_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedNormParams {
    pub p: f64,
    pub p_bar: f64,
}

impl MixedNormParams {
    pub fn new(p: f64, p_bar: f64) -> Result<Self> {
        let params = Self { p, p_bar };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::invalid(format!(
                "p must lie in (1, inf), got {}",
                self.p
            )));
        }
        if !(self.p_bar >= 1.0) || !self.p_bar.is_finite() {
            return Err(Error::invalid(format!(
                "p_bar must lie in [1, inf), got {}",
                self.p_bar
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormConfig {
    pub quad: QuadratureSpec,
    /// Sphere sampling for product angular means and for radialization.
    pub mc: MCSpec,
    /// Angular points per radius for general functions.
    pub shell_samples: usize,
    /// Batches used to estimate the angular sampling error of general norms.
    pub batches: usize,
    /// Truncation sweep flags divergence once successive decade increments
    /// shrink by less than this factor.
    pub divergence_ratio: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureSpec::default(),
            mc: MCSpec::default(),
            shell_samples: 4096,
            batches: 8,
            divergence_ratio: 0.999,
        }
    }
}

/// Uniform law `sigma / omega_Q` on the unit sphere. Its `measure` is one,
/// so [`mc_integrate`] returns sphere means.
#[derive(Debug, Clone, Copy)]
pub struct SphereSampler {
    space: HeisenbergSpace,
}

impl SphereSampler {
    pub fn new(space: HeisenbergSpace) -> Self {
        Self { space }
    }
}

impl DomainSampler for SphereSampler {
    type Point = GroupPoint;

    fn measure(&self) -> f64 {
        1.0
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> GroupPoint {
        draw_sphere_point(&self.space, rng)
    }
}

fn decade_increment<H: Fn(f64) -> f64>(
    h: &H,
    a: f64,
    b: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    match integrate_pieces(h, a, b, &[], &quad.regular()) {
        Ok(r) => Ok(r.value),
        Err(Error::Accuracy { best, .. }) => Ok(best.value),
        Err(e) => Err(e),
    }
}

/// Integrate over two successive decades towards `end`; divergence if the
/// increments fail to shrink.
fn truncation_sweep<H: Fn(f64) -> f64>(
    h: &H,
    support: Support,
    end: Endpoint,
    quad: &QuadratureSpec,
    ratio: f64,
) -> Result<()> {
    let increments = match end {
        Endpoint::Origin => {
            let top = support.r_max.min(1.0);
            [
                decade_increment(h, 1e-2 * top, 1e-1 * top, quad)?,
                decade_increment(h, 1e-3 * top, 1e-2 * top, quad)?,
            ]
        }
        Endpoint::Infinity => {
            let base = support.r_min.max(1.0);
            [
                decade_increment(h, 10.0 * base, 100.0 * base, quad)?,
                decade_increment(h, 100.0 * base, 1000.0 * base, quad)?,
            ]
        }
    };
    let [first, second] = increments;
    if first.abs() > 0.0 && second.abs() >= ratio * first.abs() {
        return Err(Error::Divergence {
            endpoint: end,
            detail: format!("decade increments {first:.6e} then {second:.6e} do not decay"),
        });
    }
    Ok(())
}

/// `int h(r) dr` over `support` for a non-negative `h` with
/// `h ~ r^{origin_exp}` near 0 and `h ~ r^{tail_exp}` at infinity.
///
/// Declared exponents decide convergence and the endpoint substitutions;
/// undeclared ends of an unbounded range go through a truncation sweep.
pub(crate) fn radial_integral<H: Fn(f64) -> f64>(
    h: H,
    support: Support,
    origin_exp: Option<f64>,
    tail_exp: Option<f64>,
    breakpoints: &[f64],
    quad: &QuadratureSpec,
    divergence_ratio: f64,
) -> Result<IntegralResult> {
    let mut lower = None;
    if support.r_min == 0.0 {
        match origin_exp {
            Some(e) if e <= -1.0 => {
                return Err(Error::Divergence {
                    endpoint: Endpoint::Origin,
                    detail: format!("integrand behaves like r^{e}"),
                })
            }
            Some(e) if e < 0.0 => lower = Some(-e),
            Some(_) => {}
            None => truncation_sweep(&h, support, Endpoint::Origin, quad, divergence_ratio)?,
        }
    }
    let mut upper = None;
    if !support.is_bounded() {
        match tail_exp {
            Some(e) if e >= -1.0 => {
                return Err(Error::Divergence {
                    endpoint: Endpoint::Infinity,
                    detail: format!("integrand behaves like r^{e}"),
                })
            }
            Some(e) if e.is_finite() => upper = Some(-e),
            Some(_) => {}
            None => truncation_sweep(&h, support, Endpoint::Infinity, quad, divergence_ratio)?,
        }
    }
    integrate_pieces(
        h,
        support.r_min,
        support.r_max,
        breakpoints,
        &quad.with_singularities(lower, upper),
    )
}

/// Exponent of `|f|^p r^{Q-1}` given `|f| ~ r^a`.
fn weighted_exponent(a: Option<f64>, p: f64, q: f64) -> Option<f64> {
    a.map(|a| p * a + q - 1.0)
}

/// `int |f(r)|^p r^{Q-1} dr` for a radial profile.
pub(crate) fn radial_lp_integral(
    profile: &(dyn Fn(f64) -> f64 + Send + Sync),
    support: Support,
    envelope: &Envelope,
    p: f64,
    space: &HeisenbergSpace,
    cfg: &NormConfig,
) -> Result<IntegralResult> {
    let q = space.qf();
    let h = |r: f64| {
        let v = profile(r).abs();
        if v == 0.0 {
            0.0
        } else {
            v.powf(p) * r.powf(q - 1.0)
        }
    };
    radial_integral(
        h,
        support,
        weighted_exponent(envelope.origin_power, p, q),
        weighted_exponent(envelope.tail_power, p, q),
        &envelope.breakpoints,
        &cfg.quad,
        cfg.divergence_ratio,
    )
}

/// `prefactor * I^{1/p}` with its propagated error.
fn root_norm(integral: IntegralResult, p: f64, prefactor: f64, extra_rel: f64) -> IntegralResult {
    if integral.value <= 0.0 {
        return IntegralResult {
            value: 0.0,
            error_estimate: prefactor * integral.error_estimate.max(0.0).powf(1.0 / p),
            evaluations: integral.evaluations,
        };
    }
    let value = prefactor * integral.value.powf(1.0 / p);
    IntegralResult {
        value,
        error_estimate: value * (integral.relative_error() / p + extra_rel),
        evaluations: integral.evaluations,
    }
}

/// Mixed radial-angular norm with an error estimate (quadrature error plus
/// angular sampling error).
pub fn mixed_norm(
    f: &TestFunction,
    params: MixedNormParams,
    space: &HeisenbergSpace,
    cfg: &NormConfig,
) -> Result<IntegralResult> {
    params.validate()?;
    let MixedNormParams { p, p_bar } = params;
    let omega = space.sphere_mass();
    match &f.form {
        Form::Radial(profile) => {
            let integral =
                radial_lp_integral(profile.as_ref(), f.support, &f.envelope, p, space, cfg)?;
            Ok(root_norm(integral, p, omega.powf(1.0 / p_bar), 0.0))
        }
        Form::Product { radial, angular } => {
            let integral =
                radial_lp_integral(radial.as_ref(), f.support, &f.envelope, p, space, cfg)?;
            let mean = mc_integrate(
                |theta| angular(theta).abs().powf(p_bar),
                &SphereSampler::new(*space),
                &cfg.mc,
            )?;
            if mean.value <= 0.0 {
                return Ok(IntegralResult {
                    value: 0.0,
                    error_estimate: 0.0,
                    evaluations: integral.evaluations + mean.evaluations,
                });
            }
            let angular_norm = (omega * mean.value).powf(1.0 / p_bar);
            let mut norm = root_norm(integral, p, angular_norm, mean.relative_error() / p_bar);
            norm.evaluations += mean.evaluations;
            Ok(norm)
        }
        Form::General(_) => general_norm(f, params, space, cfg),
    }
}

fn general_norm(
    f: &TestFunction,
    params: MixedNormParams,
    space: &HeisenbergSpace,
    cfg: &NormConfig,
) -> Result<IntegralResult> {
    if cfg.shell_samples == 0 || cfg.batches == 0 || cfg.shell_samples < cfg.batches {
        return Err(Error::invalid(
            "shell_samples must be at least batches >= 1",
        ));
    }
    let MixedNormParams { p, p_bar } = params;
    let q = space.qf();
    let omega = space.sphere_mass();
    let thetas = sample_sphere(space, cfg.shell_samples, cfg.mc.seed);
    let norm_over = |set: &[GroupPoint]| -> Result<IntegralResult> {
        let h = |r: f64| {
            let sum: f64 = set
                .iter()
                .map(|t| f.eval(&t.dilate_unchecked(r)).abs().powf(p_bar))
                .sum();
            let mean = sum / set.len() as f64;
            if mean == 0.0 {
                0.0
            } else {
                (omega * mean).powf(p / p_bar) * r.powf(q - 1.0)
            }
        };
        let integral = radial_integral(
            h,
            f.support,
            weighted_exponent(f.envelope.origin_power, p, q),
            weighted_exponent(f.envelope.tail_power, p, q),
            &f.envelope.breakpoints,
            &cfg.quad,
            cfg.divergence_ratio,
        )?;
        Ok(root_norm(integral, p, 1.0, 0.0))
    };
    let full = norm_over(&thetas)?;
    let b = cfg.batches;
    if b < 2 {
        return Ok(full);
    }
    let n = thetas.len();
    let batch_norms = (0..b)
        .map(|i| norm_over(&thetas[i * n / b..(i + 1) * n / b]).map(|r| r.value))
        .collect::<Result<Vec<f64>>>()?;
    let mean = batch_norms.iter().sum::<f64>() / b as f64;
    let var = batch_norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Ok(IntegralResult {
        error_estimate: full.error_estimate + (var / b as f64).sqrt(),
        ..full
    })
}

/// Spherical average of a function, with the sampled angular mean for
/// product inputs.
#[derive(Debug, Clone)]
pub struct Radialized {
    pub function: TestFunction,
    pub angular_mean: Option<IntegralResult>,
}

/// `g(x) = (1/omega_Q) int_S f(delta_{|x|_h} theta) d sigma(theta)`.
///
/// Radial input comes back unchanged. Product input gives
/// `R(r) * mean(A)` with the Monte Carlo mean and its standard error;
/// general input is averaged over a fixed set of `mc.sample_count` sphere
/// points.
pub fn radialize(f: &TestFunction, space: &HeisenbergSpace, mc: &MCSpec) -> Result<Radialized> {
    mc.validate()?;
    match &f.form {
        Form::Radial(_) => Ok(Radialized {
            function: f.clone(),
            angular_mean: None,
        }),
        Form::Product { radial, angular } => {
            let mean = mc_integrate(|theta| angular(theta), &SphereSampler::new(*space), mc)?;
            let radial = radial.clone();
            let c = mean.value;
            Ok(Radialized {
                function: TestFunction {
                    form: Form::Radial(Arc::new(move |r| c * radial(r))),
                    support: f.support,
                    envelope: f.envelope.clone(),
                },
                angular_mean: Some(mean),
            })
        }
        Form::General(_) => {
            let thetas = Arc::new(sample_sphere(space, mc.sample_count, mc.seed));
            let inner = f.clone();
            let profile = move |r: f64| {
                let sum: f64 = thetas
                    .iter()
                    .map(|t| inner.eval(&t.dilate_unchecked(r)))
                    .sum();
                sum / thetas.len() as f64
            };
            Ok(Radialized {
                function: TestFunction {
                    form: Form::Radial(Arc::new(profile)),
                    support: f.support,
                    envelope: f.envelope.clone(),
                },
                angular_mean: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremizerSide {
    /// `|x|_h^{-Q/p + eps}` on the unit ball.
    Inner,
    /// `|x|_h^{-Q/p - eps}` outside the unit ball.
    Outer,
}

impl std::str::FromStr for ExtremizerSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner" => Ok(Self::Inner),
            "outer" => Ok(Self::Outer),
            _ => Err(Error::invalid(format!("unknown extremizer side '{s}'"))),
        }
    }
}

/// Truncated power `|x|_h^{-Q/p -+ eps}`; its radial integral
/// `int |f|^p r^{Q-1} dr` is `1 / (eps p)` on either side.
pub fn extremizer_family(
    space: &HeisenbergSpace,
    p: f64,
    eps: f64,
    side: ExtremizerSide,
) -> Result<TestFunction> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("p must lie in (1, inf), got {p}")));
    }
    let base = -space.qf() / p;
    Ok(match side {
        ExtremizerSide::Inner => TestFunction::power(base + eps, Support::new(0.0, 1.0)?),
        ExtremizerSide::Outer => TestFunction::power(base - eps, Support::new(1.0, f64::INFINITY)?),
    })
}

/// Smooth truncated radial function `c r^g (1 + r)^a e^{-b r}` on
/// `[0, R]`, drawn from sample `index` of `seed`.
pub fn random_radial_function(seed: u64, index: u64) -> TestFunction {
    let mut rng = substream(seed, index);
    let r_max = rng.gen_range(0.5..3.0);
    let c = rng.gen_range(0.5..2.0);
    let a = rng.gen_range(-1.0..1.0);
    let b = rng.gen_range(0.0..2.0);
    let g = rng.gen_range(-1.0..1.0);
    TestFunction::radial(
        move |r: f64| c * r.powf(g) * (1.0 + r).powf(a) * (-b * r).exp(),
        Support { r_min: 0.0, r_max },
    )
    .with_powers(Some(g), None)
}

/// `random_radial_function(seed, index)` times a random quadratic
/// polynomial in the sphere coordinates `(z_1, t)`.
pub fn random_product_function(seed: u64, index: u64) -> TestFunction {
    let radial = random_radial_function(seed, index);
    let mut rng = substream(seed ^ 0x9e37_79b9_7f4a_7c15, index);
    let c0 = rng.gen_range(0.0..1.0);
    let cs: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let Form::Radial(profile) = radial.form.clone() else {
        unreachable!("radial by construction")
    };
    TestFunction {
        form: Form::Product {
            radial: profile,
            angular: Arc::new(move |theta: &GroupPoint| {
                let (z1, t) = (theta.coords()[0], theta.vertical());
                c0 + cs[0] * z1 + cs[1] * t + cs[2] * z1 * t + cs[3] * theta.horizontal_norm_sq()
            }),
        },
        support: radial.support,
        envelope: radial.envelope,
    }
}
