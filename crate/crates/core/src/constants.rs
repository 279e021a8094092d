//! Closed forms of the sharp operator constants, each paired with an
//! independent quadrature evaluation.
//!
//! With `omega = omega_Q` and the angular prefactor
//! `P = omega^{1/pbar_out - 1/pbar_in}`:
//!
//! ```text
//! E   = P omega int_0^inf k(rho) rho^{Q-1-Q/p} d rho       (radial-profile kernel)
//!     = P (omega/Q) pi / sin(pi/p)                         (Hilbert)
//! G   = P omega Q / ((Q - Q/p) (Q/p))                      (Hardy–Littlewood–Pólya)
//! I_m(a, b) = prod Gamma(1 - b_i) Gamma(a - m + sum b_i) / Gamma(a)
//! D_m = P (omega/Q)^m I_m(m, 1/p_1, ..., 1/p_m)
//! ```

use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::HeisenbergSpace;
use crate::mixed::{radial_integral, NormConfig, Support};
use crate::numerics::quadrature::MAX_NESTED_DIMS;
use crate::numerics::{
    beta_fn, integrate_1d, integrate_nested, ln_gamma, IntegralResult, NestedDim, QuadratureSpec,
};
use crate::operators::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Hilbert,
    Hlp,
    Mlinear,
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hilbert" => Ok(Self::Hilbert),
            "hlp" => Ok(Self::Hlp),
            "mlinear" => Ok(Self::Mlinear),
            _ => Err(Error::invalid(format!(
                "unknown operator '{s}' (expected hilbert, hlp or mlinear)"
            ))),
        }
    }
}

impl OperatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Hilbert => "hilbert",
            Self::Hlp => "hlp",
            Self::Mlinear => "mlinear",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRequest {
    pub space: HeisenbergSpace,
    pub p: f64,
    pub p_bar_in: f64,
    pub p_bar_out: f64,
    pub operator: OperatorKind,
    pub m: usize,
    pub p_list: Option<Vec<f64>>,
}

impl ConstantRequest {
    /// Linear request with equal angular exponents `p_bar_in = p_bar_out = p`.
    pub fn linear(space: HeisenbergSpace, operator: OperatorKind, p: f64) -> Self {
        Self {
            space,
            p,
            p_bar_in: p,
            p_bar_out: p,
            operator,
            m: 1,
            p_list: None,
        }
    }

    pub fn with_p_bars(mut self, p_bar_in: f64, p_bar_out: f64) -> Self {
        self.p_bar_in = p_bar_in;
        self.p_bar_out = p_bar_out;
        self
    }

    /// Multilinear request; without `p_list` every slot gets `p_i = m p`.
    pub fn multilinear(space: HeisenbergSpace, p: f64, m: usize, p_list: Option<Vec<f64>>) -> Self {
        Self {
            space,
            p,
            p_bar_in: p,
            p_bar_out: p,
            operator: OperatorKind::Mlinear,
            m,
            p_list,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::invalid(format!(
                "p must lie in (1, inf), got {}",
                self.p
            )));
        }
        for (name, v) in [("p_bar_in", self.p_bar_in), ("p_bar_out", self.p_bar_out)] {
            if !(v >= 1.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must lie in [1, inf), got {v}"
                )));
            }
        }
        if self.m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if let Some(list) = &self.p_list {
            if list.len() != self.m {
                return Err(Error::invalid(format!(
                    "p_list has {} entries for m = {}",
                    list.len(),
                    self.m
                )));
            }
            let sum: f64 = list.iter().map(|p| 1.0 / p).sum();
            if (sum - 1.0 / self.p).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "sum of 1/p_i is {sum}, but 1/p = {}",
                    1.0 / self.p
                )));
            }
        }
        Ok(())
    }

    /// `p_1..p_m`, defaulting to `m p` in every slot.
    pub fn slot_exponents(&self) -> Vec<f64> {
        self.p_list
            .clone()
            .unwrap_or_else(|| vec![self.m as f64 * self.p; self.m])
    }

    fn prefactor(&self) -> f64 {
        self.space
            .sphere_mass()
            .powf(1.0 / self.p_bar_out - 1.0 / self.p_bar_in)
    }

    /// Exponent of `omega` in the constant, used to re-express it with the
    /// printed `Omega_Q`.
    fn omega_exponent(&self) -> f64 {
        self.m as f64 + 1.0 / self.p_bar_out - 1.0 / self.p_bar_in
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpConstantReport {
    pub constant: String,
    pub closed_form_value: f64,
    /// `None` for multilinear requests with `m > QUADRATURE_CHECK_MAX_M`.
    pub quadrature_value: Option<f64>,
    pub quadrature_error: Option<f64>,
    pub relative_gap: Option<f64>,
    pub omega_convention: String,
    pub omega: f64,
    /// The closed form re-evaluated with `Q` times the printed ball volume.
    pub printed_omega_value: f64,
    /// Operator norm between the mixed spaces; differs from
    /// `closed_form_value` only for multilinear requests.
    pub operator_norm: f64,
    pub notes: Vec<String>,
}

fn report(
    req: &ConstantRequest,
    constant: &str,
    closed: f64,
    quad: Option<IntegralResult>,
    operator_norm: f64,
    mut notes: Vec<String>,
) -> SharpConstantReport {
    let space = &req.space;
    let omega = space.sphere_mass();
    let printed_omega = space.qf() * space.printed_ball_volume();
    notes.push(format!(
        "printed Omega_Q = {:.12} is {:.6} times the Lebesgue ball volume",
        space.printed_ball_volume(),
        space.printed_ball_volume() / space.ball_volume()
    ));
    SharpConstantReport {
        constant: constant.to_string(),
        closed_form_value: closed,
        quadrature_value: quad.map(|q| q.value),
        quadrature_error: quad.map(|q| q.error_estimate),
        relative_gap: quad.map(|q| (closed - q.value).abs() / closed.abs().max(f64::MIN_POSITIVE)),
        omega_convention: "omega_Q = Q * Lebesgue volume of the unit Koranyi ball".into(),
        omega,
        printed_omega_value: closed * (printed_omega / omega).powf(req.omega_exponent()),
        operator_norm,
        notes,
    }
}

/// Constant of a linear radial-profile kernel against `|y|_h^{-Q/p}`.
pub fn kernel_constant(
    req: &ConstantRequest,
    kernel: &Kernel,
    quad: &QuadratureSpec,
) -> Result<SharpConstantReport> {
    req.validate()?;
    if kernel.arity() != 1 {
        return Err(Error::invalid(
            "kernel_constant takes a linear kernel; use multilinear_constant",
        ));
    }
    let space = &req.space;
    let q = space.qf();
    let omega = space.sphere_mass();
    let s = q - 1.0 - q / req.p;
    let h = |rho: f64| kernel.profile(&[rho], q) * rho.powf(s);
    let integral = radial_integral(
        h,
        Support::full(),
        Some(kernel.origin_power() + s),
        Some(s - kernel.tail_decay(q)),
        &kernel.breakpoints(),
        quad,
        NormConfig::default().divergence_ratio,
    )?;
    let quad_value = integral.scaled(omega * req.prefactor());
    let mut notes = vec!["kernel homogeneity fixed at -Q".to_string()];
    let closed = match kernel {
        Kernel::Hilbert => req.prefactor() * omega / q * PI / (PI / req.p).sin(),
        Kernel::Hlp => hlp_closed_form(req),
        _ => {
            notes.push(
                "no closed form for this kernel; closed_form_value is the quadrature value".into(),
            );
            quad_value.value
        }
    };
    Ok(report(
        req,
        &format!("E[{}]", kernel.name()),
        closed,
        Some(quad_value),
        closed,
        notes,
    ))
}

fn hlp_closed_form(req: &ConstantRequest) -> f64 {
    let q = req.space.qf();
    let omega = req.space.sphere_mass();
    req.prefactor() * omega * q / ((q - q / req.p) * (q / req.p))
}

/// `I_0 = omega int_0^1 rho^{Q-1-Q/p}` and `I_1 = omega int_1^inf rho^{-1-Q/p}`
/// (without the angular prefactor).
pub fn hlp_split(
    space: &HeisenbergSpace,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<(IntegralResult, IntegralResult)> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("p must lie in (1, inf), got {p}")));
    }
    let q = space.qf();
    let omega = space.sphere_mass();
    let s = q - 1.0 - q / p;
    let lower = if s < 0.0 { Some(-s) } else { None };
    let i0 = integrate_1d(
        |r| r.powf(s),
        0.0,
        1.0,
        &quad.with_singularities(lower, None),
    )?;
    let i1 = integrate_1d(
        |r| r.powf(-1.0 - q / p),
        1.0,
        f64::INFINITY,
        &quad.with_singularities(None, Some(1.0 + q / p)),
    )?;
    Ok((i0.scaled(omega), i1.scaled(omega)))
}

/// Hardy–Littlewood–Pólya constant, with the `I_0 + I_1` quadrature split.
pub fn hlp_constant(req: &ConstantRequest, quad: &QuadratureSpec) -> Result<SharpConstantReport> {
    req.validate()?;
    let (i0, i1) = hlp_split(&req.space, req.p, quad)?;
    let quad_value = i0.plus(i1).scaled(req.prefactor());
    let closed = hlp_closed_form(req);
    Ok(report(req, "G", closed, Some(quad_value), closed, vec![]))
}

fn check_dirichlet(a: f64, betas: &[f64]) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("I_m needs a > 0, got a = {a}")));
    }
    for (i, &b) in betas.iter().enumerate() {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::domain(format!(
                "I_m needs 0 < beta_{} < 1, got {b}",
                i + 1
            )));
        }
    }
    let shift = a - betas.len() as f64 + betas.iter().sum::<f64>();
    if !(shift > 0.0) {
        return Err(Error::domain(format!(
            "I_m needs a - m + sum(beta) > 0, got {shift}"
        )));
    }
    Ok(shift)
}

/// `I_m(a, beta) = int_{(0,inf)^m} prod t_i^{-beta_i} (1 + sum t_i)^{-a} dt`
/// in Gamma-product form. `I_0 = 1`.
pub fn dirichlet_integral(a: f64, betas: &[f64]) -> Result<f64> {
    let shift = check_dirichlet(a, betas)?;
    let mut log = ln_gamma(shift)? - ln_gamma(a)?;
    for &b in betas {
        log += ln_gamma(1.0 - b)?;
    }
    Ok(log.exp())
}

/// One step of the reduction
/// `I_m(a, beta) = B(1 - beta_m, a + beta_m - 1) I_{m-1}(a - 1 + beta_m, beta_1..beta_{m-1})`.
pub fn dirichlet_recursion_step(a: f64, betas: &[f64]) -> Result<f64> {
    check_dirichlet(a, betas)?;
    let Some((&last, rest)) = betas.split_last() else {
        return Ok(1.0);
    };
    Ok(beta_fn(1.0 - last, a + last - 1.0)? * dirichlet_integral(a - 1.0 + last, rest)?)
}

/// `I_m` by nested quadrature (m <= 3).
pub fn dirichlet_quadrature(
    a: f64,
    betas: &[f64],
    quad: &QuadratureSpec,
) -> Result<IntegralResult> {
    check_dirichlet(a, betas)?;
    let m = betas.len();
    if m == 0 {
        return Ok(IntegralResult::exact(1.0));
    }
    if m > MAX_NESTED_DIMS {
        return Err(Error::Unsupported(format!(
            "nested quadrature covers m <= 3, got {m}"
        )));
    }
    // after integrating the inner slots, slot j decays like t^-(a - (m-1-j) + sum_{i>=j} beta_i)
    let dims: Vec<NestedDim> = (0..m)
        .map(|j| {
            let decay = a - (m - 1 - j) as f64 + betas[j..].iter().sum::<f64>();
            NestedDim::new(0.0, f64::INFINITY).with_singularities(Some(betas[j]), Some(decay))
        })
        .collect();
    let f = |t: &[f64]| {
        let mut v = (1.0 + t.iter().sum::<f64>()).powf(-a);
        for (&ti, &b) in t.iter().zip(betas) {
            v *= ti.powf(-b);
        }
        v
    };
    integrate_nested(f, &dims, quad)
}

/// Largest `m` whose constant report carries a quadrature cross-check;
/// [`dirichlet_quadrature`] itself reaches `m = 3`.
pub const QUADRATURE_CHECK_MAX_M: usize = 2;

/// Multilinear Hilbert constant `D_m` with `a = m` and `beta_i = 1/p_i`.
pub fn multilinear_constant(
    req: &ConstantRequest,
    quad: &QuadratureSpec,
) -> Result<SharpConstantReport> {
    req.validate()?;
    let m = req.m;
    let space = &req.space;
    let q = space.qf();
    let omega = space.sphere_mass();
    let betas: Vec<f64> = req.slot_exponents().iter().map(|p| 1.0 / p).collect();
    let scale = req.prefactor() * (omega / q).powi(m as i32);
    let closed = scale * dirichlet_integral(m as f64, &betas)?;
    // a 3-D nested cross-check costs minutes at report tolerances
    let quad_value = if m <= QUADRATURE_CHECK_MAX_M {
        Some(dirichlet_quadrature(m as f64, &betas, quad)?.scaled(scale))
    } else {
        None
    };
    let mut notes = Vec::new();
    let operator_norm = closed * omega.powf((1.0 - m as f64) / req.p_bar_in);
    if m > 1 {
        notes.push(format!(
            "between the mixed spaces the prefactor is omega^(1/pbar_out - m/pbar_in); operator norm = {operator_norm:.12}"
        ));
    }
    Ok(report(
        req,
        &format!("D[{m}]"),
        closed,
        quad_value,
        operator_norm,
        notes,
    ))
}

/// Dispatch on the request's operator kind.
pub fn sharp_constant(req: &ConstantRequest, quad: &QuadratureSpec) -> Result<SharpConstantReport> {
    match req.operator {
        OperatorKind::Hilbert => kernel_constant(req, &Kernel::Hilbert, quad),
        OperatorKind::Hlp => hlp_constant(req, quad),
        OperatorKind::Mlinear => multilinear_constant(req, quad),
    }
}
