//! Three independent routes to the volume of the unit Korányi ball.

use heisenberg_core::group::horizontal_sphere_area;
use heisenberg_core::numerics::{integrate_1d, mc_integrate, BoxSampler, MCSpec, QuadratureSpec};
use heisenberg_core::{unit_ball_volume, HeisenbergSpace};
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub n: usize,
    pub closed_form: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
    pub monte_carlo: f64,
    pub monte_carlo_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub quadrature_rel_gap: f64,
    /// `|mc - closed| / standard error`.
    pub monte_carlo_z: f64,
    /// Printed literature value over the computed volume (informational).
    pub printed_ratio: f64,
}

impl VolumeReport {
    pub fn passes(&self, quad_tol: f64) -> bool {
        self.quadrature_rel_gap <= quad_tol && self.monte_carlo_z <= 3.0
    }
}

/// `area(S^{2n-1}) int_0^1 rho^{2n-1} 2 sqrt(1 - rho^4) d rho`.
pub fn ball_volume_quadrature(
    n: usize,
    quad: &QuadratureSpec,
) -> Result<heisenberg_core::numerics::IntegralResult> {
    let q = integrate_1d(
        |r: f64| r.powi(2 * n as i32 - 1) * 2.0 * (1.0 - r.powi(4)).max(0.0).sqrt(),
        0.0,
        1.0,
        &quad.with_singularities(None, Some(0.5)),
    )?;
    Ok(q.scaled(horizontal_sphere_area(n)))
}

/// Indicator of `|z|^4 + t^2 <= 1` sampled in the bounding box.
pub fn ball_volume_monte_carlo(
    n: usize,
    mc: &MCSpec,
) -> Result<heisenberg_core::numerics::IntegralResult> {
    let space = HeisenbergSpace::new(n)?;
    let boxed = BoxSampler::koranyi_bounding_box(&space);
    Ok(mc_integrate(
        |c: &Vec<f64>| {
            let z2: f64 = c[..2 * n].iter().map(|v| v * v).sum();
            if z2 * z2 + c[2 * n] * c[2 * n] <= 1.0 {
                1.0
            } else {
                0.0
            }
        },
        &boxed,
        mc,
    )?)
}

pub fn volume_check(n: usize, quad: &QuadratureSpec, mc: &MCSpec) -> Result<VolumeReport> {
    let closed = unit_ball_volume(n)?;
    let q = ball_volume_quadrature(n, quad)?;
    let m = ball_volume_monte_carlo(n, mc)?;
    Ok(VolumeReport {
        n,
        closed_form: closed.lebesgue,
        quadrature: q.value,
        quadrature_error: q.error_estimate,
        monte_carlo: m.value,
        monte_carlo_error: m.error_estimate,
        samples: mc.sample_count,
        seed: mc.seed,
        quadrature_rel_gap: ((q.value - closed.lebesgue) / closed.lebesgue).abs(),
        monte_carlo_z: (m.value - closed.lebesgue).abs() / m.error_estimate,
        printed_ratio: closed.printed_ratio(),
    })
}
