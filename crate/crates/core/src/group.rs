//! Arithmetic on the Heisenberg group `H^n`.
//!
//! Points live in `R^{2n+1}`: the first `2n` coordinates form the horizontal
//! part `z`, the last one is the vertical coordinate `t`. The group law is
//!
//! ```text
//! x o y = (x_1 + y_1, ..., x_2n + y_2n,
//!          t_x + t_y + 2 sum_j (y_j x_{n+j} - x_j y_{n+j}))
//! ```
//!
//! with identity `0` and inverse `-x`. Dilations scale `z` by `r` and `t` by
//! `r^2`; the Korányi norm `((|z|^2)^2 + t^2)^{1/4}` is homogeneous of degree
//! one under them and Lebesgue measure scales by `r^Q`, `Q = 2n + 2`.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::montecarlo::substream;
use crate::numerics::special::{beta_fn, gamma_fn};

/// Ambient parameters of `H^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergSpace {
    n: usize,
    ball_volume: f64,
    omega: f64,
    printed_ball_volume: f64,
}

impl HeisenbergSpace {
    pub fn new(n: usize) -> Result<Self> {
        let vol = unit_ball_volume(n)?;
        let q = (2 * n + 2) as f64;
        Ok(Self {
            n,
            ball_volume: vol.lebesgue,
            omega: q * vol.lebesgue,
            printed_ball_volume: vol.printed,
        })
    }

    /// A copy whose sphere mass is multiplied by `factor`.
    ///
    /// Only meant for fault-injection runs of the property suites; every
    /// other invariant of the returned value is left as is.
    pub fn with_sphere_mass_factor(mut self, factor: f64) -> Self {
        self.omega *= factor;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension `Q = 2n + 2`.
    pub fn q(&self) -> usize {
        2 * self.n + 2
    }

    pub fn qf(&self) -> f64 {
        self.q() as f64
    }

    /// Number of real coordinates, `2n + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Lebesgue measure of the unit Korányi ball.
    pub fn ball_volume(&self) -> f64 {
        self.ball_volume
    }

    /// Total mass `omega_Q` of the polar sphere measure, `Q * |B(0,1)|`.
    pub fn sphere_mass(&self) -> f64 {
        self.omega
    }

    /// The closed form `2 pi^{n+1/2} Gamma(n/2) / ((n+1) Gamma(n) Gamma((n+1)/2))`
    /// quoted in the literature for the ball volume. It is exactly twice the
    /// Lebesgue volume; it is carried for reporting only.
    pub fn printed_ball_volume(&self) -> f64 {
        self.printed_ball_volume
    }

    /// Sphere mass implied by the printed ball volume, `Q * printed`.
    pub fn printed_sphere_mass(&self) -> f64 {
        self.qf() * self.printed_ball_volume
    }

    pub fn zero(&self) -> GroupPoint {
        GroupPoint {
            coords: vec![0.0; self.dim()],
        }
    }

    /// The reference point `e` with unit first horizontal coordinate.
    pub fn reference_point(&self) -> GroupPoint {
        let mut coords = vec![0.0; self.dim()];
        coords[0] = 1.0;
        GroupPoint { coords }
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<GroupPoint> {
        if coords.len() != self.dim() {
            return Err(Error::invalid(format!(
                "expected {} coordinates for H^{}, got {}",
                self.dim(),
                self.n,
                coords.len()
            )));
        }
        Ok(GroupPoint { coords })
    }
}

/// A point of `H^n` as `2n + 1` real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPoint {
    coords: Vec<f64>,
}

impl GroupPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 || coords.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "a Heisenberg point needs 2n+1 >= 3 coordinates, got {}",
                coords.len()
            )));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn n(&self) -> usize {
        (self.coords.len() - 1) / 2
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }

    pub fn vertical(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn horizontal_norm_sq(&self) -> f64 {
        self.horizontal().iter().map(|v| v * v).sum()
    }

    fn check_same_space(&self, other: &GroupPoint) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {} coordinates",
                self.coords.len(),
                other.coords.len()
            )));
        }
        Ok(())
    }

    /// Group product `self o other`.
    pub fn mul(&self, other: &GroupPoint) -> Result<GroupPoint> {
        self.check_same_space(other)?;
        let n = self.n();
        let (x, y) = (&self.coords, &other.coords);
        let mut twist = 0.0;
        for j in 0..n {
            twist += y[j] * x[n + j] - x[j] * y[n + j];
        }
        let mut coords: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        coords[2 * n] += 2.0 * twist;
        Ok(GroupPoint { coords })
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint {
            coords: self.coords.iter().map(|v| -v).collect(),
        }
    }

    /// Anisotropic dilation `delta_r`.
    pub fn dilate(&self, r: f64) -> Result<GroupPoint> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!(
                "dilation factor must be positive, got {r}"
            )));
        }
        Ok(self.dilate_unchecked(r))
    }

    pub(crate) fn dilate_unchecked(&self, r: f64) -> GroupPoint {
        let last = self.coords.len() - 1;
        let mut coords: Vec<f64> = self.coords.iter().map(|v| v * r).collect();
        coords[last] = self.coords[last] * r * r;
        GroupPoint { coords }
    }

    /// Korányi norm `|x|_h`.
    pub fn norm(&self) -> f64 {
        let z2 = self.horizontal_norm_sq();
        let t = self.vertical();
        // hypot keeps (|z|^4 + t^2) from overflowing for large coordinates
        z2.hypot(t).sqrt()
    }

    /// `d(self, other) = |other^{-1} o self|_h`.
    pub fn distance(&self, other: &GroupPoint) -> Result<f64> {
        Ok(other.inverse().mul(self)?.norm())
    }

    pub fn rotate_horizontal(&self, rotation: &HorizontalRotation) -> Result<GroupPoint> {
        rotation.apply(self)
    }
}

/// An orthogonal map of the horizontal part `R^{2n}`; the vertical
/// coordinate is left fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalRotation {
    dim: usize,
    // row-major dim x dim
    entries: Vec<f64>,
}

impl HorizontalRotation {
    pub const ORTHOGONALITY_TOL: f64 = 1e-10;

    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "rotation needs {}x{} entries, got {}",
                dim,
                dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let dot: f64 = (0..dim)
                    .map(|k| entries[i * dim + k] * entries[j * dim + k])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > Self::ORTHOGONALITY_TOL {
                    return Err(Error::invalid(format!(
                        "matrix is not orthogonal: (R R^T)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    /// Random element of SO(dim) built from Givens rotations over every
    /// coordinate pair.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut rot = Self::identity(dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let angle = rng.gen::<f64>() * 2.0 * PI;
                let (s, c) = angle.sin_cos();
                // left-multiply by the Givens rotation in the (i, j) plane
                for k in 0..dim {
                    let a = rot.entries[i * dim + k];
                    let b = rot.entries[j * dim + k];
                    rot.entries[i * dim + k] = c * a - s * b;
                    rot.entries[j * dim + k] = s * a + c * b;
                }
            }
        }
        rot
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &GroupPoint) -> Result<GroupPoint> {
        if x.horizontal().len() != self.dim {
            return Err(Error::invalid(format!(
                "rotation acts on R^{}, point has {} horizontal coordinates",
                self.dim,
                x.horizontal().len()
            )));
        }
        let h = x.horizontal();
        let mut coords: Vec<f64> = (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|k| self.entries[i * self.dim + k] * h[k])
                    .sum()
            })
            .collect();
        coords.push(x.vertical());
        Ok(GroupPoint { coords })
    }
}

/// `x = delta_r(theta)` with `|theta|_h = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: GroupPoint,
}

impl PolarPoint {
    pub fn compose(&self) -> GroupPoint {
        self.theta.dilate_unchecked(self.r)
    }
}

pub fn polar_decompose(x: &GroupPoint) -> Result<PolarPoint> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::domain("the identity has no polar decomposition"));
    }
    Ok(PolarPoint {
        r,
        theta: x.dilate_unchecked(1.0 / r),
    })
}

/// Unit-ball volume: the Lebesgue value and the printed closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallVolume {
    pub lebesgue: f64,
    pub printed: f64,
}

impl BallVolume {
    pub fn printed_ratio(&self) -> f64 {
        self.printed / self.lebesgue
    }
}

/// Area of the Euclidean unit sphere `S^{2n-1}`.
pub fn horizontal_sphere_area(n: usize) -> f64 {
    2.0 * PI.powi(n as i32) / gamma_fn(n as f64).expect("n >= 1 is not a pole")
}

/// Lebesgue measure of `{ |x|_h <= 1 } in R^{2n+1}`.
///
/// Slicing in `|z| = rho` gives `area(S^{2n-1}) int_0^1 rho^{2n-1} 2 sqrt(1 - rho^4) d rho`
/// and `u = rho^4` turns the integral into `B(n/2, 3/2) / 2`.
pub fn unit_ball_volume(n: usize) -> Result<BallVolume> {
    if n == 0 {
        return Err(Error::invalid("the Heisenberg group needs n >= 1"));
    }
    let nf = n as f64;
    let lebesgue = horizontal_sphere_area(n) * 0.5 * beta_fn(nf / 2.0, 1.5)?;
    let printed = 2.0 * PI.powf(nf + 0.5) * gamma_fn(nf / 2.0)?
        / ((nf + 1.0) * gamma_fn(nf)? * gamma_fn((nf + 1.0) / 2.0)?);
    Ok(BallVolume { lebesgue, printed })
}

pub(crate) fn draw_ball_coords<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut coords = vec![0.0; dim];
    loop {
        for c in coords.iter_mut() {
            *c = 2.0 * rng.gen::<f64>() - 1.0;
        }
        let z2: f64 = coords[..dim - 1].iter().map(|v| v * v).sum();
        let t = coords[dim - 1];
        if z2 * z2 + t * t <= 1.0 {
            return coords;
        }
    }
}

/// Uniform point of the unit Korányi ball for sample index `index`.
pub(crate) fn ball_point(space: &HeisenbergSpace, seed: u64, index: u64) -> GroupPoint {
    let mut rng = substream(seed, index);
    GroupPoint {
        coords: draw_ball_coords(space.dim(), &mut rng),
    }
}

/// `count` uniform samples of the unit Korányi ball, by rejection from the
/// box `[-1, 1]^{2n+1}`. Sample `i` depends only on `(seed, i)`.
pub fn sample_ball(space: &HeisenbergSpace, count: usize, seed: u64) -> Vec<GroupPoint> {
    (0..count as u64)
        .map(|i| ball_point(space, seed, i))
        .collect()
}

/// Points on the unit Korányi sphere distributed as `sigma / omega_Q`.
///
/// Uniform ball samples are projected radially: under `dy = r^{Q-1} dr d sigma`
/// the angular part of a uniform ball point has law `sigma / omega_Q`.
pub fn sample_sphere(space: &HeisenbergSpace, count: usize, seed: u64) -> Vec<GroupPoint> {
    (0..count as u64)
        .map(|i| draw_sphere_point(space, &mut substream(seed, i)))
        .collect()
}

/// Radial projection of a uniform ball point; the origin (probability zero)
/// is redrawn.
pub(crate) fn draw_sphere_point<R: Rng + ?Sized>(
    space: &HeisenbergSpace,
    rng: &mut R,
) -> GroupPoint {
    loop {
        let p = GroupPoint {
            coords: draw_ball_coords(space.dim(), rng),
        };
        if let Ok(polar) = polar_decompose(&p) {
            return polar.theta;
        }
    }
}
