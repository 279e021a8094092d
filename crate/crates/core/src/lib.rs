//! Numerical toolkit for integral operators on the Heisenberg group `H^n`.
//!
//! * [`group`]: group law, dilations, Korányi norm, polar coordinates and
//!   unit-ball measure.
//! * [`numerics`]: Gamma/Beta, adaptive quadrature, Monte Carlo.
//! * [`mixed`]: test functions and mixed radial-angular norms.
//! * [`operators`]: homogeneous-kernel, multilinear Hilbert and
//!   Hardy–Littlewood–Pólya operators applied to test functions.
//! * [`constants`]: closed forms of the sharp operator constants.

pub mod constants;
pub mod error;
pub mod group;
pub mod mixed;
pub mod numerics;
pub mod operators;

pub use error::{Endpoint, Error, Result};
pub use group::{
    polar_decompose, sample_ball, sample_sphere, unit_ball_volume, BallVolume, GroupPoint,
    HeisenbergSpace, HorizontalRotation, PolarPoint,
};
