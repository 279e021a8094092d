//! Special functions, deterministic quadrature and Monte Carlo integration.

pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use montecarlo::{
    mc_integrate, BallProductSampler, BoxSampler, DomainSampler, KoranyiBallSampler, MCSpec,
};
pub use quadrature::{
    integrate_1d, integrate_nested, integrate_pieces, IntegralResult, NestedDim, QuadratureSpec,
    SingularEndpoints,
};
pub use special::{beta_fn, gamma_fn, ln_gamma};
