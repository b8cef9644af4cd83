//! Singular quadrature over `ℂ` and the one-variable kernels built on it.

pub mod cauchy;
pub mod gauss;
pub mod quadrature;

use thiserror::Error;

pub use cauchy::{
    audit_orientation, cauchy_transform, dbar_scalar_fd, m1_integral, solution_kernel_integral, solution_kernel_scalar,
    solution_kernel_support, weighted_cauchy, EPSILON,
};
pub use quadrature::{
    certify_support, integrate_plane, integrate_scalar, Disc, DiscKind, PlaneIntegral, QuadratureSpec, Refinement,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge: relative change {achieved:.3e} > {target:.1e} at level {level}")]
    NonConvergent { achieved: f64, target: f64, level: usize },
    #[error("integrand does not vanish outside its declared support: {0}")]
    SupportOverflow(String),
    #[error("kernel is not integrable at 0: sigma {sigma} < -beta_J = -{beta_j}")]
    NonIntegrableAtZero { sigma: i32, beta_j: u32 },
    #[error("delta must lie in [0, 1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("invalid quadrature specification: {0}")]
    InvalidSpec(String),
}
