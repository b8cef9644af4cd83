//! Integral solution operators for `∂̄λ = ω` on weighted homogeneous
//! varieties, on product domains, and through the power map `Φ`.
//!
//! All operators share the orientation of [`crate::kernel::EPSILON`]: they
//! return `λ` with `∂̄λ = ε·ω`.

mod phi;
mod product;
mod sigma;
mod weighted;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{Covector, FormError, LpExponent};
use crate::kernel::{QuadratureError, QuadratureSpec, Refinement};
use crate::variety::VarietyError;

pub use phi::{phi_commuted_solve, phi_identity, phi_jacobian, phi_map, phi_pullback, PhiIdentity};
pub use product::{closedness_defect, product_solve};
pub use sigma::{delta, delta_fraction, p_as_fraction, sigma_min, SigmaMin};
pub use weighted::{solve, solve_cone, solve_weighted};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error("cone mode needs all weights equal to 1")]
    NotACone,
    #[error("sigma {sigma} is below -q = -{q}")]
    SigmaOutOfRange { sigma: i32, q: usize },
    #[error("form degree must satisfy 1 <= q <= {max}, got {q}")]
    InvalidDegree { q: usize, max: usize },
    #[error("input form is not closed: defect {defect:.3e} exceeds {tol:.1e}")]
    NotClosed { defect: f64, tol: f64 },
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Weighted,
    Cone,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Fixed `σ`; when absent, weighted mode uses `max(−q, 0)` and cone mode
    /// uses [`sigma_min`] for the exponent `p`.
    pub sigma: Option<i32>,
    pub mode: SolverMode,
    pub p: LpExponent,
    pub quad: QuadratureSpec,
    pub refinement: Refinement,
    /// If set, [`product_solve`] rejects forms whose `∂̄` at the evaluation
    /// point exceeds this.
    pub closed_tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: None,
            mode: SolverMode::Weighted,
            p: LpExponent::Finite(2.0),
            quad: QuadratureSpec::default(),
            refinement: Refinement::Adaptive,
            closed_tol: None,
        }
    }
}

impl SolverConfig {
    pub fn with_sigma(mut self, sigma: i32) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_mode(mut self, mode: SolverMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_refinement(mut self, refinement: Refinement) -> Self {
        self.refinement = refinement;
        self
    }

    /// The `σ` used for a `(0,q)`-form on a `d`-dimensional variety.
    pub fn resolve_sigma(&self, q: usize, d: usize) -> Result<i32, SolverError> {
        let sigma = match (self.sigma, self.mode) {
            (Some(s), _) => s,
            (None, SolverMode::Weighted) => 0,
            (None, SolverMode::Cone) => sigma_min(d, self.p, q)?.sigma,
        };
        if sigma < -(q as i32) {
            return Err(SolverError::SigmaOutOfRange { sigma, q });
        }
        Ok(sigma)
    }
}

/// Value of an operator at one point with quadrature statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSolution {
    pub value: Covector,
    pub sigma: i32,
    pub level: usize,
    pub evaluations: usize,
    pub error: Option<f64>,
}
