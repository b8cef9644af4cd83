//! `(0,q)`-forms on `ℂⁿ` and on charts of a variety.
//!
//! Multi-indices are zero-based internally and one-based in text (`"12"` is
//! `dz̄₁ ∧ dz̄₂`). Coefficients are symbolic expressions, sampled grids or
//! closures.

mod calculus;
mod expr;
mod form;
mod grid;
mod lp;
mod multi_index;
mod program;

use thiserror::Error;

use crate::variety::VarietyError;

pub use calculus::{
    covector_norm_sq, dbar_fd, dbar_fd_form, pointwise_norm, pullback, pullback_at, pullback_closed_form,
    pullback_covector, restricted_norm,
};
pub use expr::{bump_eval, cutoff, parse_expr, smooth_step, Expr, Var};
pub use form::{parse_form, AntiForm, CoeffExpr, Coefficient, Covector, CustomFn, FormFile};
pub use grid::GridField;
pub use lp::{lp_norm, lp_norm_field, LpExponent};
pub use multi_index::{aleph_multiplier, beta_sum, sign_perm, AlephMode, MultiIndex};
pub use program::Program;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("index {0} repeated in multi-index")]
    DuplicateIndex(usize),
    #[error("multi-index {0:?} is not strictly increasing")]
    NotAscending(Vec<usize>),
    #[error("invalid multi-index key `{0}`")]
    InvalidKey(String),
    #[error("expected degree {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `z{name}` at {pos}; valid range is z1..z{n}")]
    UnknownVariable { pos: usize, name: String, n: usize },
    #[error("derivative of a C¹ bump is not available; use order 2 or 3")]
    UnsupportedDerivative,
    #[error("finite-difference stencil leaves the domain: {0}")]
    StencilOutOfDomain(String),
    #[error("metric is rank deficient at this point")]
    RankDeficient,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}
