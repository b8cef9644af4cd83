//! `Lᵖ` norms over `Σ ∩ B_R` with respect to the induced volume.

use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::variety::{Atlas, Estimate, Sampler};
use crate::C64;

use super::calculus::restricted_norm;
use super::form::AntiForm;
use super::FormError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self, FormError> {
        if p.is_infinite() && p > 0.0 {
            Ok(LpExponent::Infinity)
        } else if p >= 1.0 {
            Ok(LpExponent::Finite(p))
        } else {
            Err(FormError::Invalid(format!("exponent must be in [1, ∞], got {p}")))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            LpExponent::Finite(p) => *p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }
}

/// `(∫_{Σ∩B_R} g^p dV)^{1/p}` for a pointwise norm `g(z, jac)`. The error bar is
/// propagated to first order from the integral's.
pub fn lp_norm_field<F>(
    atlas: &Atlas,
    radius: f64,
    p: LpExponent,
    sampler: &Sampler,
    g: F,
) -> Result<Estimate, FormError>
where
    F: Fn(&[C64], &CMatrix) -> f64 + Sync,
{
    match p {
        LpExponent::Infinity => {
            let sup = atlas.sup(radius, sampler, g)?;
            Ok(Estimate {
                value: sup,
                std_err: 0.0,
                samples: 0,
            })
        }
        LpExponent::Finite(p) => {
            let est = atlas.integrate(radius, sampler, |z, jac| g(z, jac).powf(p))?;
            let value = est.value.max(0.0).powf(1.0 / p);
            let std_err = if est.value > 0.0 {
                value / (p * est.value) * est.std_err
            } else {
                0.0
            };
            Ok(Estimate {
                value,
                std_err,
                samples: est.samples,
            })
        }
    }
}

/// `‖ω‖_{Lᵖ(Σ∩B_R)}` with the induced pointwise norm. Points where the
/// tangent space degenerates are a null set and contribute zero.
pub fn lp_norm(
    omega: &AntiForm,
    atlas: &Atlas,
    radius: f64,
    p: LpExponent,
    sampler: &Sampler,
) -> Result<Estimate, FormError> {
    lp_norm_field(atlas, radius, p, sampler, |z, jac| {
        restricted_norm(&omega.eval(z), jac).unwrap_or(0.0)
    })
}
