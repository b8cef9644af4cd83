//! The power map `Φ(x) = (x₁^{β₁}, …, x_n^{β_n})` and the reduction of the
//! weighted problem to the cone `X = Φ⁻¹(Σ)`.

use serde::{Deserialize, Serialize};

use crate::forms::{pullback_covector, AntiForm, CoeffExpr, Coefficient, Covector, Expr, MultiIndex};
use crate::linalg::CMatrix;
use crate::variety::{WeightVector, WeightedVariety};
use crate::C64;

use super::{weighted, PointSolution, SolverConfig, SolverError};

pub fn phi_map(x: &[C64], beta: &WeightVector) -> Vec<C64> {
    x.iter().zip(beta.as_slice()).map(|(c, &b)| c.powu(b)).collect()
}

/// `diag(β_k x_k^{β_k − 1})`.
pub fn phi_jacobian(x: &[C64], beta: &WeightVector) -> CMatrix {
    let n = x.len();
    let mut jac = CMatrix::zeros(n, n);
    for (k, (c, &b)) in x.iter().zip(beta.as_slice()).enumerate() {
        jac[(k, k)] = c.powu(b - 1) * b as f64;
    }
    jac
}

/// `Φ*ω = Σ_J f_J(Φ(x)) Π_{j∈J} β_j x̄_j^{β_j−1} dx̄_J`. Expression coefficients
/// stay symbolic.
pub fn phi_pullback(omega: &AntiForm, beta: &WeightVector) -> Result<AntiForm, SolverError> {
    let n = omega.dim();
    if beta.len() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: beta.len(),
        });
    }
    let subs: Vec<Expr> = (0..n)
        .map(|k| Expr::pow(Expr::Z(k), C64::new(beta.get(k) as f64, 0.0)))
        .collect();
    let factor_expr = |key: &MultiIndex| {
        key.entries().iter().fold(Expr::constant(1.0), |acc, &j| {
            let b = beta.get(j);
            Expr::mul(
                acc,
                Expr::mul(
                    Expr::constant(b as f64),
                    Expr::pow(Expr::Zb(j), C64::new(b as f64 - 1.0, 0.0)),
                ),
            )
        })
    };
    let terms = omega
        .coefficients()
        .map(|(key, coef)| {
            let pulled = match coef {
                Coefficient::Expr(e) => Coefficient::Expr(CoeffExpr::from_expr(Expr::mul(
                    e.expr().substitute(&subs),
                    factor_expr(key),
                ))),
                other => {
                    let other = other.clone();
                    let beta = beta.clone();
                    let key = key.clone();
                    Coefficient::custom(move |x| {
                        let factor: C64 = key
                            .entries()
                            .iter()
                            .map(|&j| x[j].conj().powu(beta.get(j) - 1) * beta.get(j) as f64)
                            .product();
                        other.eval(&phi_map(x, &beta)) * factor
                    })
                }
            };
            (key.clone(), pulled)
        })
        .collect();
    // ‖Φ(x)‖ < R forces |x_k| < R^{1/β_k}
    let r = omega.support_radius();
    let radius = beta
        .as_slice()
        .iter()
        .map(|&b| r.powf(2.0 / b as f64))
        .sum::<f64>()
        .sqrt();
    let out = AntiForm::new(n, omega.degree(), radius, terms)?;
    Ok(out.with_name(format!("phi*{}", omega.name())))
}

/// `S^σ_q(Φ*ω)(x)` computed on the cone `X = Φ⁻¹(Σ)`.
pub fn phi_commuted_solve(
    omega: &AntiForm,
    v: &WeightedVariety,
    x: &[C64],
    cfg: &SolverConfig,
) -> Result<PointSolution, SolverError> {
    let lifted = v.phi_lift();
    let pulled = phi_pullback(omega, v.weights())?;
    weighted::solve_weighted(&pulled, &lifted, x, cfg)
}

/// Both sides of `Φ*(S^σ_q ω) = S^σ_q(Φ*ω)` at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiIdentity {
    pub x: Vec<C64>,
    pub pulled_solution: Covector,
    pub solution_of_pullback: Covector,
    /// `‖lhs − rhs‖ / max(‖lhs‖, ‖rhs‖)`, or the absolute difference if both vanish.
    pub deviation: f64,
}

pub fn phi_identity(
    omega: &AntiForm,
    v: &WeightedVariety,
    x: &[C64],
    cfg: &SolverConfig,
) -> Result<PhiIdentity, SolverError> {
    let beta = v.weights();
    let z = phi_map(x, beta);
    let direct = weighted::solve_weighted(omega, v, &z, cfg)?;
    let lhs = pullback_covector(&direct.value, &phi_jacobian(x, beta));
    let rhs = phi_commuted_solve(omega, v, x, cfg)?.value;
    let diff = lhs.difference(&rhs).norm();
    let scale = lhs.norm().max(rhs.norm());
    let deviation = if scale > 0.0 { diff / scale } else { diff };
    Ok(PhiIdentity {
        x: x.to_vec(),
        pulled_solution: lhs,
        solution_of_pullback: rhs,
        deviation,
    })
}
