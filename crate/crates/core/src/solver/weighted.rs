//! `S^σ_q` on weighted homogeneous varieties and its cone specialisation.

use crate::forms::{aleph_multiplier, beta_sum, AlephMode, AntiForm, Covector};
use crate::kernel::{certify_support, solution_kernel_integral, solution_kernel_support, Disc};
use crate::variety::{scale_action, WeightVector, WeightedVariety};
use crate::C64;

use super::{PointSolution, SolverConfig, SolverError, SolverMode};

/// Dispatches on `cfg.mode`.
pub fn solve(
    omega: &AntiForm,
    v: &WeightedVariety,
    z: &[C64],
    cfg: &SolverConfig,
) -> Result<PointSolution, SolverError> {
    match cfg.mode {
        SolverMode::Weighted => solve_weighted(omega, v, z, cfg),
        SolverMode::Cone => solve_cone(omega, v, z, cfg),
    }
}

fn check_input(omega: &AntiForm, v: &WeightedVariety, z: &[C64]) -> Result<usize, SolverError> {
    let n = v.ambient_dim();
    if z.len() != n || omega.dim() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: if z.len() != n { z.len() } else { omega.dim() },
        });
    }
    let q = omega.degree();
    if q < 1 || q > n {
        return Err(SolverError::InvalidDegree { q, max: n });
    }
    Ok(q)
}

fn zero_solution(n: usize, q: usize, sigma: i32) -> PointSolution {
    PointSolution {
        value: Covector::zero(n, q - 1),
        sigma,
        level: 0,
        evaluations: 0,
        error: Some(0.0),
    }
}

/// `Σ_J ℵ_J(z) (1/π) ∫ f_J(u^β * z) u^σ ū^{β_J−1} / (u − 1) dA(u)`.
pub fn solve_weighted(
    omega: &AntiForm,
    v: &WeightedVariety,
    z: &[C64],
    cfg: &SolverConfig,
) -> Result<PointSolution, SolverError> {
    let q = check_input(omega, v, z)?;
    let sigma = match cfg.sigma {
        Some(s) => s,
        None => SolverConfig {
            mode: SolverMode::Weighted,
            ..*cfg
        }
        .resolve_sigma(q, 0)?,
    };
    if sigma < -(q as i32) {
        return Err(SolverError::SigmaOutOfRange { sigma, q });
    }
    weighted_core(omega, v.weights(), z, sigma, cfg)
}

pub(crate) fn weighted_core(
    omega: &AntiForm,
    beta: &WeightVector,
    z: &[C64],
    sigma: i32,
    cfg: &SolverConfig,
) -> Result<PointSolution, SolverError> {
    let n = z.len();
    let q = omega.degree();
    let support = match solution_kernel_support(z, beta.as_slice(), omega.support_radius()) {
        Some(r) if !omega.is_zero() => r,
        _ => return Ok(zero_solution(n, q, sigma)),
    };
    let keys = omega.keys();
    let betas: Vec<u32> = keys.iter().map(|k| beta_sum(k, beta)).collect();
    let g = |u: C64, out: &mut [C64]| omega.eval_into(&scale_action(u, z, beta), out);
    certify_support(&Disc::support(C64::new(0.0, 0.0), support), |u| {
        let mut out = vec![C64::new(0.0, 0.0); keys.len()];
        g(u, &mut out);
        out.into_iter().find(|c| *c != C64::new(0.0, 0.0)).unwrap_or_default()
    })?;
    let res = solution_kernel_integral(g, sigma, &betas, support, &cfg.quad, cfg.refinement)?;
    let mut value = Covector::zero(n, q - 1);
    for ((key, k), integral) in keys.iter().zip(&betas).zip(&res.value) {
        debug_assert!(*k >= q as u32);
        for (kk, coef) in aleph_multiplier(key, z, beta, AlephMode::Weighted) {
            value.add(kk, coef * integral);
        }
    }
    Ok(PointSolution {
        value,
        sigma,
        level: res.level,
        evaluations: res.evaluations,
        error: res.error,
    })
}

/// `Σ_J ℵ_J(z) (1/π) ∫ f_J(u z) u^σ ū^{q−1} / (u − 1) dA(u)` on a cone, with
/// the multiplier `ℵ_J = Σ_{j∈J} z̄_j dz̄_{J∖j} / sign(j, J∖j)`.
pub fn solve_cone(
    omega: &AntiForm,
    v: &WeightedVariety,
    z: &[C64],
    cfg: &SolverConfig,
) -> Result<PointSolution, SolverError> {
    let q = check_input(omega, v, z)?;
    if !v.weights().is_unit() {
        return Err(SolverError::NotACone);
    }
    let sigma = match cfg.sigma {
        Some(s) => s,
        None => {
            let d = v.local_dimension(z)?;
            SolverConfig {
                mode: SolverMode::Cone,
                ..*cfg
            }
            .resolve_sigma(q, d)?
        }
    };
    if sigma < -(q as i32) {
        return Err(SolverError::SigmaOutOfRange { sigma, q });
    }
    let n = z.len();
    let support = match solution_kernel_support(z, v.weights().as_slice(), omega.support_radius()) {
        Some(r) if !omega.is_zero() => r,
        _ => return Ok(zero_solution(n, q, sigma)),
    };
    let keys = omega.keys();
    let betas = vec![q as u32; keys.len()];
    let g = |u: C64, out: &mut [C64]| {
        let w: Vec<C64> = z.iter().map(|c| u * c).collect();
        omega.eval_into(&w, out);
    };
    let res = solution_kernel_integral(g, sigma, &betas, support, &cfg.quad, cfg.refinement)?;
    let one = crate::variety::WeightVector::unit(n);
    let mut value = Covector::zero(n, q - 1);
    for (key, integral) in keys.iter().zip(&res.value) {
        for (kk, coef) in aleph_multiplier(key, z, &one, AlephMode::Weighted) {
            value.add(kk, coef * integral);
        }
    }
    Ok(PointSolution {
        value,
        sigma,
        level: res.level,
        evaluations: res.evaluations,
        error: res.error,
    })
}
