//! Fiberwise Cauchy transform in the first coordinate of `ℂ × U`.

use crate::forms::{dbar_fd, AntiForm, Covector, FormError, MultiIndex};
use crate::kernel::{certify_support, integrate_plane, Disc};
use crate::C64;

use super::{PointSolution, SolverConfig, SolverError};

/// Largest coefficient of `∂̄ω` at `z` by finite differences with step `h`.
pub fn closedness_defect(omega: &AntiForm, z: &[C64], h: f64) -> f64 {
    match dbar_fd(|p| Ok::<_, FormError>(omega.eval(p)), z, h) {
        Ok(c) => c.max_abs(),
        Err(_) => f64::INFINITY,
    }
}

/// `S_q ω(z) = Σ_{K ∌ 1} I[a_{1,K}](z) dz̄_K`, where `ω = Σ a_{1,K} dz̄₁∧dz̄_K + …`
/// and `I` is the Cauchy transform in `z₁` over `|t| < support_z1`.
pub fn product_solve(
    omega: &AntiForm,
    z: &[C64],
    support_z1: f64,
    cfg: &SolverConfig,
) -> Result<PointSolution, SolverError> {
    let m = omega.dim();
    let q = omega.degree();
    if z.len() != m {
        return Err(SolverError::DimensionMismatch {
            expected: m,
            got: z.len(),
        });
    }
    if q < 1 || q > m {
        return Err(SolverError::InvalidDegree { q, max: m });
    }
    if let Some(tol) = cfg.closed_tol {
        let defect = closedness_defect(omega, z, 1e-3);
        if !(defect <= tol) {
            return Err(SolverError::NotClosed { defect, tol });
        }
    }
    let firsts: Vec<(usize, MultiIndex)> = omega
        .keys()
        .iter()
        .enumerate()
        .filter(|(_, k)| k.contains(0))
        .map(|(i, k)| (i, k.without(0)))
        .collect();
    let mut value = Covector::zero(m, q - 1);
    if firsts.is_empty() {
        return Ok(PointSolution {
            value,
            sigma: 0,
            level: 0,
            evaluations: 0,
            error: Some(0.0),
        });
    }
    let nkeys = omega.keys().len();
    let z1 = z[0];
    let fiber = |t: C64, out: &mut [C64]| {
        let mut w = z.to_vec();
        w[0] = t;
        let mut all = vec![C64::new(0.0, 0.0); nkeys];
        omega.eval_into(&w, &mut all);
        for (o, (i, _)) in out.iter_mut().zip(&firsts) {
            *o = all[*i];
        }
    };
    let disc = Disc::support(C64::new(0.0, 0.0), support_z1);
    certify_support(&disc, |t| {
        let mut out = vec![C64::new(0.0, 0.0); firsts.len()];
        fiber(t, &mut out);
        out.into_iter().find(|c| *c != C64::new(0.0, 0.0)).unwrap_or_default()
    })?;
    let res = integrate_plane(
        &cfg.quad,
        disc,
        &[z1, C64::new(0.0, 0.0)],
        firsts.len(),
        cfg.refinement,
        |t, out| {
            fiber(t, out);
            let k = std::f64::consts::FRAC_1_PI / (t - z1);
            for o in out.iter_mut() {
                *o *= k;
            }
        },
    )?;
    for ((_, k), v) in firsts.iter().zip(&res.value) {
        value.add(k.clone(), *v);
    }
    Ok(PointSolution {
        value,
        sigma: 0,
        level: res.level,
        evaluations: res.evaluations,
        error: res.error,
    })
}
