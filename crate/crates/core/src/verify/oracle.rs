//! The Cauchy–Pompeiu oracle: `∂̄(I f) = ε f` for smooth compactly supported `f`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::{
    cauchy_transform, dbar_scalar_fd, integrate_scalar, Disc, QuadratureError, QuadratureSpec, Refinement, EPSILON,
};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleTable {
    pub points: Vec<C64>,
    /// `|∂̄(I f)(z) − ε f(z)|` at each point.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub h: f64,
}

/// Evaluates `|∂̄(I f) − ε f|` at `points`, with `I f` at one level past the
/// adaptive stopping level on the whole stencil.
pub fn cauchy_pompeiu_check<F>(
    f: F,
    support: f64,
    points: &[C64],
    h: f64,
    spec: &QuadratureSpec,
) -> Result<OracleTable, QuadratureError>
where
    F: Fn(C64) -> C64 + Sync,
{
    let errors = points
        .par_iter()
        .map(|&z| {
            let level = cauchy_transform(&f, z, support, spec, Refinement::Adaptive)?.level + 1;
            let mut failure = None;
            let d = dbar_scalar_fd(
                |w| match cauchy_transform(&f, w, support, spec, Refinement::Fixed(level)) {
                    Ok(r) => r.value[0],
                    Err(e) => {
                        failure.get_or_insert(e);
                        C64::new(f64::NAN, 0.0)
                    }
                },
                z,
                h,
            );
            match failure {
                Some(e) => Err(e),
                None => Ok((d - EPSILON * f(z)).norm()),
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(OracleTable {
        points: points.to_vec(),
        errors,
        max_error,
        h,
    })
}

/// `I[1_D]` for the unit disc by the midpoint rule on an `m × m` grid over
/// `[−1, 1]²`, next to the adaptive value. Points `z` on grid vertices keep
/// every node at least half a step away from the pole.
pub fn indicator_brute_force(z: C64, m: usize, spec: &QuadratureSpec) -> Result<(C64, C64), QuadratureError> {
    let step = 2.0 / m as f64;
    let brute: C64 = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = -1.0 + (i as f64 + 0.5) * step;
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                let t = C64::new(x, -1.0 + (j as f64 + 0.5) * step);
                if t.norm_sqr() < 1.0 {
                    acc += 1.0 / (t - z);
                }
            }
            acc
        })
        .sum::<C64>()
        * (step * step / std::f64::consts::PI);
    let disc = Disc::domain(C64::new(0.0, 0.0), 1.0);
    let (v, _) = integrate_scalar(spec, disc, &[z], Refinement::Adaptive, |t| 1.0 / (t - z))?;
    Ok((brute, v / std::f64::consts::PI))
}
