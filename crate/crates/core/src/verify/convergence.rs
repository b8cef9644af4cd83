//! Changes of reported quantities when the resolution is doubled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forms::AntiForm;
use crate::solver::{solve, SolverConfig, SolverError};
use crate::variety::WeightedVariety;
use crate::C64;

use super::Check;

/// A quantity at base and doubled resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub quantity: String,
    pub base: f64,
    pub refined: f64,
    pub change: f64,
    pub tol: f64,
}

impl ConvergenceRow {
    pub fn absolute(quantity: impl Into<String>, base: f64, refined: f64, tol: f64) -> Self {
        Self {
            quantity: quantity.into(),
            base,
            refined,
            change: (base - refined).abs(),
            tol,
        }
    }

    /// Relative change, with `floor` guarding against division by tiny values.
    pub fn relative(quantity: impl Into<String>, base: f64, refined: f64, tol: f64, floor: f64) -> Self {
        let scale = base.abs().max(refined.abs()).max(floor);
        Self {
            quantity: quantity.into(),
            base,
            refined,
            change: (base - refined).abs() / scale,
            tol,
        }
    }

    pub fn passed(&self) -> bool {
        self.change < self.tol
    }

    pub fn to_check(&self) -> Check {
        Check::at_most(format!("convergence/{}", self.quantity), self.change, self.tol)
    }
}

/// `‖S_base − S_refined‖ / max(‖S_base‖, 1)` at each point, where the refined
/// solve uses [`crate::kernel::QuadratureSpec::reference`].
pub fn solver_convergence(
    v: &WeightedVariety,
    omega: &AntiForm,
    cfg: &SolverConfig,
    points: &[Vec<C64>],
    tol: f64,
) -> Result<Vec<ConvergenceRow>, SolverError> {
    let fine = SolverConfig {
        quad: cfg.quad.reference(),
        ..*cfg
    };
    points
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let a = solve(omega, v, z, cfg)?.value;
            let b = solve(omega, v, z, &fine)?.value;
            let change = a.difference(&b).norm() / a.norm().max(1.0);
            Ok(ConvergenceRow {
                quantity: format!("{}/{}/point{}", v.name(), omega.name(), i),
                base: a.norm(),
                refined: b.norm(),
                change,
                tol,
            })
        })
        .collect()
}
