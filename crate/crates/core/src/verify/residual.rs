//! Chart-level residual `∂̄(Π*Sω) − ε·Π*ω` at regular points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forms::{covector_norm_sq, dbar_fd, pullback_at, pullback_covector, AntiForm, Covector};
use crate::kernel::{Refinement, EPSILON};
use crate::linalg;
use crate::solver::{solve, SolverConfig, SolverError};
use crate::variety::{cone_chart, WeightedVariety};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualOptions {
    /// Finite-difference step in chart coordinates.
    pub h: f64,
    /// Pass threshold for the maximum residual.
    pub tol: f64,
    /// Threshold above which `∂̄(Π*ω)` marks the input as not closed.
    pub closed_tol: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            h: 1e-2,
            tol: 1e-4,
            closed_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub point: Vec<C64>,
    /// `Sω` at the point.
    pub solution: Option<Covector>,
    /// `|∂̄(Π*Sω) − ε·Π*ω|` in the chart-induced norm at `s = 1`.
    pub residual: Option<f64>,
    /// `|Π*ω|` at the same point.
    pub form_norm: Option<f64>,
    /// `|∂̄(Π*ω)|`; nonzero means the input is not closed.
    pub closedness_defect: Option<f64>,
    pub level: usize,
    pub quad_tol: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub rows: Vec<ResidualRow>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub max_closedness_defect: f64,
    pub h: f64,
    pub tol: f64,
    pub not_closed: bool,
    pub failures: usize,
}

impl ResidualTable {
    /// Every point evaluated, the input closed and every residual within `tol`.
    pub fn passed(&self) -> bool {
        self.failures == 0 && !self.not_closed && self.max_residual <= self.tol
    }
}

/// Residual at one regular point `z`.
pub fn residual_at(
    v: &WeightedVariety,
    omega: &AntiForm,
    cfg: &SolverConfig,
    z: &[C64],
    h: f64,
) -> Result<ResidualRow, SolverError> {
    let chart = cone_chart(v, z)?;
    let w0 = chart.base_parameter();
    let d = chart.dim();
    let q = omega.degree();
    if q > d {
        return Err(SolverError::InvalidDegree { q, max: d });
    }
    let base = solve(omega, v, z, cfg)?;
    // The stencil divides quadrature noise by h, so it runs one level past
    // the adaptive stopping level.
    let level = match cfg.refinement {
        Refinement::Adaptive => base.level + 1,
        Refinement::Fixed(l) => l,
    };
    let fixed = SolverConfig {
        refinement: Refinement::Fixed(level),
        ..*cfg
    };
    let field = |w: &[C64]| -> Result<Covector, SolverError> {
        let p = chart.eval(w)?;
        let s = solve(omega, v, &p.z, &fixed)?;
        Ok(pullback_covector(&s.value, &p.jacobian))
    };
    let dbar = dbar_fd(field, &w0, h)?;
    let target = pullback_at(omega, &chart, &w0)?;
    let jac = chart.eval(&w0)?.jacobian;
    let gram = linalg::gram(&jac);
    let diff = dbar.difference(&target.scaled(C64::new(EPSILON, 0.0)));
    let residual = covector_norm_sq(&diff, &gram)?.sqrt();
    let form_norm = covector_norm_sq(&target, &gram)?.sqrt();
    let closedness_defect = if q < d {
        let dd = dbar_fd(|w: &[C64]| pullback_at(omega, &chart, w), &w0, h)?;
        covector_norm_sq(&dd, &gram)?.sqrt()
    } else {
        0.0
    };
    Ok(ResidualRow {
        point: z.to_vec(),
        solution: Some(base.value),
        residual: Some(residual),
        form_norm: Some(form_norm),
        closedness_defect: Some(closedness_defect),
        level,
        quad_tol: cfg.quad.target_rel_err,
        error: None,
    })
}

/// Residuals at all `points`; failures at single points are recorded and the
/// remaining points still evaluated.
pub fn residual_check(
    v: &WeightedVariety,
    omega: &AntiForm,
    cfg: &SolverConfig,
    points: &[Vec<C64>],
    opts: &ResidualOptions,
) -> ResidualTable {
    let rows: Vec<ResidualRow> = points
        .par_iter()
        .map(|z| {
            residual_at(v, omega, cfg, z, opts.h).unwrap_or_else(|e| ResidualRow {
                point: z.clone(),
                solution: None,
                residual: None,
                form_norm: None,
                closedness_defect: None,
                level: 0,
                quad_tol: cfg.quad.target_rel_err,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let vals: Vec<f64> = rows.iter().filter_map(|r| r.residual).collect();
    let max_residual = vals.iter().copied().fold(0.0, f64::max);
    let mean_residual = if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let max_closedness_defect = rows.iter().filter_map(|r| r.closedness_defect).fold(0.0, f64::max);
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    ResidualTable {
        rows,
        max_residual,
        mean_residual,
        max_closedness_defect,
        h: opts.h,
        tol: opts.tol,
        not_closed: max_closedness_defect > opts.closed_tol,
        failures,
    }
}
