//! Machine-readable results: single checks with their tolerances and the
//! per-form solve report.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::solver::SolverConfig;

use super::{DeviationTable, ResidualTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes if `value ≤ tol`.
    AtMost,
    /// Passes if `value ≥ tol`.
    AtLeast,
}

/// One pass/fail decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, tol, Comparison::AtMost)
    }

    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, tol, Comparison::AtLeast)
    }

    /// A check that failed before a value could be computed.
    pub fn error(name: impl Into<String>, tol: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            tol,
            comparison: Comparison::AtMost,
            passed: false,
            detail: detail.into(),
        }
    }

    fn new(name: impl Into<String>, value: f64, tol: f64, comparison: Comparison) -> Self {
        let passed = match comparison {
            Comparison::AtMost => value <= tol,
            Comparison::AtLeast => value >= tol,
        };
        Self {
            name: name.into(),
            value,
            tol,
            comparison,
            passed,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        };
        write!(
            f,
            "{} {} value={:.3e} {} {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            op,
            self.tol
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// A list of checks; passes iff every check passes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl VerifyReport {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `‖Sω‖_p`, `‖ω‖_p` and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub p: f64,
    pub solution_norm: f64,
    pub form_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStats {
    pub solves: usize,
    pub evaluations: usize,
    pub max_level: usize,
}

impl QuadratureStats {
    pub fn record(&mut self, evaluations: usize, level: usize) {
        self.solves += 1;
        self.evaluations += evaluations;
        self.max_level = self.max_level.max(level);
    }
}

/// Everything computed for one variety and one form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub variety: String,
    pub form: String,
    pub config: SolverConfig,
    pub seed: u64,
    pub residuals: Option<ResidualTable>,
    pub lp: Vec<LpRow>,
    pub identities: Vec<DeviationTable>,
    pub quadrature: QuadratureStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SolveReport {
    pub fn new(variety: &str, form: &str, config: SolverConfig, seed: u64) -> Self {
        Self {
            variety: variety.to_string(),
            form: form.to_string(),
            config,
            seed,
            residuals: None,
            lp: Vec::new(),
            identities: Vec::new(),
            quadrature: QuadratureStats::default(),
            wall_time_s: None,
        }
    }

    /// Every ratio finite, every residual within tolerance and every
    /// identity within its tolerance.
    pub fn passed(&self) -> bool {
        self.residuals.as_ref().map_or(true, ResidualTable::passed)
            && self.lp.iter().all(|r| r.ratio.is_finite())
            && self.identities.iter().all(DeviationTable::passed)
    }
}
