//! Checks of the algebraic identities behind the solution operators: sign
//! cancellation in the pulled-back multiplier, commutation with the cone
//! chart, and commutation with the power map.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::forms::{
    aleph_multiplier, beta_sum, pullback_at, pullback_covector, sign_perm, AlephMode, AntiForm, Coefficient, Covector,
    MultiIndex,
};
use crate::kernel::solution_kernel_support;
use crate::linalg;
use crate::solver::{phi_identity, product_solve, solve, SolverConfig, SolverError};
use crate::variety::{cone_chart, Chart, WeightedVariety};
use crate::C64;

/// Result of the exhaustive sign test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCancellation {
    pub max_q: usize,
    pub max_n: usize,
    /// Number of `(n, J, j, k)` cases tested.
    pub cases: usize,
    /// `(n, J, j, k)` for every violated case, 0-based.
    pub failures: Vec<(usize, Vec<usize>, usize, usize)>,
}

/// Tests `sign(j, J∖j)·sign(k, J∖{j,k}) = −sign(k, J∖k)·sign(j, J∖{j,k})` for
/// every `J ⊂ {1..n}` with `2 ≤ |J| ≤ max_q`, `n ≤ max_n`, and `j ≠ k ∈ J`.
pub fn sign_cancellation_exhaustive(max_q: usize, max_n: usize) -> SignCancellation {
    let mut cases = 0;
    let mut failures = Vec::new();
    let sign = |j: usize, k: &MultiIndex| -> i32 {
        if sign_perm(j, k).expect("j not in K") > 0.0 {
            1
        } else {
            -1
        }
    };
    for n in 1..=max_n {
        for q in 2..=max_q.min(n) {
            for jset in MultiIndex::all(n, q) {
                for &j in jset.entries() {
                    for &k in jset.entries() {
                        if j == k {
                            continue;
                        }
                        cases += 1;
                        let rest = jset.without(j).without(k);
                        let lhs = sign(j, &jset.without(j)) * sign(k, &rest);
                        let rhs = -sign(k, &jset.without(k)) * sign(j, &rest);
                        if lhs != rhs {
                            failures.push((n, jset.entries().to_vec(), j, k));
                        }
                    }
                }
            }
        }
    }
    SignCancellation {
        max_q,
        max_n,
        cases,
        failures,
    }
}

/// `Θ_J(x) = Σ_{j∈J} β_j π̄_j(x) dπ̄_{J∖j} / sign(j, J∖j)` in chart
/// coordinates `(s, x)`; it has no `ds̄` component.
pub fn theta_multiplier(chart: &Chart, j: &MultiIndex, x: &[C64]) -> Result<Covector, SolverError> {
    let d = chart.dim();
    let (y, dy) = chart.slice_point(x)?;
    let beta = chart.weights();
    let mut out = Covector::zero(d, j.len() - 1);
    for (k, coef) in aleph_multiplier(j, &y, beta, AlephMode::Weighted) {
        for a in MultiIndex::all(d - 1, k.len()) {
            let v = coef * linalg::minor(&dy, k.entries(), a.entries()).conj();
            out.add(a.shifted(1), v);
        }
    }
    Ok(out)
}

/// Largest relative deviation of `Π*ℵ_J` from `s̄^{β_J} Θ_J` at `(s, x)` over
/// all `J` with `|J| = q`.
pub fn aleph_pullback_deviation(chart: &Chart, q: usize, s: C64, x: &[C64]) -> Result<f64, SolverError> {
    let n = chart.ambient_dim();
    let mut w = vec![s];
    w.extend_from_slice(x);
    let p = chart.eval(&w)?;
    let beta = chart.weights();
    let mut worst = 0.0_f64;
    for j in MultiIndex::all(n, q) {
        let mut aleph = Covector::zero(n, q - 1);
        for (k, c) in aleph_multiplier(&j, &p.z, beta, AlephMode::Weighted) {
            aleph.add(k, c);
        }
        let lhs = pullback_covector(&aleph, &p.jacobian);
        let rhs = theta_multiplier(chart, &j, x)?.scaled(s.powu(beta_sum(&j, beta)).conj());
        let scale = lhs.norm().max(rhs.norm());
        let diff = lhs.difference(&rhs).norm();
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    Ok(worst)
}

/// `t^σ·Π*ω(t, x)` as a form on chart coordinates.
pub fn twisted_pullback(omega: &AntiForm, chart: &Chart, sigma: i32) -> Result<AntiForm, SolverError> {
    let d = chart.dim();
    let q = omega.degree();
    if q > d {
        return Err(SolverError::InvalidDegree { q, max: d });
    }
    let shared = Arc::new((omega.clone(), chart.clone()));
    let terms = MultiIndex::all(d, q)
        .into_iter()
        .map(|a| {
            let shared = Arc::clone(&shared);
            let key = a.clone();
            let coef = Coefficient::custom(move |w| match pullback_at(&shared.0, &shared.1, w) {
                Ok(c) if c.get(&key) != C64::new(0.0, 0.0) => w[0].powi(sigma) * c.get(&key),
                Ok(_) => C64::new(0.0, 0.0),
                Err(_) => C64::new(f64::NAN, f64::NAN),
            });
            (a, coef)
        })
        .collect();
    Ok(AntiForm::new(d, q, f64::INFINITY, terms)?)
}

/// Both sides of `Π*(Sω)(s, x) = S_q(t^σ Π*ω)(s, x) / s^σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commutation {
    pub point: Vec<C64>,
    pub s: C64,
    pub pulled_solution: Covector,
    pub product_solution: Covector,
    pub deviation: f64,
}

/// Evaluates the commutation identity for the cone chart centred at `xi`, at
/// chart coordinates `(s, ζ)`.
pub fn commutation_at(
    v: &WeightedVariety,
    omega: &AntiForm,
    cfg: &SolverConfig,
    xi: &[C64],
    s: C64,
) -> Result<Commutation, SolverError> {
    let chart = cone_chart(v, xi)?;
    let q = omega.degree();
    let sigma = cfg.resolve_sigma(q, chart.dim())?;
    let mut w = vec![s];
    w.extend_from_slice(chart.zeta());
    let p = chart.eval(&w)?;
    let direct = solve(
        omega,
        v,
        &p.z,
        &SolverConfig {
            sigma: Some(sigma),
            ..*cfg
        },
    )?;
    let lhs = pullback_covector(&direct.value, &p.jacobian);

    let (y, _) = chart.slice_point(chart.zeta())?;
    let support = solution_kernel_support(&y, v.weights().as_slice(), omega.support_radius()).unwrap_or(0.0);
    let twisted = twisted_pullback(omega, &chart, sigma)?;
    let rhs = if support > 0.0 {
        product_solve(
            &twisted,
            &w,
            support,
            &SolverConfig {
                closed_tol: None,
                ..*cfg
            },
        )?
        .value
        .scaled(s.powi(-sigma))
    } else {
        Covector::zero(chart.dim(), q - 1)
    };
    let diff = lhs.difference(&rhs).norm();
    let scale = lhs.norm().max(rhs.norm());
    Ok(Commutation {
        point: p.z,
        s,
        pulled_solution: lhs,
        product_solution: rhs,
        deviation: if scale > 0.0 { diff / scale } else { diff },
    })
}

/// Deviations of an identity over a batch of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub name: String,
    pub deviations: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
    pub max_deviation: f64,
    pub tol: f64,
}

impl DeviationTable {
    pub fn from_results(name: &str, results: Vec<Result<f64, SolverError>>, tol: f64) -> Self {
        let deviations: Vec<Option<f64>> = results.iter().map(|r| r.as_ref().ok().copied()).collect();
        let errors = results
            .iter()
            .map(|r| r.as_ref().err().map(|e| e.to_string()))
            .collect();
        let max_deviation = deviations.iter().flatten().copied().fold(0.0, f64::max);
        Self {
            name: name.to_string(),
            deviations,
            errors,
            max_deviation,
            tol,
        }
    }

    pub fn passed(&self) -> bool {
        self.errors.iter().all(Option::is_none) && self.max_deviation <= self.tol
    }
}

/// The power-map identity `Φ*(Sω) = S(Φ*ω)` at `x_k = z_k^{1/β_k}` for each
/// point `z` of `Σ`.
pub fn phi_commutation_check(
    v: &WeightedVariety,
    omega: &AntiForm,
    cfg: &SolverConfig,
    points: &[Vec<C64>],
    tol: f64,
) -> DeviationTable {
    use rayon::prelude::*;
    let beta = v.weights();
    let results = points
        .par_iter()
        .map(|z| {
            let x: Vec<C64> = z
                .iter()
                .enumerate()
                .map(|(k, c)| c.powf(1.0 / beta.get(k) as f64))
                .collect();
            phi_identity(omega, v, &x, cfg).map(|r| r.deviation)
        })
        .collect();
    DeviationTable::from_results("phi-identity", results, tol)
}

/// The commutation identity at `(s, ζ)` for the chart centred at each point.
pub fn commutation_check(
    v: &WeightedVariety,
    omega: &AntiForm,
    cfg: &SolverConfig,
    points: &[Vec<C64>],
    s: C64,
    tol: f64,
) -> DeviationTable {
    use rayon::prelude::*;
    let results = points
        .par_iter()
        .map(|z| commutation_at(v, omega, cfg, z, s).map(|c| c.deviation))
        .collect();
    DeviationTable::from_results("commutation", results, tol)
}
