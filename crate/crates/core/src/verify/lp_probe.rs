//! Empirical `Lᵖ` bounds: the weighted Cauchy operator, the constant
//! `C_Σ(R, σ)` of the cone solution operator, and a probe with `σ` below
//! its admissible range.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forms::{cutoff, lp_norm, lp_norm_field, restricted_norm, AntiForm, Covector, LpExponent};
use crate::kernel::gauss::radial_rule;
use crate::kernel::{integrate_plane, m1_integral, Disc, QuadratureSpec, Refinement};
use crate::linalg::CMatrix;
use crate::solver::{delta, sigma_min, solve, SolverConfig, SolverError, SolverMode};
use crate::variety::{Atlas, Sampler, WeightedVariety};
use crate::C64;

/// Stability threshold for the maximum ratio under family doubling.
pub const FAMILY_STABILITY: f64 = 0.05;

/// Parameters of an `Lᵖ` estimator: `δ = σ + q − 1 + (2 − 2d)/p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpEstimator {
    pub p: LpExponent,
    pub d: usize,
    pub q: usize,
    pub sigma: i32,
    pub delta: f64,
    pub radius: f64,
}

impl LpEstimator {
    /// Uses `σ = sigma_min(d, p, q)`.
    pub fn new(d: usize, p: LpExponent, q: usize, radius: f64) -> Result<Self, SolverError> {
        let sigma = sigma_min(d, p, q)?.sigma;
        Ok(Self::with_sigma(d, p, q, sigma, radius))
    }

    pub fn with_sigma(d: usize, p: LpExponent, q: usize, sigma: i32, radius: f64) -> Self {
        Self {
            p,
            d,
            q,
            sigma,
            delta: delta(sigma, q, d, p),
            radius,
        }
    }

    /// Whether `0 ≤ δ < 1`.
    pub fn admissible(&self) -> bool {
        (0.0..1.0).contains(&self.delta)
    }
}

/// Maximum ratio over a family and over the family with midpoints inserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRatios {
    /// Ratios of the doubled family; even indices form the base family.
    pub ratios: Vec<f64>,
    pub max_base: f64,
    pub max_doubled: f64,
    /// `(max_doubled − max_base) / max_doubled`.
    pub relative_change: f64,
}

impl FamilyRatios {
    fn from_doubled(ratios: Vec<f64>) -> Self {
        let max_base = ratios.iter().step_by(2).copied().fold(0.0, f64::max);
        let max_doubled = ratios.iter().copied().fold(0.0, f64::max);
        let relative_change = if max_doubled > 0.0 {
            (max_doubled - max_base) / max_doubled
        } else {
            0.0
        };
        Self {
            ratios,
            max_base,
            max_doubled,
            relative_change,
        }
    }

    pub fn finite(&self) -> bool {
        self.ratios.iter().all(|r| r.is_finite())
    }

    pub fn stable(&self) -> bool {
        self.finite() && self.relative_change < FAMILY_STABILITY
    }
}

/// Polar grid on `|t| < R` graded towards `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscGrid {
    pub rings: usize,
    pub order: usize,
    pub angles: usize,
    pub tau_min: f64,
}

impl Default for DiscGrid {
    fn default() -> Self {
        Self {
            rings: 1,
            order: 6,
            angles: 24,
            tau_min: 1e-14,
        }
    }
}

impl DiscGrid {
    pub fn refined(&self) -> Self {
        Self {
            rings: 2 * self.rings,
            angles: 2 * self.angles,
            ..*self
        }
    }

    fn nodes(&self, radius: f64) -> Vec<(C64, f64)> {
        let mut out = Vec::new();
        for (tau, w) in radial_rule(self.rings, self.order, self.tau_min) {
            for j in 0..self.angles {
                let th = TAU * (j as f64 + 0.5) / self.angles as f64;
                out.push((
                    C64::from_polar(radius * tau, th),
                    w * radius * radius * tau * TAU / self.angles as f64,
                ));
            }
        }
        out
    }
}

/// Member `k` of `count` of the shifted-bump family on `|w| < R`: a bump of
/// radius `0.3R` whose centre moves along a spiral, with an oscillating phase.
pub fn cauchy_family_member(k: usize, count: usize, radius: f64) -> impl Fn(C64) -> C64 + Send + Sync {
    let theta = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
    let center = C64::from_polar(0.6 * radius * theta, 3.0 * PI * theta);
    let freq = 1.0 + 2.0 * theta;
    move |w: C64| {
        let r = (w - center).norm();
        if r >= 0.3 * radius {
            return C64::new(0.0, 0.0);
        }
        cutoff(0.1 * radius, 0.3 * radius, r) * C64::from_polar(1.0, freq * (w - center).arg())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyProbe {
    pub p: f64,
    pub radius: f64,
    pub base_size: usize,
    /// One entry per `δ`.
    pub by_delta: Vec<(f64, FamilyRatios)>,
}

/// Ratios `‖T_δ h‖_p / ‖h‖_p` of the weighted Cauchy operator
/// `T_δ h(t) = |t|^{−δ} ∫ h(w) dw∧dw̄ / (w − t)` over `base_size` shifted bumps
/// and their midpoint refinement, for every `δ` in `deltas`.
pub fn cauchy_ratio_probe(
    deltas: &[f64],
    p: f64,
    radius: f64,
    base_size: usize,
    grid: &DiscGrid,
    quad: &QuadratureSpec,
    level: usize,
) -> Result<CauchyProbe, SolverError> {
    for &dl in deltas {
        if !(0.0..1.0).contains(&dl) {
            return Err(crate::kernel::QuadratureError::DeltaOutOfRange(dl).into());
        }
    }
    let count = 2 * base_size - 1;
    let family: Vec<_> = (0..count).map(|k| cauchy_family_member(k, count, radius)).collect();
    let nodes = grid.nodes(radius);
    let transforms: Vec<Result<Vec<C64>, SolverError>> = nodes
        .par_iter()
        .map(|&(t, _)| {
            let disc = Disc::domain(C64::new(0.0, 0.0), radius);
            let res = integrate_plane(quad, disc, &[t], count, Refinement::Fixed(level), |w, out| {
                let inv = 1.0 / (w - t);
                for (o, h) in out.iter_mut().zip(&family) {
                    *o = h(w) * inv;
                }
            })?;
            Ok(res.value.into_iter().map(|v| C64::new(0.0, -2.0) * v).collect())
        })
        .collect();
    let transforms = transforms.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut input = vec![0.0; count];
    for &(t, w) in &nodes {
        for (acc, h) in input.iter_mut().zip(&family) {
            *acc += w * h(t).norm().powf(p);
        }
    }
    let by_delta = deltas
        .iter()
        .map(|&dl| {
            let mut output = vec![0.0; count];
            for ((t, w), vals) in nodes.iter().zip(&transforms) {
                let scale = t.norm().powf(-dl);
                for (acc, v) in output.iter_mut().zip(vals) {
                    *acc += w * (scale * v.norm()).powf(p);
                }
            }
            let ratios = output.iter().zip(&input).map(|(o, i)| (o / i).powf(1.0 / p)).collect();
            (dl, FamilyRatios::from_doubled(ratios))
        })
        .collect();
    Ok(CauchyProbe {
        p,
        radius,
        base_size,
        by_delta,
    })
}

/// Row of the `M₁` table: `sup` of `∫_{|w|<R} dA / (|t|^δ |w − t|)` over
/// `|t| = t_abs`, sampled at a few angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct M1Row {
    pub delta: f64,
    pub t_abs: f64,
    pub value: f64,
}

pub fn m1_table(deltas: &[f64], t_abs: &[f64], radius: f64, quad: &QuadratureSpec) -> Result<Vec<M1Row>, SolverError> {
    let mut rows = Vec::new();
    for &dl in deltas {
        for &ta in t_abs {
            let mut value = 0.0_f64;
            for k in 0..4 {
                let t = C64::from_polar(ta, TAU * k as f64 / 4.0);
                value = value.max(m1_integral(t, dl, radius, quad)?);
            }
            rows.push(M1Row {
                delta: dl,
                t_abs: ta,
                value,
            });
        }
    }
    Ok(rows)
}

/// Solutions of several forms at the sample points of an atlas, reusable for
/// any linear combination of the forms. Samplers are deterministic, so a
/// second pass over the same sampler visits exactly the cached points.
struct SolvedBasis<'a> {
    atlas: &'a Atlas,
    radius: f64,
    sampler: Sampler,
    values: HashMap<Vec<u64>, Vec<Covector>>,
}

fn point_key(z: &[C64]) -> Vec<u64> {
    z.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect()
}

impl SolvedBasis<'_> {
    fn norm<F>(&self, p: LpExponent, g: F) -> Result<f64, SolverError>
    where
        F: Fn(&[Covector], &CMatrix) -> f64 + Sync,
    {
        let est = lp_norm_field(self.atlas, self.radius, p, &self.sampler, |z, jac| {
            match self.values.get(&point_key(z)) {
                Some(vals) => g(vals, jac),
                None => f64::NAN,
            }
        })?;
        Ok(est.value)
    }
}

fn pointwise(c: &Covector, jac: &CMatrix) -> f64 {
    if c.degree == 0 {
        c.norm()
    } else {
        restricted_norm(c, jac).unwrap_or(0.0)
    }
}

/// `ω_θ = Σ_k c_k(θ) ω_k` with `c(θ)` on a closed curve through all basis
/// directions, `θ = k/(count−1)`.
pub fn combination_coefficients(basis_len: usize, k: usize, count: usize) -> Vec<C64> {
    let theta = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
    (0..basis_len)
        .map(|j| {
            let phase = TAU * (theta + j as f64 / basis_len as f64);
            C64::from_polar(1.0 + 0.5 * phase.cos(), (j + 1) as f64 * PI * theta)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpBoundProbe {
    pub estimator: LpEstimator,
    pub samples: usize,
    pub family: FamilyRatios,
    /// Ratios of the basis forms themselves and of `c·ω₀` for a few `c`.
    pub basis_ratios: Vec<f64>,
    pub scaled_ratios: Vec<f64>,
}

/// Empirical `C_Σ(R, σ)`: ratios `‖Sω‖_p / ‖ω‖_p` over `Σ ∩ B_R` for the
/// family of combinations of `basis`, with `σ = cfg.sigma` or `sigma_min`.
#[allow(clippy::too_many_arguments)]
pub fn lp_bound_probe(
    v: &WeightedVariety,
    atlas: &Atlas,
    basis: &[AntiForm],
    p: LpExponent,
    radius: f64,
    base_size: usize,
    sampler: &Sampler,
    cfg: &SolverConfig,
) -> Result<LpBoundProbe, SolverError> {
    let q = basis
        .first()
        .map(|f| f.degree())
        .ok_or_else(|| SolverError::Form(crate::forms::FormError::Invalid("empty form family".into())))?;
    let d = v
        .dim_hint()
        .ok_or(SolverError::Variety(crate::variety::VarietyError::DimensionUnknown))?;
    let sigma = match cfg.sigma {
        Some(s) => s,
        None => SolverConfig {
            mode: SolverMode::Cone,
            p,
            ..*cfg
        }
        .resolve_sigma(q, d)?,
    };
    let solve_cfg = SolverConfig {
        sigma: Some(sigma),
        p,
        ..*cfg
    };
    let estimator = LpEstimator::with_sigma(d, p, q, sigma, radius);
    let solved = solve_basis(v, atlas, basis, radius, sampler, &solve_cfg)?;

    let count = 2 * base_size - 1;
    let ratio_of = |coef: &[C64]| -> Result<f64, SolverError> {
        let combo = combine(basis, coef);
        let num = solved.norm(p, |vals, jac| {
            let mut acc = Covector::zero(vals[0].dim, vals[0].degree);
            for (c, v) in coef.iter().zip(vals) {
                acc.add_scaled(v, *c);
            }
            pointwise(&acc, jac)
        })?;
        let den = lp_norm(&combo, atlas, radius, p, sampler)?.value;
        Ok(if den > 0.0 { num / den } else { f64::NAN })
    };
    let ratios = (0..count)
        .map(|k| ratio_of(&combination_coefficients(basis.len(), k, count)))
        .collect::<Result<Vec<_>, _>>()?;
    let unit = |j: usize| {
        let mut c = vec![C64::new(0.0, 0.0); basis.len()];
        c[j] = C64::new(1.0, 0.0);
        c
    };
    let basis_ratios = (0..basis.len())
        .map(|j| ratio_of(&unit(j)))
        .collect::<Result<Vec<_>, _>>()?;
    let scaled_ratios = [C64::new(2.0, 0.0), C64::new(0.0, -0.5), C64::new(-3.0, 1.0)]
        .iter()
        .map(|&c| {
            let mut coef = unit(0);
            coef[0] = c;
            ratio_of(&coef)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LpBoundProbe {
        estimator,
        samples: solved.values.len(),
        family: FamilyRatios::from_doubled(ratios),
        basis_ratios,
        scaled_ratios,
    })
}

fn combine(basis: &[AntiForm], coef: &[C64]) -> AntiForm {
    let mut out = basis[0].scaled(coef[0]);
    for (f, c) in basis.iter().zip(coef).skip(1) {
        out = out.sum(&f.scaled(*c)).expect("basis forms share dimension and degree");
    }
    out
}

fn solve_basis<'a>(
    v: &WeightedVariety,
    atlas: &'a Atlas,
    basis: &[AntiForm],
    radius: f64,
    sampler: &Sampler,
    cfg: &SolverConfig,
) -> Result<SolvedBasis<'a>, SolverError> {
    let values = Mutex::new(HashMap::new());
    let failure = Mutex::new(None);
    atlas.integrate(radius, sampler, |z, _| {
        let vals: Result<Vec<Covector>, SolverError> =
            basis.iter().map(|f| solve(f, v, z, cfg).map(|s| s.value)).collect();
        match vals {
            Ok(vals) => {
                values.lock().expect("lock").insert(point_key(z), vals);
            }
            Err(e) => {
                failure.lock().expect("lock").get_or_insert(e);
            }
        }
        0.0
    })?;
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(SolvedBasis {
        atlas,
        radius,
        sampler: *sampler,
        values: values.into_inner().expect("lock"),
    })
}

/// `ω_r = χ(|z₁|/r)·(z₁/r) dz̄₁` on `ℂⁿ` with `χ = 1` on `[0, 1/2]`, `0` past 1.
pub fn shrinking_bumps(n: usize, radii: &[f64]) -> Result<Vec<(f64, AntiForm)>, SolverError> {
    radii
        .iter()
        .map(|&r| {
            let src = format!("bump({}, {}) * z1 / {}", 0.5 * r, r, r);
            let form = AntiForm::from_exprs(n, 1, r, &[("1", src.as_str())])?;
            Ok((r, form.with_name(format!("shrink-{r}"))))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkingProbe {
    pub estimator: LpEstimator,
    /// `(support radius, ‖Sω_r‖_p / ‖ω_r‖_p)`.
    pub ratios: Vec<(f64, f64)>,
    /// Last ratio over first.
    pub growth: f64,
}

/// Ratios along a sequence of forms with shrinking supports at a fixed `σ`.
/// `output` samples `Sω` over `Σ ∩ B_R`; `input` must resolve the smallest
/// support.
#[allow(clippy::too_many_arguments)]
pub fn shrinking_support_probe(
    v: &WeightedVariety,
    atlas: &Atlas,
    forms: &[(f64, AntiForm)],
    sigma: i32,
    p: LpExponent,
    radius: f64,
    output: &Sampler,
    input: &Sampler,
    cfg: &SolverConfig,
) -> Result<ShrinkingProbe, SolverError> {
    let d = v
        .dim_hint()
        .ok_or(SolverError::Variety(crate::variety::VarietyError::DimensionUnknown))?;
    let q = forms.first().map(|(_, f)| f.degree()).unwrap_or(1);
    let solve_cfg = SolverConfig {
        sigma: Some(sigma),
        p,
        ..*cfg
    };
    let mut ratios = Vec::with_capacity(forms.len());
    for (r, form) in forms {
        let solved = solve_basis(v, atlas, std::slice::from_ref(form), radius, output, &solve_cfg)?;
        let num = solved.norm(p, |vals, jac| pointwise(&vals[0], jac))?;
        let den = lp_norm(form, atlas, radius, p, input)?.value;
        ratios.push((*r, num / den));
    }
    let growth = match (ratios.first(), ratios.last()) {
        (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
        _ => f64::NAN,
    };
    Ok(ShrinkingProbe {
        estimator: LpEstimator::with_sigma(d, p, q, sigma, radius),
        ratios,
        growth,
    })
}
