//! Integration over a homogeneous cone directly and as a radial integral
//! over lines followed by an integral over the projectivization.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::gauss::{gauss_legendre, push_panel, radial_rule};
use crate::linalg::{self, CMatrix};
use crate::variety::{Atlas, ProjectiveAtlas, ProjectiveChart, Sampler, VarietyError};
use crate::C64;

/// Discretisation of the nested integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedRule {
    /// Uniform Gauss panels on `|t| ∈ [0, R]`.
    pub radial_panels: usize,
    pub order: usize,
    /// Trapezoid nodes in `arg t`.
    pub angles: usize,
    /// Polar rule on each projective chart polydisc.
    pub chart_rings: usize,
    pub chart_angles: usize,
}

impl Default for NestedRule {
    fn default() -> Self {
        Self {
            radial_panels: 12,
            order: 8,
            angles: 16,
            chart_rings: 2,
            chart_angles: 32,
        }
    }
}

impl NestedRule {
    pub fn refined(&self) -> Self {
        Self {
            radial_panels: 2 * self.radial_panels,
            angles: 2 * self.angles,
            chart_rings: 2 * self.chart_rings,
            chart_angles: 2 * self.chart_angles,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FubiniCheck {
    pub direct: f64,
    pub nested: f64,
    /// `|direct − nested| / max(|direct|, |nested|)`, or the absolute
    /// difference if both vanish.
    pub relative_error: f64,
}

fn chart_jacobian(chart: &ProjectiveChart, x: &[C64]) -> CMatrix {
    let g0 = (chart.map)(x);
    let mut jac = CMatrix::zeros(g0.len(), chart.dim);
    let mut xs = x.to_vec();
    for a in 0..chart.dim {
        let h = 1e-3 * (1.0 + x[a].norm());
        for (shift, coef) in [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)] {
            xs[a] = x[a] + shift * h;
            for (k, v) in (chart.map)(&xs).into_iter().enumerate() {
                jac[(k, a)] += v * (coef / (12.0 * h));
            }
        }
        xs[a] = x[a];
    }
    jac
}

/// Density of the Fubini–Study volume against Lebesgue measure in the chart,
/// normalised so that `ℙ¹` has volume `π`.
pub fn fubini_study_density(chart: &ProjectiveChart, x: &[C64]) -> f64 {
    if chart.dim == 0 {
        return 1.0;
    }
    let g = (chart.map)(x);
    let jac = chart_jacobian(chart, x);
    let ng2: f64 = g.iter().map(|c| c.norm_sqr()).sum();
    let dot =
        |u: &dyn Fn(usize) -> C64, v: &dyn Fn(usize) -> C64| -> C64 { (0..g.len()).map(|k| u(k) * v(k).conj()).sum() };
    let m = chart.dim;
    let mut metric = CMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let jab = dot(&|k| jac[(k, a)], &|k| jac[(k, b)]);
            let jag = dot(&|k| jac[(k, a)], &|k| g[k]);
            let ggb = dot(&|k| g[k], &|k| jac[(k, b)]);
            metric[(a, b)] = (jab * ng2 - jag * ggb) / (ng2 * ng2);
        }
    }
    linalg::det(&metric).re.max(0.0)
}

/// `∫_ℂ Φ(ż t) |t|^{2d−2} dA(t)` over `|t| < R` for a unit vector `ż`.
pub fn radial_integral<F>(phi: &F, zdot: &[C64], d: usize, radius: f64, rule: &NestedRule) -> f64
where
    F: Fn(&[C64]) -> f64,
{
    let gl = gauss_legendre(rule.order);
    let mut nodes = Vec::new();
    for i in 0..rule.radial_panels {
        let a = radius * i as f64 / rule.radial_panels as f64;
        let b = radius * (i + 1) as f64 / rule.radial_panels as f64;
        push_panel(&gl, a, b, &mut nodes);
    }
    let mut total = 0.0;
    let mut z = vec![C64::new(0.0, 0.0); zdot.len()];
    for (r, w) in nodes {
        let mut ring = 0.0;
        for j in 0..rule.angles {
            let t = C64::from_polar(r, TAU * (j as f64 + 0.5) / rule.angles as f64);
            for (zk, dk) in z.iter_mut().zip(zdot) {
                *zk = dk * t;
            }
            ring += phi(&z);
        }
        total += w * r.powi(2 * d as i32 - 1) * ring * TAU / rule.angles as f64;
    }
    total
}

/// `∫_{ℙΣ} ∫_ℂ Φ(ż t) |t|^{2d−2} dA(t) dV_FS(ż)` with `ż = γ/‖γ‖` over the
/// charts `γ` of `proj`.
pub fn nested_integral<F>(proj: &ProjectiveAtlas, d: usize, phi: &F, radius: f64, rule: &NestedRule) -> f64
where
    F: Fn(&[C64]) -> f64 + Sync,
{
    let mut total = 0.0;
    for chart in &proj.charts {
        let inner = |x: &[C64]| -> f64 {
            let g = (chart.map)(x);
            let ng = linalg::norm(&g);
            let zdot: Vec<C64> = g.iter().map(|c| c / ng).collect();
            fubini_study_density(chart, x) * radial_integral(phi, &zdot, d, radius, rule)
        };
        if chart.dim == 0 {
            total += inner(&[]);
            continue;
        }
        let radial = radial_rule(rule.chart_rings, rule.order, 1e-6);
        let axis: Vec<(C64, f64)> = radial
            .iter()
            .flat_map(|&(tau, w)| {
                (0..rule.chart_angles).map(move |j| {
                    let th = TAU * (j as f64 + 0.5) / rule.chart_angles as f64;
                    let r = chart.radius;
                    (
                        C64::from_polar(r * tau, th),
                        w * r * r * tau * TAU / rule.chart_angles as f64,
                    )
                })
            })
            .collect();
        let count = axis.len().pow(chart.dim as u32);
        total += (0..count)
            .into_par_iter()
            .map(|mut idx| {
                let mut x = Vec::with_capacity(chart.dim);
                let mut weight = 1.0;
                for _ in 0..chart.dim {
                    let (p, w) = axis[idx % axis.len()];
                    idx /= axis.len();
                    x.push(p);
                    weight *= w;
                }
                weight * inner(&x)
            })
            .sum::<f64>();
    }
    total
}

/// Compares [`Atlas::integrate`] of `Φ·1_{‖z‖<R}` with [`nested_integral`].
pub fn nested_integral_check<F>(
    atlas: &Atlas,
    proj: &ProjectiveAtlas,
    d: usize,
    phi: F,
    radius: f64,
    sampler: &Sampler,
    rule: &NestedRule,
) -> Result<FubiniCheck, VarietyError>
where
    F: Fn(&[C64]) -> f64 + Sync,
{
    let direct = atlas.integrate(radius, sampler, |z, _| phi(z))?.value;
    let nested = nested_integral(proj, d, &phi, radius, rule);
    let diff = (direct - nested).abs();
    let scale = direct.abs().max(nested.abs());
    Ok(FubiniCheck {
        direct,
        nested,
        relative_error: if scale > 0.0 { diff / scale } else { diff },
    })
}
