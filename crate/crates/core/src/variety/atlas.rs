//! Global parametrizations of whole varieties, used for volume integrals and
//! `Lᵖ` norms over `Σ ∩ B_R`.

use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::gauss::radial_rule;
use crate::linalg::{self, CMatrix};
use crate::C64;

use super::VarietyError;

pub type MapFn = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;
pub type RadiiFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// How integrals over parameter polydiscs are discretised.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sampler {
    /// Tensor polar rule per complex parameter: graded Gauss–Legendre in the
    /// radius, trapezoid in the angle.
    Product {
        rings: usize,
        order: usize,
        angles: usize,
        tau_min: f64,
    },
    /// Uniform Monte Carlo on the parameter polydisc.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::Product {
            rings: 2,
            order: 8,
            angles: 24,
            tau_min: 1e-6,
        }
    }
}

impl Sampler {
    /// Same sampler with doubled resolution.
    pub fn refined(&self) -> Sampler {
        match *self {
            Sampler::Product {
                rings,
                order,
                angles,
                tau_min,
            } => Sampler::Product {
                rings: 2 * rings,
                order,
                angles: 2 * angles,
                tau_min,
            },
            Sampler::MonteCarlo { samples, seed } => Sampler::MonteCarlo {
                samples: 2 * samples,
                seed,
            },
        }
    }
}

/// Integral estimate with a standard error (zero for deterministic rules).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// A holomorphic map from a polydisc in `ℂ^d` onto (a dense open subset of)
/// the variety, generically `multiplicity`-to-one.
#[derive(Clone)]
pub struct Parametrization {
    pub name: String,
    pub dim: usize,
    pub map: MapFn,
    /// Polydisc radii whose image contains `Σ ∩ B_R`.
    pub radii_for: RadiiFn,
    pub multiplicity: f64,
}

impl fmt::Debug for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Parametrization")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("multiplicity", &self.multiplicity)
            .finish()
    }
}

impl Parametrization {
    pub fn eval(&self, w: &[C64]) -> Vec<C64> {
        (self.map)(w)
    }

    /// Holomorphic Jacobian by fourth-order central differences.
    pub fn jacobian(&self, w: &[C64]) -> CMatrix {
        let z0 = self.eval(w);
        let n = z0.len();
        let mut jac = CMatrix::zeros(n, self.dim);
        let mut wk = w.to_vec();
        for a in 0..self.dim {
            let h = 1e-3 * (1.0 + w[a].norm());
            let mut col = vec![C64::new(0.0, 0.0); n];
            for (shift, coef) in [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)] {
                wk[a] = w[a] + shift * h;
                for (c, v) in col.iter_mut().zip(self.eval(&wk)) {
                    *c += v * coef;
                }
            }
            wk[a] = w[a];
            for (k, c) in col.into_iter().enumerate() {
                jac[(k, a)] = c / (12.0 * h);
            }
        }
        jac
    }
}

/// A finite set of parametrizations with pairwise negligible overlaps.
#[derive(Clone, Debug, Default)]
pub struct Atlas {
    pub parametrizations: Vec<Parametrization>,
    /// Largest radius `R` for which the atlas covers `Σ ∩ B_R`.
    pub covered_radius: f64,
}

impl Atlas {
    pub fn new(parametrizations: Vec<Parametrization>) -> Self {
        Self {
            parametrizations,
            covered_radius: f64::INFINITY,
        }
    }

    /// `∫_{Σ ∩ B_R} f dV_Σ`, where `f` receives the point and the
    /// parametrization Jacobian at that point.
    pub fn integrate<F>(&self, radius: f64, sampler: &Sampler, f: F) -> Result<Estimate, VarietyError>
    where
        F: Fn(&[C64], &CMatrix) -> f64 + Sync,
    {
        if radius > self.covered_radius {
            return Err(VarietyError::AtlasIncomplete {
                requested: radius,
                covered: self.covered_radius,
            });
        }
        let mut total = Estimate::default();
        for par in &self.parametrizations {
            let est = integrate_parametrization(par, radius, sampler, &f);
            total.value += est.value;
            total.std_err = total.std_err.hypot(est.std_err);
            total.samples += est.samples;
        }
        Ok(total)
    }

    /// Largest value of `f` over the sample points of `Σ ∩ B_R`, ignoring
    /// points where the parametrization degenerates.
    pub fn sup<F>(&self, radius: f64, sampler: &Sampler, f: F) -> Result<f64, VarietyError>
    where
        F: Fn(&[C64], &CMatrix) -> f64 + Sync,
    {
        if radius > self.covered_radius {
            return Err(VarietyError::AtlasIncomplete {
                requested: radius,
                covered: self.covered_radius,
            });
        }
        let mut best = 0.0_f64;
        for par in &self.parametrizations {
            // density 1 in place of det G so that the sampled value is `f` itself
            let values = sample_parametrization(par, radius, sampler, &|z: &[C64], jac: &CMatrix| {
                let density = linalg::det(&linalg::gram(jac)).re;
                if density > 0.0 {
                    f(z, jac) / density
                } else {
                    0.0
                }
            });
            best = values.iter().map(|(_, v)| *v).fold(best, f64::max);
        }
        Ok(best)
    }
}

/// Weighted point values `(weight, f·density)` of one parametrization; the
/// weights include the polydisc measure but not the multiplicity.
fn sample_parametrization<F>(par: &Parametrization, radius: f64, sampler: &Sampler, f: &F) -> Vec<(f64, f64)>
where
    F: Fn(&[C64], &CMatrix) -> f64 + Sync,
{
    let radii = (par.radii_for)(radius);
    let integrand = |w: &[C64]| -> f64 {
        let z = par.eval(w);
        if linalg::norm(&z) > radius {
            return 0.0;
        }
        let jac = par.jacobian(w);
        let density = linalg::det(&linalg::gram(&jac)).re;
        if density <= 0.0 {
            return 0.0;
        }
        f(&z, &jac) * density
    };
    match *sampler {
        Sampler::Product {
            rings,
            order,
            angles,
            tau_min,
        } => {
            let rule = radial_rule(rings, order, tau_min);
            let axes: Vec<Vec<(C64, f64)>> = radii
                .iter()
                .map(|&r| {
                    let mut nodes = Vec::with_capacity(rule.len() * angles);
                    for &(tau, wt) in &rule {
                        for j in 0..angles {
                            let th = std::f64::consts::TAU * (j as f64 + 0.5) / angles as f64;
                            nodes.push((
                                C64::from_polar(r * tau, th),
                                wt * r * r * tau * std::f64::consts::TAU / angles as f64,
                            ));
                        }
                    }
                    nodes
                })
                .collect();
            let total: usize = axes.iter().map(Vec::len).product();
            (0..total)
                .into_par_iter()
                .map(|mut idx| {
                    let mut w = Vec::with_capacity(axes.len());
                    let mut weight = 1.0;
                    for axis in &axes {
                        let (p, wt) = axis[idx % axis.len()];
                        idx /= axis.len();
                        w.push(p);
                        weight *= wt;
                    }
                    (weight, integrand(&w))
                })
                .collect()
        }
        Sampler::MonteCarlo { samples, seed } => {
            let mut rng = StdRng::seed_from_u64(seed);
            let points: Vec<Vec<C64>> = (0..samples)
                .map(|_| {
                    radii
                        .iter()
                        .map(|&r| {
                            C64::from_polar(r * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>())
                        })
                        .collect()
                })
                .collect();
            let volume: f64 = radii.iter().map(|r| std::f64::consts::PI * r * r).product();
            let weight = volume / samples.max(1) as f64;
            points.par_iter().map(|w| (weight, integrand(w))).collect()
        }
    }
}

fn integrate_parametrization<F>(par: &Parametrization, radius: f64, sampler: &Sampler, f: &F) -> Estimate
where
    F: Fn(&[C64], &CMatrix) -> f64 + Sync,
{
    let values = sample_parametrization(par, radius, sampler, f);
    let scale = 1.0 / par.multiplicity;
    let n = values.len();
    let value = scale * values.iter().map(|(w, v)| w * v).sum::<f64>();
    let std_err = match sampler {
        Sampler::Product { .. } => 0.0,
        Sampler::MonteCarlo { .. } => {
            // equal weights: standard error of the sample mean times the volume
            let nf = n.max(1) as f64;
            let wv: Vec<f64> = values.iter().map(|(w, v)| w * v * nf).collect();
            let mean = wv.iter().sum::<f64>() / nf;
            let var = wv.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
            scale * (var / nf).sqrt()
        }
    };
    Estimate {
        value,
        std_err,
        samples: n,
    }
}

/// A chart `x ↦ γ(x)` of the projectivization of a cone, with
/// representatives `γ(x) ≠ 0` and domain the polydisc of radius `radius`.
#[derive(Clone)]
pub struct ProjectiveChart {
    pub name: String,
    /// `d − 1`.
    pub dim: usize,
    pub map: MapFn,
    pub radius: f64,
}

impl fmt::Debug for ProjectiveChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProjectiveChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("radius", &self.radius)
            .finish()
    }
}

/// Charts of the projectivization whose images are disjoint up to measure
/// zero and cover it.
#[derive(Clone, Debug, Default)]
pub struct ProjectiveAtlas {
    pub charts: Vec<ProjectiveChart>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Atlas {
        Atlas::new(vec![Parametrization {
            name: "line".into(),
            dim: 1,
            map: Arc::new(|w| vec![w[0], C64::new(0.0, 0.0)]),
            radii_for: Arc::new(|r| vec![r]),
            multiplicity: 1.0,
        }])
    }

    #[test]
    fn unit_disc_area() {
        let est = line().integrate(1.0, &Sampler::default(), |_, _| 1.0).unwrap();
        assert!((est.value - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_reports_error() {
        let sampler = Sampler::MonteCarlo { samples: 4000, seed: 1 };
        let est = line().integrate(1.0, &sampler, |z, _| z[0].norm_sqr()).unwrap();
        let exact = std::f64::consts::PI / 2.0;
        assert!(est.std_err > 0.0);
        assert!((est.value - exact).abs() < 5.0 * est.std_err);
    }

    #[test]
    fn sup_of_modulus() {
        let s = line().sup(2.0, &Sampler::default(), |z, _| z[0].norm()).unwrap();
        assert!(s > 1.9 && s <= 2.0);
    }

    #[test]
    fn incomplete_atlas_is_reported() {
        let mut atlas = line();
        atlas.covered_radius = 1.0;
        assert!(matches!(
            atlas.integrate(2.0, &Sampler::default(), |_, _| 1.0),
            Err(VarietyError::AtlasIncomplete { .. })
        ));
    }
}
