//! Polar quadrature over a disc in `ℂ` with integrable point singularities.
//!
//! Each singular center gets its own polar rule graded geometrically toward
//! the center; a smooth partition of unity splits the integrand between the
//! centers. Angles use the offset trapezoid rule, radii the graded
//! Gauss–Legendre rule of [`radial_rule`]. Refinement doubles both the ring
//! density and the number of angles.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::forms::cutoff;
use crate::C64;

use super::gauss::radial_rule;
use super::QuadratureError;

/// Resolution and stopping parameters, independent of the integration domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Geometric rings per decade of radius at level 0.
    pub rings_per_decade: usize,
    /// Angular nodes per polar disc at level 0.
    pub angular_nodes: usize,
    /// Gauss–Legendre order of the outer radial panels.
    pub order: usize,
    /// Innermost graded radius, relative to the ray length.
    pub tau_min: f64,
    /// Stop when two successive levels differ by less than this, relative.
    pub target_rel_err: f64,
    /// Highest refinement level tried.
    pub max_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rings_per_decade: 3,
            angular_nodes: 64,
            order: 8,
            tau_min: 1e-8,
            target_rel_err: 1e-6,
            max_depth: 4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if self.rings_per_decade == 0 || self.angular_nodes < 4 || self.order < 2 {
            return Err(QuadratureError::InvalidSpec(format!(
                "need rings >= 1, angles >= 4, order >= 2; got {}, {}, {}",
                self.rings_per_decade, self.angular_nodes, self.order
            )));
        }
        if !(self.tau_min > 0.0 && self.tau_min < 0.1) {
            return Err(QuadratureError::InvalidSpec(format!(
                "tau_min must lie in (0, 0.1), got {}",
                self.tau_min
            )));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "tolerance must be positive, got {}",
                self.target_rel_err
            )));
        }
        Ok(())
    }

    /// Rings per decade and angular nodes at a refinement level.
    pub fn resolution(&self, level: usize) -> (usize, usize) {
        (self.rings_per_decade << level, self.angular_nodes << level)
    }

    /// The same spec one level finer.
    pub fn refined(&self) -> Self {
        Self {
            rings_per_decade: 2 * self.rings_per_decade,
            angular_nodes: 2 * self.angular_nodes,
            ..*self
        }
    }

    /// A finer rule sharing no node set with any level of `self`: doubled
    /// rings and angles and two more Gauss points per panel.
    pub fn reference(&self) -> Self {
        Self {
            order: self.order + 2,
            ..self.refined()
        }
    }
}

/// How the integrand relates to the disc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscKind {
    /// The integrand vanishes outside the disc and is smooth across its
    /// boundary; polar discs around singular centers may extend past it.
    Support,
    /// The integral is over the disc itself; nothing is evaluated outside.
    Domain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: C64,
    pub radius: f64,
    pub kind: DiscKind,
}

impl Disc {
    pub fn support(center: C64, radius: f64) -> Self {
        Self {
            center,
            radius,
            kind: DiscKind::Support,
        }
    }

    pub fn domain(center: C64, radius: f64) -> Self {
        Self {
            center,
            radius,
            kind: DiscKind::Domain,
        }
    }

    pub fn contains(&self, u: C64) -> bool {
        (u - self.center).norm() < self.radius
    }

    /// Distance from `from` (inside) to the boundary along direction `e`.
    fn ray_length(&self, from: C64, e: C64) -> f64 {
        let d = from - self.center;
        let b = (d * e.conj()).re;
        let c = d.norm_sqr() - self.radius * self.radius;
        (-b + (b * b - c).max(0.0).sqrt()).max(0.0)
    }
}

/// Whether to refine until convergence or evaluate a single level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Refinement {
    Adaptive,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneIntegral {
    pub value: Vec<C64>,
    /// Difference to the previous level; `None` for a fixed level.
    pub error: Option<f64>,
    pub level: usize,
    pub evaluations: usize,
}

/// Fraction of the distance to the primary center covered by a secondary disc.
const PRIMARY_GAP: f64 = 0.9;
/// The partition function of a secondary disc is 1 inside this fraction of its radius.
const INNER: f64 = 0.25;

struct Secondary {
    center: C64,
    rho: f64,
}

struct Plan {
    disc: Disc,
    primary: C64,
    secondary: Vec<Secondary>,
}

impl Plan {
    fn new(disc: Disc, centers: &[C64]) -> Result<Self, QuadratureError> {
        if !(disc.radius > 0.0 && disc.radius.is_finite()) {
            return Err(QuadratureError::InvalidSpec(format!(
                "disc radius must be positive and finite, got {}",
                disc.radius
            )));
        }
        let mut inside: Vec<C64> = Vec::new();
        for &c in centers {
            if disc.contains(c) && inside.iter().all(|&o| (o - c).norm() > 1e-12 * disc.radius) {
                inside.push(c);
            }
        }
        let primary = inside.first().copied().unwrap_or(disc.center);
        let mut secondary = Vec::new();
        for (i, &c) in inside.iter().enumerate().skip(1) {
            // secondary discs stay apart; only the primary center must be excluded
            let mut rho = inside
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, &o)| if j == 0 { PRIMARY_GAP } else { 0.5 } * (o - c).norm())
                .fold(f64::INFINITY, f64::min)
                .min(disc.radius);
            if disc.kind == DiscKind::Domain {
                rho = rho.min(disc.radius - (c - disc.center).norm());
            }
            secondary.push(Secondary { center: c, rho });
        }
        Ok(Self {
            disc,
            primary,
            secondary,
        })
    }

    fn partition(&self, u: C64) -> f64 {
        self.secondary
            .iter()
            .map(|s| cutoff(INNER * s.rho, s.rho, (u - s.center).norm()))
            .sum()
    }

    /// Integral and absolute mass per component at one level.
    fn evaluate<F>(&self, spec: &QuadratureSpec, level: usize, dim: usize, f: &F) -> (Vec<C64>, Vec<f64>, usize)
    where
        F: Fn(C64, &mut [C64]),
    {
        let (rings, angles) = spec.resolution(level);
        let rule = radial_rule(rings, spec.order, spec.tau_min);
        let dth = TAU / angles as f64;
        let mut value = vec![C64::new(0.0, 0.0); dim];
        let mut mass = vec![0.0; dim];
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        let mut evals = 0;
        let mut accumulate = |u: C64, weight: f64, buf: &mut [C64], evals: &mut usize| {
            f(u, buf);
            *evals += 1;
            for ((v, m), b) in value.iter_mut().zip(mass.iter_mut()).zip(buf.iter()) {
                *v += b * weight;
                *m += b.norm() * weight;
            }
        };
        for j in 0..angles {
            let e = C64::from_polar(1.0, dth * (j as f64 + 0.5));
            let len = self.disc.ray_length(self.primary, e);
            for &(tau, w) in &rule {
                let u = self.primary + e * (len * tau);
                let factor = 1.0 - self.partition(u);
                if factor <= 0.0 {
                    continue;
                }
                accumulate(u, w * len * len * tau * dth * factor, &mut buf, &mut evals);
            }
        }
        for s in &self.secondary {
            for j in 0..angles {
                let e = C64::from_polar(1.0, dth * (j as f64 + 0.5));
                for &(tau, w) in &rule {
                    let r = s.rho * tau;
                    let u = s.center + e * r;
                    let factor = cutoff(INNER * s.rho, s.rho, r);
                    if factor <= 0.0 {
                        continue;
                    }
                    accumulate(u, w * s.rho * s.rho * tau * dth * factor, &mut buf, &mut evals);
                }
            }
        }
        (value, mass, evals)
    }
}

/// `∫_disc f dA` for a vector-valued integrand with integrable singularities
/// at (some of) `centers`. `f(u, out)` writes `dim` values.
pub fn integrate_plane<F>(
    spec: &QuadratureSpec,
    disc: Disc,
    centers: &[C64],
    dim: usize,
    refinement: Refinement,
    f: F,
) -> Result<PlaneIntegral, QuadratureError>
where
    F: Fn(C64, &mut [C64]),
{
    spec.validate()?;
    let plan = Plan::new(disc, centers)?;
    match refinement {
        Refinement::Fixed(level) => {
            let (value, _, evaluations) = plan.evaluate(spec, level, dim, &f);
            Ok(PlaneIntegral {
                value,
                error: None,
                level,
                evaluations,
            })
        }
        Refinement::Adaptive => {
            let (mut prev, mass, mut evaluations) = plan.evaluate(spec, 0, dim, &f);
            if mass.iter().all(|&m| m == 0.0) {
                return Ok(PlaneIntegral {
                    value: prev,
                    error: Some(0.0),
                    level: 0,
                    evaluations,
                });
            }
            let mut achieved = f64::INFINITY;
            for level in 1..=spec.max_depth {
                let (value, mass, n) = plan.evaluate(spec, level, dim, &f);
                evaluations += n;
                let diff = value.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                let scale = value
                    .iter()
                    .zip(&mass)
                    .map(|(v, m)| v.norm().max(0.01 * m))
                    .fold(0.0, f64::max);
                if diff <= spec.target_rel_err * scale || scale == 0.0 {
                    return Ok(PlaneIntegral {
                        value,
                        error: Some(diff),
                        level,
                        evaluations,
                    });
                }
                achieved = diff / scale;
                prev = value;
            }
            Err(QuadratureError::NonConvergent {
                achieved,
                target: spec.target_rel_err,
                level: spec.max_depth,
            })
        }
    }
}

/// Scalar convenience wrapper around [`integrate_plane`].
pub fn integrate_scalar<F>(
    spec: &QuadratureSpec,
    disc: Disc,
    centers: &[C64],
    refinement: Refinement,
    f: F,
) -> Result<(C64, PlaneIntegral), QuadratureError>
where
    F: Fn(C64) -> C64,
{
    let res = integrate_plane(spec, disc, centers, 1, refinement, |u, out| out[0] = f(u))?;
    Ok((res.value[0], res))
}

/// Checks that `f` vanishes on rings just outside a support disc.
pub fn certify_support<F>(disc: &Disc, f: F) -> Result<(), QuadratureError>
where
    F: Fn(C64) -> C64,
{
    for scale in [1.0001, 1.01, 1.1, 1.5] {
        for j in 0..24 {
            let u = disc.center + C64::from_polar(disc.radius * scale, TAU * (j as f64 + 0.25) / 24.0);
            let v = f(u);
            if v != C64::new(0.0, 0.0) {
                return Err(QuadratureError::SupportOverflow(format!(
                    "integrand is {v} at {u}, outside the disc of radius {}",
                    disc.radius
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn disc_area_from_off_center() {
        let spec = QuadratureSpec::default();
        let disc = Disc::domain(c(0.3, -0.2), 1.7);
        let (v, _) = integrate_scalar(&spec, disc, &[c(1.2, 0.5)], Refinement::Fixed(0), |_| c(1.0, 0.0)).unwrap();
        assert!((v.re - PI * 1.7 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn inverse_distance_singularity() {
        // ∫_{|u|<1} du/|u − a| for |a| < 1 via the mean value over circles
        let a = c(0.4, 0.0);
        let spec = QuadratureSpec::default();
        let disc = Disc::domain(c(0.0, 0.0), 1.0);
        let (v, res) = integrate_scalar(&spec, disc, &[a], Refinement::Adaptive, |u| {
            c(1.0 / (u - a).norm(), 0.0)
        })
        .unwrap();
        let (w, _) = integrate_scalar(
            &spec,
            Disc::domain(c(0.0, 0.0), 1.0),
            &[c(0.0, 0.0), a],
            Refinement::Adaptive,
            |u| c(1.0 / (u - a).norm(), 0.0),
        )
        .unwrap();
        assert!(res.error.unwrap() < 1e-6 * v.norm());
        assert!((v - w).norm() < 1e-6 * v.norm(), "{v} vs {w}");
    }

    #[test]
    fn two_singularities_in_support_disc() {
        // ∫ χ(|u|) / ((u − a)(u − b)) against the same integral split by partial fractions
        let (a, b) = (c(0.2, 0.1), c(-0.5, 0.3));
        let chi = |u: C64| cutoff(1.0, 2.0, u.norm());
        let spec = QuadratureSpec::default();
        let disc = Disc::support(c(0.0, 0.0), 2.0);
        let (joint, _) = integrate_scalar(&spec, disc, &[a, b], Refinement::Adaptive, |u| {
            chi(u) / ((u - a) * (u - b))
        })
        .unwrap();
        let (pa, _) = integrate_scalar(&spec, disc, &[a], Refinement::Adaptive, |u| chi(u) / (u - a)).unwrap();
        let (pb, _) = integrate_scalar(&spec, disc, &[b], Refinement::Adaptive, |u| chi(u) / (u - b)).unwrap();
        let split = (pa - pb) / (a - b);
        assert!((joint - split).norm() < 1e-7, "{joint} vs {split}");
    }

    #[test]
    fn zero_integrand_stops_immediately() {
        let res = integrate_plane(
            &QuadratureSpec::default(),
            Disc::support(c(0.0, 0.0), 1.0),
            &[],
            2,
            Refinement::Adaptive,
            |_, out| out.fill(c(0.0, 0.0)),
        )
        .unwrap();
        assert_eq!(res.level, 0);
        assert_eq!(res.value, vec![c(0.0, 0.0); 2]);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let spec = QuadratureSpec {
            max_depth: 1,
            target_rel_err: 1e-14,
            ..Default::default()
        };
        let disc = Disc::domain(c(0.0, 0.0), 1.0);
        let err = integrate_scalar(&spec, disc, &[], Refinement::Adaptive, |u| {
            c((40.0 * u.re).sin().abs(), 0.0)
        });
        assert!(matches!(err, Err(QuadratureError::NonConvergent { .. })));
    }

    #[test]
    fn support_certificate() {
        let disc = Disc::support(c(0.0, 0.0), 1.0);
        assert!(certify_support(&disc, |u| c(cutoff(0.5, 1.0, u.norm()), 0.0)).is_ok());
        assert!(matches!(
            certify_support(&disc, |u| c(cutoff(0.5, 1.2, u.norm()), 0.0)),
            Err(QuadratureError::SupportOverflow(_))
        ));
    }

    #[test]
    fn invalid_spec() {
        let spec = QuadratureSpec {
            angular_nodes: 2,
            ..Default::default()
        };
        assert!(matches!(spec.validate(), Err(QuadratureError::InvalidSpec(_))));
    }
}
