//! The solid Cauchy transform and the kernels of the solution operators.
//!
//! Orientation: `dt̄ ∧ dt = 2i dA`, hence
//! `(1/2πi) ∫ f(t) dt̄∧dt / (t − z) = (1/π) ∫ f(t) / (t − z) dA`.
//! With this convention `∂̄(I f) = EPSILON · f`.

use crate::C64;

use super::quadrature::{
    certify_support, integrate_plane, integrate_scalar, Disc, PlaneIntegral, QuadratureSpec, Refinement,
};
use super::QuadratureError;

/// Sign in `∂̄(I f) = ε f`, fixed by [`audit_orientation`].
pub const EPSILON: f64 = -1.0;

const FRAC_1_PI: f64 = std::f64::consts::FRAC_1_PI;

/// `I f(z) = (1/π) ∫ f(t) / (t − z) dA(t)` for `f` supported in
/// `|t| < outer_radius`.
pub fn cauchy_transform<F>(
    f: F,
    z: C64,
    outer_radius: f64,
    spec: &QuadratureSpec,
    refinement: Refinement,
) -> Result<PlaneIntegral, QuadratureError>
where
    F: Fn(C64) -> C64,
{
    let disc = Disc::support(C64::new(0.0, 0.0), outer_radius);
    certify_support(&disc, &f)?;
    let (_, mut res) = integrate_scalar(spec, disc, &[z], refinement, |t| f(t) / (t - z))?;
    res.value[0] *= FRAC_1_PI;
    res.error = res.error.map(|e| e * FRAC_1_PI);
    Ok(res)
}

/// `|t|^{−δ} ∫_{|w|<R} h(w) dw∧dw̄ / (w − t)` with `dw∧dw̄ = −2i dA`.
/// Infinite at `t = 0` unless the integral vanishes.
pub fn weighted_cauchy<F>(
    h: F,
    t: C64,
    delta: f64,
    radius: f64,
    spec: &QuadratureSpec,
    refinement: Refinement,
) -> Result<C64, QuadratureError>
where
    F: Fn(C64) -> C64,
{
    if !(0.0..1.0).contains(&delta) {
        return Err(QuadratureError::DeltaOutOfRange(delta));
    }
    let disc = Disc::domain(C64::new(0.0, 0.0), radius);
    let (v, _) = integrate_scalar(spec, disc, &[t], refinement, |w| h(w) / (w - t))?;
    Ok(C64::new(0.0, -2.0) * v / t.norm().powf(delta))
}

/// `∫_{|w|<R} dA / (|t|^δ |w − t|)`.
pub fn m1_integral(t: C64, delta: f64, radius: f64, spec: &QuadratureSpec) -> Result<f64, QuadratureError> {
    if !(0.0..1.0).contains(&delta) {
        return Err(QuadratureError::DeltaOutOfRange(delta));
    }
    let disc = Disc::domain(C64::new(0.0, 0.0), radius);
    let (v, _) = integrate_scalar(spec, disc, &[t], Refinement::Adaptive, |w| {
        C64::new(1.0 / (w - t).norm(), 0.0)
    })?;
    Ok(v.re / t.norm().powf(delta))
}

/// Radius of the disc `{u : s^β * z ∈ B_R}` enlarged by 1%, or `None` if
/// `z = 0`.
pub fn solution_kernel_support(z: &[C64], beta: &[u32], radius: f64) -> Option<f64> {
    z.iter()
        .zip(beta)
        .filter(|(zk, _)| zk.norm() > 0.0)
        .map(|(zk, &b)| (radius / zk.norm()).powf(1.0 / b as f64))
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))))
        .map(|r| 1.01 * r)
}

/// `(1/π) ∫ g_c(u) u^σ ū^{β_c − 1} / (u − 1) dA(u)` for every component `c`
/// of `g`, which must vanish for `|u| ≥ support_radius`.
pub fn solution_kernel_integral<F>(
    g: F,
    sigma: i32,
    betas: &[u32],
    support_radius: f64,
    spec: &QuadratureSpec,
    refinement: Refinement,
) -> Result<PlaneIntegral, QuadratureError>
where
    F: Fn(C64, &mut [C64]),
{
    for &b in betas {
        if sigma < -(b as i32) {
            return Err(QuadratureError::NonIntegrableAtZero { sigma, beta_j: b });
        }
    }
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let disc = Disc::support(zero, support_radius);
    let mut res = integrate_plane(spec, disc, &[zero, one], betas.len(), refinement, |u, out| {
        g(u, out);
        let base = u.powi(sigma) / (u - one);
        let ub = u.conj();
        for (o, &b) in out.iter_mut().zip(betas) {
            if *o != zero {
                *o *= base * ub.powu(b - 1);
            }
        }
    })?;
    for v in &mut res.value {
        *v *= FRAC_1_PI;
    }
    res.error = res.error.map(|e| e * FRAC_1_PI);
    Ok(res)
}

/// Scalar form of [`solution_kernel_integral`].
pub fn solution_kernel_scalar<F>(
    g: F,
    sigma: i32,
    beta_j: u32,
    support_radius: f64,
    spec: &QuadratureSpec,
    refinement: Refinement,
) -> Result<C64, QuadratureError>
where
    F: Fn(C64) -> C64,
{
    let res = solution_kernel_integral(
        |u, out| out[0] = g(u),
        sigma,
        &[beta_j],
        support_radius,
        spec,
        refinement,
    )?;
    Ok(res.value[0])
}

/// Fourth-order central-difference `∂/∂z̄` of a scalar function.
pub fn dbar_scalar_fd<F: FnMut(C64) -> C64>(mut f: F, z: C64, h: f64) -> C64 {
    let stencil = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];
    let mut dx = C64::new(0.0, 0.0);
    let mut dy = C64::new(0.0, 0.0);
    for (k, c) in stencil {
        dx += f(z + C64::new(k * h, 0.0)) * c;
        dy += f(z + C64::new(0.0, k * h)) * c;
    }
    (dx + C64::new(0.0, 1.0) * dy) / (24.0 * h)
}

/// Measures `∂̄(I f)(z₀) / f(z₀)` for a fixed smooth bump; the result is
/// `EPSILON` up to discretisation error.
pub fn audit_orientation(spec: &QuadratureSpec) -> Result<f64, QuadratureError> {
    let f = |t: C64| {
        let r = (t - C64::new(0.1, 0.0)).norm();
        crate::forms::cutoff(0.2, 0.9, r) * (C64::new(1.0, 0.0) + 0.5 * t.conj())
    };
    let z0 = C64::new(0.2, 0.1);
    let level = cauchy_transform(f, z0, 1.0, spec, Refinement::Adaptive)?.level;
    let mut failure = None;
    let d = dbar_scalar_fd(
        |z| match cauchy_transform(f, z, 1.0, spec, Refinement::Fixed(level)) {
            Ok(r) => r.value[0],
            Err(e) => {
                failure.get_or_insert(e);
                C64::new(f64::NAN, 0.0)
            }
        },
        z0,
        1e-2,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((d / f(z0)).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn orientation_sign() {
        let eps = audit_orientation(&QuadratureSpec::default()).unwrap();
        assert!((eps - EPSILON).abs() < 1e-6, "{eps}");
    }

    #[test]
    fn unit_disc_indicator() {
        let ind = |t: C64| if t.norm() < 1.0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
        let spec = QuadratureSpec::default();
        for z in [c(0.0, 0.0), c(0.3, -0.4), c(-0.7, 0.2)] {
            let v = cauchy_transform(ind, z, 1.0, &spec, Refinement::Adaptive)
                .unwrap()
                .value[0];
            assert!((v + z.conj()).norm() < 1e-9, "{z}: {v}");
        }
    }

    #[test]
    fn zero_input() {
        let spec = QuadratureSpec::default();
        let v = cauchy_transform(|_| c(0.0, 0.0), c(0.1, 0.0), 1.0, &spec, Refinement::Adaptive).unwrap();
        assert_eq!(v.value[0], c(0.0, 0.0));
        assert_eq!(
            weighted_cauchy(|_| c(0.0, 0.0), c(0.3, 0.0), 0.5, 1.0, &spec, Refinement::Adaptive).unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn weighted_cauchy_reduces_at_delta_zero() {
        let spec = QuadratureSpec::default();
        let h = |w: C64| c(crate::forms::cutoff(0.2, 0.8, w.norm()), 0.0) * w;
        let t = c(0.25, 0.1);
        let wc = weighted_cauchy(h, t, 0.0, 1.0, &spec, Refinement::Adaptive).unwrap();
        let ic = cauchy_transform(h, t, 1.0, &spec, Refinement::Adaptive).unwrap().value[0];
        // ∫ h dw∧dw̄/(w−t) = −2i·π·I h(t)
        assert!((wc - c(0.0, -2.0 * std::f64::consts::PI) * ic).norm() < 1e-9);
        assert!(matches!(
            weighted_cauchy(h, t, 1.0, 1.0, &spec, Refinement::Adaptive),
            Err(QuadratureError::DeltaOutOfRange(_))
        ));
    }

    #[test]
    fn m1_at_center() {
        // ∫_{|w|<1} dA/|w| = 2π
        let v = m1_integral(c(1e-300, 0.0), 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn support_radius_of_scaled_point() {
        let r = solution_kernel_support(&[c(0.5, 0.0), c(0.0, 0.0)], &[1, 1], 2.0).unwrap();
        assert!((r - 4.04).abs() < 1e-12);
        let r = solution_kernel_support(&[c(0.25, 0.0), c(0.5, 0.0)], &[2, 1], 1.0).unwrap();
        assert!((r - 2.0 * 1.01).abs() < 1e-12);
        assert!(solution_kernel_support(&[c(0.0, 0.0)], &[1], 1.0).is_none());
    }

    #[test]
    fn solution_kernel_rejects_nonintegrable() {
        let spec = QuadratureSpec::default();
        let err = solution_kernel_scalar(|_| c(1.0, 0.0), -3, 2, 1.0, &spec, Refinement::Adaptive);
        assert!(matches!(err, Err(QuadratureError::NonIntegrableAtZero { .. })));
    }

    #[test]
    fn solution_kernel_linearity() {
        let spec = QuadratureSpec::default();
        let g1 = |u: C64| c(crate::forms::cutoff(1.0, 2.0, u.norm()), 0.0);
        let g2 = |u: C64| g1(u) * u.conj();
        let a = c(0.3, -1.2);
        let lhs = solution_kernel_scalar(|u| g1(u) + a * g2(u), 0, 1, 2.5, &spec, Refinement::Fixed(1)).unwrap();
        let r1 = solution_kernel_scalar(g1, 0, 1, 2.5, &spec, Refinement::Fixed(1)).unwrap();
        let r2 = solution_kernel_scalar(g2, 0, 1, 2.5, &spec, Refinement::Fixed(1)).unwrap();
        assert!((lhs - r1 - a * r2).norm() < 1e-12);
    }
}
