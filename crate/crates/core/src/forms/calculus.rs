//! Finite-difference `∂̄`, pullbacks along holomorphic maps and induced
//! pointwise norms.

use std::sync::Arc;

use crate::linalg::{self, CMatrix};
use crate::variety::{scale_action, Chart};
use crate::C64;

use super::form::{AntiForm, Coefficient, Covector};
use super::multi_index::{sign_perm, MultiIndex};
use super::FormError;

/// Fourth-order central-difference `∂̄` of a covector field at `at`.
///
/// Uses `[−f(2h) + 8f(h) − 8f(−h) + f(−2h)] / 12h` along each real direction,
/// then `∂/∂w̄ = (∂_x + i∂_y)/2` and `(∂̄α)_J = Σ_{j∈J} sign(j, J∖j) ∂α_{J∖j}/∂w̄_j`.
pub fn dbar_fd<F, E>(field: F, at: &[C64], h: f64) -> Result<Covector, E>
where
    F: Fn(&[C64]) -> Result<Covector, E>,
{
    let m = at.len();
    let mut partials: Vec<Covector> = Vec::with_capacity(m);
    let mut degree = None;
    for a in 0..m {
        let mut acc: Option<Covector> = None;
        for (dir, weight) in [(C64::new(1.0, 0.0), 0.5), (C64::new(0.0, 1.0), 0.5)] {
            let factor = if dir.im == 0.0 {
                C64::new(weight, 0.0)
            } else {
                C64::new(0.0, weight)
            };
            for (k, coef) in [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)] {
                let mut w = at.to_vec();
                w[a] += dir * (k * h);
                let v = field(&w)?;
                degree.get_or_insert(v.degree);
                acc.get_or_insert_with(|| Covector::zero(v.dim, v.degree))
                    .add_scaled(&v, factor * (coef / (12.0 * h)));
            }
        }
        partials.push(acc.expect("stencil evaluated"));
    }
    let q = degree.unwrap_or(0);
    let mut out = Covector::zero(m, q + 1);
    for j in MultiIndex::all(m, q + 1) {
        let mut v = C64::new(0.0, 0.0);
        for &jj in j.entries() {
            let k = j.without(jj);
            let sign = sign_perm(jj, &k).expect("jj not in K");
            v += partials[jj].get(&k) * sign;
        }
        if v != C64::new(0.0, 0.0) {
            out.add(j, v);
        }
    }
    Ok(out)
}

/// The form `∂̄ω` with coefficients computed by [`dbar_fd`] on demand.
pub fn dbar_fd_form(form: &AntiForm, h: f64) -> AntiForm {
    let m = form.dim();
    let q = form.degree();
    let src = Arc::new(form.clone());
    let terms = MultiIndex::all(m, q + 1)
        .into_iter()
        .map(|j| {
            let src = Arc::clone(&src);
            let key = j.clone();
            let coef = Coefficient::custom(move |w| {
                dbar_fd(|p| Ok::<_, FormError>(src.eval(p)), w, h)
                    .expect("expression fields are total")
                    .get(&key)
            });
            (j, coef)
        })
        .collect();
    AntiForm::new(m, q + 1, form.support_radius() + 2.0 * h, terms).expect("valid degree")
}

/// Pullback of an ambient covector along a holomorphic map with Jacobian
/// `jac` (`n × m`): `(F*α)_A = Σ_I α_I · conj(det jac[I, A])`.
pub fn pullback_covector(alpha: &Covector, jac: &CMatrix) -> Covector {
    let m = jac.ncols();
    let q = alpha.degree;
    let mut out = Covector::zero(m, q);
    for a in MultiIndex::all(m, q) {
        let mut v = C64::new(0.0, 0.0);
        for (i, c) in alpha.iter() {
            v += c * linalg::minor(jac, i.entries(), a.entries()).conj();
        }
        if v != C64::new(0.0, 0.0) {
            out.add(a, v);
        }
    }
    out
}

/// `Π*ω` at chart coordinates `w = (s, x)`.
pub fn pullback_at(omega: &AntiForm, chart: &Chart, w: &[C64]) -> Result<Covector, FormError> {
    if omega.degree() > chart.dim() {
        return Err(FormError::DegreeOverflow {
            degree: omega.degree(),
            dim: chart.dim(),
        });
    }
    let p = chart.eval(w)?;
    Ok(pullback_covector(&omega.eval(&p.z), &p.jacobian))
}

/// `Π*ω` as a form on chart coordinates. Coefficients evaluate to NaN where
/// the chart cannot be evaluated; use [`pullback_at`] for fallible access.
pub fn pullback(omega: &AntiForm, chart: &Chart) -> Result<AntiForm, FormError> {
    if omega.degree() > chart.dim() {
        return Err(FormError::DegreeOverflow {
            degree: omega.degree(),
            dim: chart.dim(),
        });
    }
    let d = chart.dim();
    if omega.is_zero() {
        return Ok(AntiForm::zero(d, omega.degree()));
    }
    let shared = Arc::new((omega.clone(), chart.clone()));
    let terms = MultiIndex::all(d, omega.degree())
        .into_iter()
        .map(|a| {
            let shared = Arc::clone(&shared);
            let key = a.clone();
            let coef = Coefficient::custom(move |w| match pullback_at(&shared.0, &shared.1, w) {
                Ok(c) => c.get(&key),
                Err(_) => C64::new(f64::NAN, f64::NAN),
            });
            (a, coef)
        })
        .collect();
    AntiForm::new(d, omega.degree(), f64::INFINITY, terms)
}

/// Numerical derivative of the slice map `x ↦ (ξ_c, π(x))`.
fn slice_derivative_fd(chart: &Chart, x: &[C64]) -> Result<CMatrix, FormError> {
    let n = chart.ambient_dim();
    let f = x.len();
    let h = (1e-3 * chart.radius()).max(1e-6);
    let mut out = CMatrix::zeros(n, f);
    for a in 0..f {
        for (k, coef) in [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)] {
            let mut xs = x.to_vec();
            xs[a] += k * h;
            let (y, _) = chart.slice_point(&xs)?;
            for i in 0..n {
                out[(i, a)] += y[i] * (coef / (12.0 * h));
            }
        }
    }
    Ok(out)
}

/// `Π*ω` at `(s, x)` assembled from the split
/// `Σ_J f_J s̄^{β_J} ∧ dπ̄_j + Σ_J Σ_{j∈J} f_J β_j conj(s^{β_J−1} π_j) sign(j,K) ds̄ ∧ dπ̄_K`,
/// with `dπ` taken by finite differences of the slice map.
pub fn pullback_closed_form(omega: &AntiForm, chart: &Chart, s: C64, x: &[C64]) -> Result<Covector, FormError> {
    let d = chart.dim();
    let q = omega.degree();
    if q > d {
        return Err(FormError::DegreeOverflow { degree: q, dim: d });
    }
    let beta = chart.weights();
    let (y, _) = chart.slice_point(x)?;
    let dpi = slice_derivative_fd(chart, x)?;
    let z = scale_action(s, &y, beta);
    let f = omega.eval(&z);
    let mut out = Covector::zero(d, q);
    for (j, fj) in f.iter() {
        let bj = super::beta_sum(j, beta);
        for a in MultiIndex::all(d - 1, q) {
            let v = fj * s.powu(bj).conj() * linalg::minor(&dpi, j.entries(), a.entries()).conj();
            out.add(a.shifted(1), v);
        }
        for &jj in j.entries() {
            let k = j.without(jj);
            let sign = sign_perm(jj, &k)?;
            let lead = fj * beta.get(jj) as f64 * (s.powu(bj - 1) * y[jj]).conj() * sign;
            for a in MultiIndex::all(d - 1, q - 1) {
                let (_, key) = a.shifted(1).wedge_front(0)?;
                let v = lead * linalg::minor(&dpi, k.entries(), a.entries()).conj();
                out.add(key, v);
            }
        }
    }
    Ok(out)
}

/// Squared norm of a `(0,q)`-covector in chart coordinates for the metric
/// with Gram matrix `G`: `Σ_{A,B} conj(α_A) det(G⁻¹[A,B]) α_B`.
pub fn covector_norm_sq(alpha: &Covector, gram: &CMatrix) -> Result<f64, FormError> {
    if alpha.degree == 0 {
        return Ok(alpha.get(&MultiIndex::empty()).norm_sqr());
    }
    let ginv = linalg::inverse(gram).ok_or(FormError::RankDeficient)?;
    let mut acc = C64::new(0.0, 0.0);
    for (a, va) in alpha.iter() {
        for (b, vb) in alpha.iter() {
            acc += va.conj() * linalg::minor(&ginv, a.entries(), b.entries()) * vb;
        }
    }
    Ok(acc.re.max(0.0))
}

/// Norm of an ambient covector restricted to the image of `jac`.
pub fn restricted_norm(alpha: &Covector, jac: &CMatrix) -> Result<f64, FormError> {
    let pulled = pullback_covector(alpha, jac);
    let gram = linalg::gram(jac);
    let det = linalg::det(&gram).re;
    let scale: f64 = (0..gram.nrows()).map(|i| gram[(i, i)].re).product();
    if !(det > 1e-14 * scale) {
        return Err(FormError::RankDeficient);
    }
    Ok(covector_norm_sq(&pulled, &gram)?.sqrt())
}

/// Induced norm `|ω|_Σ` at `Π(w)`.
pub fn pointwise_norm(omega: &AntiForm, chart: &Chart, w: &[C64]) -> Result<f64, FormError> {
    let p = chart.eval(w)?;
    restricted_norm(&omega.eval(&p.z), &p.jacobian)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::expr::parse_expr;
    use crate::variety::{cone_chart, WPolynomial, WeightVector, WeightedVariety};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar(src: &str, n: usize) -> AntiForm {
        AntiForm::from_exprs(n, 0, 10.0, &[("", src)]).unwrap()
    }

    fn line() -> WeightedVariety {
        let q = WPolynomial::from_real(2, &[(&[0, 1], 1.0)]).unwrap();
        WeightedVariety::new(WeightVector::unit(2), vec![q], Some(1)).unwrap()
    }

    fn cusp() -> WeightedVariety {
        let q = WPolynomial::from_real(2, &[(&[2, 0], 1.0), (&[0, 3], -1.0)]).unwrap();
        WeightedVariety::new(WeightVector::new(vec![3, 2]).unwrap(), vec![q], Some(1)).unwrap()
    }

    fn cone() -> WeightedVariety {
        let q = WPolynomial::from_real(3, &[(&[1, 1, 0], 1.0), (&[0, 0, 2], -1.0)]).unwrap();
        WeightedVariety::new(WeightVector::unit(3), vec![q], Some(2)).unwrap()
    }

    #[test]
    fn dbar_fd_examples() {
        let at = [c(0.3, -0.2), c(0.1, 0.5)];
        let f = scalar("zb1", 2);
        let d = dbar_fd(|w| Ok::<_, FormError>(f.eval(w)), &at, 1e-2).unwrap();
        assert!((d.get(&MultiIndex::single(0)) - 1.0).norm() < 1e-10);
        assert!(d.get(&MultiIndex::single(1)).norm() < 1e-10);
        let f = scalar("exp(z1) * z2^3", 2);
        let d = dbar_fd(|w| Ok::<_, FormError>(f.eval(w)), &at, 1e-2).unwrap();
        assert!(d.max_abs() < 1e-9);
        let f = scalar("z1 * zb1", 2);
        let d = dbar_fd(|w| Ok::<_, FormError>(f.eval(w)), &at, 1e-2).unwrap();
        assert!((d.get(&MultiIndex::single(0)) - at[0]).norm() < 1e-10);
    }

    #[test]
    fn dbar_fd_is_fourth_order() {
        let f = scalar("exp(zb1 * z2) * zb2^2", 2);
        let g = parse_expr("exp(zb1 * z2) * zb2^2", 2).unwrap();
        let exact = g.diff(crate::forms::Var::Zb(0)).unwrap();
        let at = [c(0.3, -0.2), c(0.7, 0.5)];
        let errs: Vec<f64> = [1e-1, 5e-2, 2.5e-2]
            .iter()
            .map(|&h| {
                let d = dbar_fd(|w| Ok::<_, FormError>(f.eval(w)), &at, h).unwrap();
                (d.get(&MultiIndex::single(0)) - exact.eval(&at)).norm()
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 3.6 && rate < 4.4, "rate {rate}");
        }
    }

    #[test]
    fn dbar_of_dbar_vanishes() {
        let w = AntiForm::dbar_of(
            2,
            1.0,
            &[(MultiIndex::empty(), parse_expr("bump(0.3,1)*z1*zb2^2", 2).unwrap())],
        )
        .unwrap();
        let dd = dbar_fd(|p| Ok::<_, FormError>(w.eval(p)), &[c(0.4, 0.1), c(0.2, -0.3)], 1e-2).unwrap();
        assert!(dd.max_abs() < 1e-6);
        let form = dbar_fd_form(&w, 1e-2);
        assert_eq!(form.degree(), 2);
    }

    #[test]
    fn line_pullback_and_norms() {
        let ch = cone_chart(&line(), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let w = AntiForm::from_exprs(2, 1, 2.0, &[("1", "z1 * zb1 + 2")]).unwrap();
        let s = c(0.4, 0.3);
        let p = pullback_at(&w, &ch, &[s]).unwrap();
        assert!((p.get(&MultiIndex::single(0)) - (s.norm_sqr() + 2.0)).norm() < 1e-14);

        let dz1 = AntiForm::from_exprs(2, 1, 2.0, &[("1", "1")]).unwrap();
        let dz2 = AntiForm::from_exprs(2, 1, 2.0, &[("2", "1")]).unwrap();
        assert!((pointwise_norm(&dz1, &ch, &[s]).unwrap() - 1.0).abs() < 1e-14);
        assert!(pointwise_norm(&dz2, &ch, &[s]).unwrap().abs() < 1e-14);
        // adding a conormal coefficient leaves the norm unchanged
        let both = AntiForm::from_exprs(2, 1, 2.0, &[("1", "1"), ("2", "3 - z1")]).unwrap();
        assert!((pointwise_norm(&both, &ch, &[s]).unwrap() - 1.0).abs() < 1e-14);
        assert!(pullback(&AntiForm::zero(2, 1), &ch).unwrap().is_zero());
    }

    #[test]
    fn cusp_norm_of_dz1() {
        let ch = cone_chart(&cusp(), &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let dz1 = AntiForm::from_exprs(2, 1, 2.0, &[("1", "1")]).unwrap();
        for t in [c(0.5, 0.1), c(-1.2, 0.7), c(0.05, -0.02)] {
            let n2 = pointwise_norm(&dz1, &ch, &[t]).unwrap().powi(2);
            let a = 9.0 * t.norm().powi(4);
            let want = a / (a + 4.0 * t.norm_sqr());
            assert!((n2 - want).abs() < 1e-12 * want.max(1e-3));
        }
    }

    #[test]
    fn closed_form_split_matches_chain_rule() {
        let v = cone();
        let xi = v.project(&[c(0.7, 0.2), c(0.9, -0.3), c(0.4, 0.5)]).unwrap();
        let ch = cone_chart(&v, &xi).unwrap();
        let forms = [
            AntiForm::from_exprs(3, 1, 5.0, &[("1", "zb2 + z3"), ("2", "1"), ("3", "z1*zb3")]).unwrap(),
            AntiForm::from_exprs(3, 2, 5.0, &[("1,2", "1 + zb1"), ("1,3", "z2"), ("2,3", "zb3^2")]).unwrap(),
        ];
        for w in &forms {
            for (s, dx) in [
                (c(1.0, 0.0), c(0.0, 0.0)),
                (c(0.6, -0.8), c(0.01, 0.02)),
                (c(1.7, 0.4), c(-0.02, 0.0)),
            ] {
                let x = [ch.zeta()[0] + dx];
                let a = pullback_at(w, &ch, &[s, x[0]]).unwrap();
                let b = pullback_closed_form(w, &ch, s, &x).unwrap();
                let scale = a.max_abs().max(1e-300);
                assert!(a.difference(&b).max_abs() <= 1e-7 * scale);
            }
        }
    }

    #[test]
    fn norm_is_chart_independent() {
        let v = cone();
        let w = AntiForm::from_exprs(3, 1, 5.0, &[("1", "zb2 + z3"), ("2", "1"), ("3", "z1*zb3")]).unwrap();
        let z = v.project(&[c(0.7, 0.2), c(0.9, -0.3), c(0.4, 0.5)]).unwrap();
        let a = cone_chart(&v, &z).unwrap();
        let na = pointwise_norm(&w, &a, &a.base_parameter()).unwrap();
        // second chart centred at a rescaled point; z = Π(1/2, ζ') there
        let z2: Vec<C64> = z.iter().map(|v| v * 2.0).collect();
        let b = cone_chart(&v, &z2).unwrap();
        let mut wb = b.base_parameter();
        wb[0] = c(0.5, 0.0);
        let nb = pointwise_norm(&w, &b, &wb).unwrap();
        assert!((na - nb).abs() < 1e-6 * na);
    }

    #[test]
    fn degree_overflow() {
        let ch = cone_chart(&line(), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let w = AntiForm::from_exprs(2, 2, 2.0, &[("1,2", "1")]).unwrap();
        assert!(matches!(pullback(&w, &ch), Err(FormError::DegreeOverflow { .. })));
    }
}
