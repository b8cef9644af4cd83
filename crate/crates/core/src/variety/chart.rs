//! Generalised-cone charts `Π(s, x) = s^β * (ξ_c, π(x))` around regular points.

use crate::linalg::{self, CMatrix};
use crate::C64;

use super::{scale_action, VarietyError, WPolynomial, WeightVector, WeightedVariety};

const NEWTON_MAX_ITER: usize = 40;
const THETA_RATIO: f64 = 1e-6;
const MIN_RADIUS: f64 = 1e-10;

/// Value and holomorphic Jacobian of a chart at `w = (s, x)`.
#[derive(Clone, Debug)]
pub struct ChartPoint {
    pub z: Vec<C64>,
    /// `n × d` matrix; column 0 is `∂/∂s`, column `a + 1` is `∂/∂x_a`.
    pub jacobian: CMatrix,
}

/// Numeric chart of `Σ_reg` near a point `ξ`.
///
/// The slice through `ξ` is written as a graph over `d − 1` free coordinates;
/// the remaining `n − d` coordinates are recovered by Newton's method. The
/// domain `U` is the polydisc of radius [`Chart::radius`] around `ζ`.
#[derive(Clone, Debug)]
pub struct Chart {
    weights: WeightVector,
    center: Vec<C64>,
    coord: usize,
    xi_c: C64,
    free: Vec<usize>,
    dep: Vec<usize>,
    equations: Vec<WPolynomial>,
    zeta: Vec<C64>,
    dep0: Vec<C64>,
    radius: f64,
    dim: usize,
}

impl Chart {
    /// Complex dimension `d` of the variety (and of the chart domain `ℂ × U`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[C64] {
        &self.center
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    /// Index of the coordinate held fixed on the slice.
    pub fn coord(&self) -> usize {
        self.coord
    }

    /// Ambient indices used as graph coordinates of the slice.
    pub fn free_coords(&self) -> &[usize] {
        &self.free
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Base parameter `ζ ∈ U`.
    pub fn zeta(&self) -> &[C64] {
        &self.zeta
    }

    /// Chart coordinates `(1, ζ)` of the center.
    pub fn base_parameter(&self) -> Vec<C64> {
        let mut w = vec![C64::new(1.0, 0.0)];
        w.extend_from_slice(&self.zeta);
        w
    }

    pub fn contains(&self, x: &[C64]) -> bool {
        x.len() == self.zeta.len()
            && x.iter()
                .zip(&self.zeta)
                .all(|(a, b)| (a - b).norm() <= self.radius * (1.0 + 1e-9))
    }

    /// Point `(ξ_c, π(x))` of the slice and its derivative `dπ` (`n × (d−1)`).
    pub fn slice_point(&self, x: &[C64]) -> Result<(Vec<C64>, CMatrix), VarietyError> {
        if x.len() != self.zeta.len() {
            return Err(VarietyError::DimensionMismatch {
                expected: self.zeta.len(),
                got: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(VarietyError::OutsideChart);
        }
        let y = self
            .newton(x, &self.dep0)
            .ok_or(VarietyError::NewtonDivergence { radius: self.radius })?;
        let dy = self.slice_derivative(&y)?;
        Ok((y, dy))
    }

    /// `Π(s, x)`.
    pub fn map(&self, w: &[C64]) -> Result<Vec<C64>, VarietyError> {
        let (y, _) = self.slice_point(&w[1..])?;
        Ok(scale_action(w[0], &y, &self.weights))
    }

    /// `Π(s, x)` with its holomorphic Jacobian.
    pub fn eval(&self, w: &[C64]) -> Result<ChartPoint, VarietyError> {
        if w.len() != self.dim {
            return Err(VarietyError::DimensionMismatch {
                expected: self.dim,
                got: w.len(),
            });
        }
        let s = w[0];
        let (y, dy) = self.slice_point(&w[1..])?;
        let n = self.ambient_dim();
        let beta = self.weights.as_slice();
        let mut jac = CMatrix::zeros(n, self.dim);
        let mut z = Vec::with_capacity(n);
        for k in 0..n {
            let b = beta[k];
            let sb = s.powu(b);
            z.push(sb * y[k]);
            jac[(k, 0)] = s.powu(b - 1) * b as f64 * y[k];
            for a in 0..self.dim - 1 {
                jac[(k, a + 1)] = sb * dy[(k, a)];
            }
        }
        Ok(ChartPoint { z, jacobian: jac })
    }

    fn assemble(&self, x: &[C64], ydep: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.ambient_dim()];
        y[self.coord] = self.xi_c;
        for (i, &k) in self.free.iter().enumerate() {
            y[k] = x[i];
        }
        for (i, &k) in self.dep.iter().enumerate() {
            y[k] = ydep[i];
        }
        y
    }

    fn newton(&self, x: &[C64], start: &[C64]) -> Option<Vec<C64>> {
        let m = self.dep.len();
        let mut ydep = start.to_vec();
        if m == 0 {
            return Some(self.assemble(x, &ydep));
        }
        for _ in 0..NEWTON_MAX_ITER {
            let y = self.assemble(x, &ydep);
            let f: Vec<C64> = self.equations.iter().map(|q| q.eval(&y)).collect();
            let mut jm = CMatrix::zeros(m, m);
            for (e, q) in self.equations.iter().enumerate() {
                let g = q.gradient(&y);
                for (i, &k) in self.dep.iter().enumerate() {
                    jm[(e, i)] = g[k];
                }
            }
            let step = linalg::solve(&jm, &f)?;
            let mut size = 0.0f64;
            for (v, dv) in ydep.iter_mut().zip(&step) {
                *v -= dv;
                size = size.max(dv.norm());
            }
            if !size.is_finite() {
                return None;
            }
            let scale = 1.0 + linalg::norm(&y);
            if size <= 1e-15 * scale {
                return Some(self.assemble(x, &ydep));
            }
        }
        let y = self.assemble(x, &ydep);
        let res: f64 = self.equations.iter().map(|q| q.eval(&y).norm()).fold(0.0, f64::max);
        (res <= 1e-12 * (1.0 + linalg::norm(&y))).then_some(y)
    }

    fn slice_derivative(&self, y: &[C64]) -> Result<CMatrix, VarietyError> {
        let n = self.ambient_dim();
        let m = self.dep.len();
        let f = self.free.len();
        let mut dy = CMatrix::zeros(n, f);
        for (a, &k) in self.free.iter().enumerate() {
            dy[(k, a)] = C64::new(1.0, 0.0);
        }
        if m == 0 || f == 0 {
            return Ok(dy);
        }
        let mut jd = CMatrix::zeros(m, m);
        let mut jf = CMatrix::zeros(m, f);
        for (e, q) in self.equations.iter().enumerate() {
            let g = q.gradient(y);
            for (i, &k) in self.dep.iter().enumerate() {
                jd[(e, i)] = g[k];
            }
            for (a, &k) in self.free.iter().enumerate() {
                jf[(e, a)] = g[k];
            }
        }
        let inv = linalg::inverse(&jd).ok_or(VarietyError::SingularSlice)?;
        let sol = -(inv * jf);
        for (i, &k) in self.dep.iter().enumerate() {
            for a in 0..f {
                dy[(k, a)] = sol[(i, a)];
            }
        }
        Ok(dy)
    }

    fn continuation(&self, x: &[C64], steps: usize) -> Option<Vec<C64>> {
        let mut ydep = self.dep0.clone();
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let xt: Vec<C64> = self.zeta.iter().zip(x).map(|(a, b)| a + (b - a) * t).collect();
            let y = self.newton(&xt, &ydep)?;
            ydep = self.dep.iter().map(|&k| y[k]).collect();
        }
        Some(self.assemble(x, &ydep))
    }

    fn validation_points(&self) -> Vec<Vec<C64>> {
        let f = self.zeta.len();
        let mut pts = vec![self.zeta.clone()];
        for j in 0..8 {
            let th = std::f64::consts::TAU * j as f64 / 8.0;
            let e = C64::from_polar(self.radius, th);
            for a in 0..f {
                let mut x = self.zeta.clone();
                x[a] += e;
                pts.push(x);
            }
            if f > 1 {
                pts.push(
                    self.zeta
                        .iter()
                        .enumerate()
                        .map(|(a, v)| v + e * C64::from_polar(1.0, 1.3 * a as f64))
                        .collect(),
                );
            }
        }
        pts
    }

    fn validate(&self) -> bool {
        let mut theta_min = f64::INFINITY;
        let mut theta_max = 0.0f64;
        for x in self.validation_points() {
            let direct = match self.newton(&x, &self.dep0) {
                Some(y) => y,
                None => return false,
            };
            let cont = match self.continuation(&x, 8) {
                Some(y) => y,
                None => return false,
            };
            let dev = linalg::norm(&direct.iter().zip(&cont).map(|(a, b)| a - b).collect::<Vec<_>>());
            if dev > 1e-8 * (1.0 + linalg::norm(&direct)) {
                return false;
            }
            let mut w = vec![C64::new(1.0, 0.0)];
            w.extend_from_slice(&x);
            let theta = match self.eval(&w) {
                Ok(p) => linalg::det(&linalg::gram(&p.jacobian)).re,
                Err(_) => return false,
            };
            theta_min = theta_min.min(theta.abs());
            theta_max = theta_max.max(theta.abs());
        }
        theta_max > 0.0 && theta_min >= THETA_RATIO * theta_max
    }
}

/// Builds a generalised-cone chart centred at the regular point `xi`.
pub fn cone_chart(v: &WeightedVariety, xi: &[C64]) -> Result<Chart, VarietyError> {
    let n = v.ambient_dim();
    if xi.len() != n {
        return Err(VarietyError::DimensionMismatch {
            expected: n,
            got: xi.len(),
        });
    }
    let slice = v.slice_variety(xi)?;
    if !v.membership(xi, 1e-8) {
        return Err(VarietyError::NotOnVariety);
    }
    let d = v.local_dimension(xi)?;
    if !v.is_regular_point(xi)? {
        return Err(VarietyError::NotRegular);
    }
    let coord = slice.coord();
    let others: Vec<usize> = (0..n).filter(|&k| k != coord).collect();
    let m = n - d;

    let (equations, dep) = if m == 0 {
        (Vec::new(), Vec::new())
    } else {
        let jac = v.jacobian(xi);
        let entry_scale = jac.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut best = (0.0f64, Vec::new(), Vec::new());
        for rows in linalg::combinations(v.generators().len(), m) {
            for cols in linalg::combinations(others.len(), m) {
                let cols: Vec<usize> = cols.iter().map(|&i| others[i]).collect();
                let val = linalg::minor(&jac, &rows, &cols).norm();
                if val > best.0 {
                    best = (val, rows.clone(), cols);
                }
            }
        }
        if best.0 <= 1e-10 * entry_scale.powi(m as i32) {
            return Err(VarietyError::SingularSlice);
        }
        let eqs = best.1.iter().map(|&r| v.generators()[r].clone()).collect();
        (eqs, best.2)
    };
    let free: Vec<usize> = others.iter().copied().filter(|k| !dep.contains(k)).collect();
    let mut chart = Chart {
        weights: v.weights().clone(),
        center: xi.to_vec(),
        coord,
        xi_c: xi[coord],
        zeta: free.iter().map(|&k| xi[k]).collect(),
        dep0: dep.iter().map(|&k| xi[k]).collect(),
        free,
        dep,
        equations,
        radius: 0.5 * linalg::norm(xi),
        dim: d,
    };
    if chart.zeta.is_empty() {
        chart.radius = 0.0;
        return Ok(chart);
    }
    while chart.radius >= MIN_RADIUS * linalg::norm(xi) {
        if chart.validate() {
            return Ok(chart);
        }
        chart.radius *= 0.5;
    }
    Err(VarietyError::NewtonDivergence { radius: chart.radius })
}

/// Density of `Π*dV_Σ` against Lebesgue measure on `ℂ × U`: `det(JᴴJ)`.
pub fn chart_volume_density(chart: &Chart, s: C64, x: &[C64]) -> Result<f64, VarietyError> {
    let mut w = vec![s];
    w.extend_from_slice(x);
    let p = chart.eval(&w)?;
    let g = linalg::gram(&p.jacobian);
    let det = linalg::det(&g).re;
    let scale: f64 = (0..g.nrows()).map(|i| g[(i, i)].re).product();
    if !(det > 1e-13 * scale) || scale == 0.0 {
        return Err(VarietyError::RankDeficient);
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::{WPolynomial, WeightVector};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
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
    fn cusp_chart_is_the_global_parametrization() {
        let ch = cone_chart(&cusp(), &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(ch.dim(), 1);
        assert!(ch.zeta().is_empty());
        let s = c(0.3, -0.7);
        let z = ch.map(&[s]).unwrap();
        assert!((z[0] - s.powu(3)).norm() < 1e-14);
        assert!((z[1] - s.powu(2)).norm() < 1e-14);
        let dens = chart_volume_density(&ch, s, &[]).unwrap();
        let expected = 9.0 * s.norm().powi(4) + 4.0 * s.norm().powi(2);
        assert!((dens - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn line_density_is_one() {
        let ch = cone_chart(&line(), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        for s in [c(1.0, 0.0), c(-2.0, 0.3), c(0.01, 0.02)] {
            assert!((chart_volume_density(&ch, s, &[]).unwrap() - 1.0).abs() < 1e-14);
        }
        let ch = cone_chart(&line(), &[c(0.5, 0.2), c(0.0, 0.0)]).unwrap();
        let d = chart_volume_density(&ch, c(0.3, 0.1), &[]).unwrap();
        assert!((d - 0.29).abs() < 1e-14);
    }

    #[test]
    fn cone_chart_invariants() {
        let v = cone();
        let xi = vec![c(1.0, 0.0); 3];
        let ch = cone_chart(&v, &xi).unwrap();
        assert_eq!(ch.dim(), 2);
        let center = ch.map(&ch.base_parameter()).unwrap();
        for (a, b) in center.iter().zip(&xi) {
            assert!((a - b).norm() < 1e-14);
        }
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let s = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let x: Vec<C64> = ch
                .zeta()
                .iter()
                .map(|z| z + C64::from_polar(ch.radius() * rng.gen::<f64>(), rng.gen_range(0.0..6.3)))
                .collect();
            let z = ch.map(&[s, x[0]]).unwrap();
            assert!(v.membership(&z, 1e-10));
            let d1 = chart_volume_density(&ch, s, &x).unwrap();
            let d2 = chart_volume_density(&ch, s * 2.0, &x).unwrap();
            assert!((d2 / d1 - 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let v = cone();
        let xi = v.project(&[c(0.4, 0.3), c(1.0, -0.5), c(0.2, 0.1)]).unwrap();
        let ch = cone_chart(&v, &xi).unwrap();
        let w = vec![c(0.9, 0.2), ch.zeta()[0] + c(0.01, -0.02)];
        let p = ch.eval(&w).unwrap();
        let h = 1e-6;
        for a in 0..2 {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[a] += h;
            wm[a] -= h;
            let zp = ch.map(&wp).unwrap();
            let zm = ch.map(&wm).unwrap();
            for k in 0..3 {
                let fd = (zp[k] - zm[k]) / (2.0 * h);
                assert!((fd - p.jacobian[(k, a)]).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn singular_point_is_rejected() {
        assert_eq!(
            cone_chart(&cone(), &[c(0.0, 0.0); 3]).unwrap_err(),
            VarietyError::ZeroCoordinate
        );
    }
}
