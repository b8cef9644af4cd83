//! Weighted homogeneous varieties: the scaling action, weighted homogeneous
//! polynomials, membership and regularity tests, slice varieties and
//! generalised-cone charts.
//!
//! A polynomial `Q` is weighted homogeneous of degree `d` with respect to the
//! weight vector `β` when `Q(s^β * z) = s^d Q(z)`, where
//! `s^β * z = (s^{β₁} z₁, …, s^{βₙ} zₙ)`. The zero locus of finitely many such
//! polynomials (same `β`, possibly different degrees) is invariant under the
//! action, which is what makes the radial solution operators well defined.

mod atlas;
mod chart;
pub mod io;

pub use atlas::{Atlas, Estimate, Parametrization, ProjectiveAtlas, ProjectiveChart, Sampler};
pub use chart::{chart_volume_density, cone_chart, Chart, ChartPoint};

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMatrix};
use crate::C64;

/// Relative singular-value threshold used to decide Jacobian rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarietyError {
    #[error("weight vector must have length >= 2 and entries >= 1, got {0:?}")]
    InvalidWeights(Vec<i64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial has no terms")]
    ZeroPolynomial,
    #[error("terms have different weighted degrees ({first} and {second})")]
    MixedDegree { first: u32, second: u32 },
    #[error("weighted degree must be >= 1")]
    DegreeZero,
    #[error("homogeneity identity fails numerically (relative deviation {0:e})")]
    HomogeneityViolated(f64),
    #[error("pure dimension unknown and Jacobian rank is ambiguous")]
    DimensionUnknown,
    #[error("declared dimension {dim} is not valid for ambient dimension {n}")]
    InvalidDimension { dim: usize, n: usize },
    #[error("every coordinate of the point vanishes")]
    ZeroCoordinate,
    #[error("point is not a regular point of the variety")]
    NotRegular,
    #[error("point does not lie on the variety")]
    NotOnVariety,
    #[error("Newton corrector diverged (chart radius {radius:e})")]
    NewtonDivergence { radius: f64 },
    #[error("slice variety is singular at the projected point")]
    SingularSlice,
    #[error("Gram matrix is numerically singular")]
    RankDeficient,
    #[error("parameter outside the chart domain")]
    OutsideChart,
    #[error("region of radius {requested} not covered by the atlas (covers {covered})")]
    AtlasIncomplete { requested: f64, covered: f64 },
    #[error("invalid variety definition: {0}")]
    Invalid(String),
}

/// Strictly positive integer weights `β = (β₁, …, βₙ)` with `n >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(beta: Vec<u32>) -> Result<Self, VarietyError> {
        if beta.len() < 2 || beta.iter().any(|&b| b < 1) {
            return Err(VarietyError::InvalidWeights(beta.iter().map(|&b| b as i64).collect()));
        }
        Ok(Self(beta))
    }

    /// The all-ones vector of length `n`.
    pub fn unit(n: usize) -> Self {
        Self(vec![1; n.max(2)])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&b| b == 1)
    }

    pub fn min(&self) -> u32 {
        self.0.iter().copied().min().unwrap_or(1)
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }
}

impl TryFrom<Vec<i64>> for WeightVector {
    type Error = VarietyError;

    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        if v.iter().any(|&b| b < 1 || b > u32::MAX as i64) {
            return Err(VarietyError::InvalidWeights(v));
        }
        Self::new(v.into_iter().map(|b| b as u32).collect())
    }
}

impl From<WeightVector> for Vec<i64> {
    fn from(w: WeightVector) -> Self {
        w.0.into_iter().map(i64::from).collect()
    }
}

/// The weighted scaling action `s^β * z`.
pub fn scale_action(s: C64, z: &[C64], beta: &WeightVector) -> Vec<C64> {
    z.iter().zip(beta.as_slice()).map(|(zk, &b)| s.powu(b) * zk).collect()
}

/// One monomial `c · z^a` of a sparse polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coeff: C64,
}

/// A sparse polynomial in `n` complex variables.
///
/// Construction does not check homogeneity; use
/// [`check_weighted_homogeneous`] or build a [`WeightedVariety`].
#[derive(Clone, Debug, PartialEq)]
pub struct WPolynomial {
    n: usize,
    terms: Vec<Term>,
}

impl WPolynomial {
    /// Builds a polynomial, merging repeated exponents and dropping zero terms.
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self, VarietyError> {
        let mut merged: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for t in terms {
            if t.exps.len() != n {
                return Err(VarietyError::DimensionMismatch {
                    expected: n,
                    got: t.exps.len(),
                });
            }
            *merged.entry(t.exps).or_insert(C64::new(0.0, 0.0)) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != C64::new(0.0, 0.0))
            .map(|(exps, coeff)| Term { exps, coeff })
            .collect();
        Ok(Self { n, terms })
    }

    /// Convenience constructor from `(exponents, real coefficient)` pairs.
    pub fn from_real(n: usize, terms: &[(&[u32], f64)]) -> Result<Self, VarietyError> {
        Self::new(
            n,
            terms
                .iter()
                .map(|(e, c)| Term {
                    exps: e.to_vec(),
                    coeff: C64::new(*c, 0.0),
                })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|t| t.exps.iter().zip(z).fold(t.coeff, |acc, (&a, zk)| acc * zk.powu(a)))
            .sum()
    }

    /// Holomorphic gradient `(∂Q/∂z₁, …, ∂Q/∂zₙ)`.
    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        let mut g = vec![C64::new(0.0, 0.0); self.n];
        for t in &self.terms {
            for (k, gk) in g.iter_mut().enumerate() {
                let ak = t.exps[k];
                if ak == 0 {
                    continue;
                }
                let mut v = t.coeff * ak as f64;
                for (i, (&a, zi)) in t.exps.iter().zip(z).enumerate() {
                    let e = if i == k { a - 1 } else { a };
                    v *= zi.powu(e);
                }
                *gk += v;
            }
        }
        g
    }

    /// Weighted degree of every term.
    pub fn term_degrees(&self, beta: &WeightVector) -> Vec<u32> {
        self.terms
            .iter()
            .map(|t| t.exps.iter().zip(beta.as_slice()).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Substitutes `z_coord = value` and returns a polynomial in the
    /// remaining `n - 1` variables (order preserved).
    pub fn substitute(&self, coord: usize, value: C64) -> WPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut exps = t.exps.clone();
                let a = exps.remove(coord);
                Term {
                    exps,
                    coeff: t.coeff * value.powu(a),
                }
            })
            .collect();
        WPolynomial::new(self.n - 1, terms).expect("dimensions are consistent")
    }

    /// `Q ∘ Φ` for the power map `Φ(x) = (x₁^{β₁}, …)`.
    pub fn compose_power_map(&self, beta: &WeightVector) -> WPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                exps: t.exps.iter().zip(beta.as_slice()).map(|(a, b)| a * b).collect(),
                coeff: t.coeff,
            })
            .collect();
        WPolynomial::new(self.n, terms).expect("dimensions are consistent")
    }
}

/// Returns the weighted degree of `q`, checking both the exponent condition
/// `Σ a_k β_k = d` for every term and the identity `Q(s^β * z) = s^d Q(z)` at
/// random points (relative tolerance `1e-10`).
pub fn check_weighted_homogeneous(q: &WPolynomial, beta: &WeightVector) -> Result<u32, VarietyError> {
    if q.n() != beta.len() {
        return Err(VarietyError::DimensionMismatch {
            expected: beta.len(),
            got: q.n(),
        });
    }
    if q.is_zero() {
        return Err(VarietyError::ZeroPolynomial);
    }
    let degrees = q.term_degrees(beta);
    let d = degrees[0];
    if let Some(&other) = degrees.iter().find(|&&e| e != d) {
        return Err(VarietyError::MixedDegree {
            first: d,
            second: other,
        });
    }
    if d == 0 {
        return Err(VarietyError::DegreeZero);
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    for _ in 0..8 {
        let s = C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let z: Vec<C64> = (0..q.n())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let lhs = q.eval(&scale_action(s, &z, beta));
        let rhs = s.powu(d) * q.eval(&z);
        let scale: f64 = q
            .terms()
            .iter()
            .map(|t| {
                t.coeff.norm()
                    * t.exps
                        .iter()
                        .zip(&scale_action(s, &z, beta))
                        .map(|(&a, zk)| zk.norm().powi(a as i32))
                        .product::<f64>()
            })
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let dev = (lhs - rhs).norm() / scale;
        if dev > 1e-10 {
            return Err(VarietyError::HomogeneityViolated(dev));
        }
    }
    Ok(d)
}

/// A weighted homogeneous subvariety of `ℂⁿ`.
#[derive(Clone, Debug)]
pub struct WeightedVariety {
    name: String,
    weights: WeightVector,
    generators: Vec<WPolynomial>,
    degrees: Vec<u32>,
    dim: Option<usize>,
}

impl WeightedVariety {
    pub fn new(weights: WeightVector, generators: Vec<WPolynomial>, dim: Option<usize>) -> Result<Self, VarietyError> {
        let n = weights.len();
        let degrees = generators
            .iter()
            .map(|g| check_weighted_homogeneous(g, &weights))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(d) = dim {
            if d == 0 || d > n || (generators.is_empty() && d != n) {
                return Err(VarietyError::InvalidDimension { dim: d, n });
            }
        }
        Ok(Self {
            name: String::new(),
            weights,
            generators,
            degrees,
            dim,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn generators(&self) -> &[WPolynomial] {
        &self.generators
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn ambient_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn dim_hint(&self) -> Option<usize> {
        self.dim
    }

    pub fn is_cone(&self) -> bool {
        self.weights.is_unit()
    }

    /// Jacobian of the generators, one row per generator.
    pub fn jacobian(&self, z: &[C64]) -> CMatrix {
        let n = self.ambient_dim();
        let mut m = CMatrix::zeros(self.generators.len(), n);
        for (i, g) in self.generators.iter().enumerate() {
            for (k, v) in g.gradient(z).into_iter().enumerate() {
                m[(i, k)] = v;
            }
        }
        m
    }

    /// Numeric zero-locus test `|Q_k(z)| <= tol·(1 + ‖z‖^{d_k / min β})`.
    pub fn membership(&self, z: &[C64], tol: f64) -> bool {
        if z.len() != self.ambient_dim() {
            return false;
        }
        let nz = linalg::norm(z);
        let bmin = self.weights.min() as f64;
        self.generators
            .iter()
            .zip(&self.degrees)
            .all(|(g, &d)| g.eval(z).norm() <= tol * (1.0 + nz.powf(d as f64 / bmin)))
    }

    /// Complex dimension of the variety near `z`, from the declared hint or,
    /// failing that, from a full-row-rank Jacobian.
    pub fn local_dimension(&self, z: &[C64]) -> Result<usize, VarietyError> {
        if let Some(d) = self.dim {
            return Ok(d);
        }
        let rank = linalg::numerical_rank(&self.jacobian(z), RANK_THRESHOLD);
        if rank == self.generators.len() {
            Ok(self.ambient_dim() - rank)
        } else {
            Err(VarietyError::DimensionUnknown)
        }
    }

    /// Regularity test: the generator Jacobian has rank `n - d` at `z`.
    pub fn is_regular_point(&self, z: &[C64]) -> Result<bool, VarietyError> {
        let n = self.ambient_dim();
        if z.len() != n {
            return Err(VarietyError::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        let rank = linalg::numerical_rank(&self.jacobian(z), RANK_THRESHOLD);
        match self.dim {
            Some(d) => Ok(rank == n - d),
            None if rank == self.generators.len() => Ok(true),
            None => Err(VarietyError::DimensionUnknown),
        }
    }

    /// Slice variety through `xi`, fixing the coordinate of largest modulus.
    pub fn slice_variety(&self, xi: &[C64]) -> Result<SliceVariety, VarietyError> {
        let n = self.ambient_dim();
        if xi.len() != n {
            return Err(VarietyError::DimensionMismatch {
                expected: n,
                got: xi.len(),
            });
        }
        let (coord, value) = xi.iter().enumerate().fold((0, C64::new(0.0, 0.0)), |best, (k, v)| {
            if v.norm() > best.1.norm() {
                (k, *v)
            } else {
                best
            }
        });
        if value.norm() == 0.0 {
            return Err(VarietyError::ZeroCoordinate);
        }
        Ok(SliceVariety {
            coord,
            value,
            weights: self.weights.clone(),
            degrees: self.degrees.clone(),
            full: self.generators.clone(),
            generators: self.generators.iter().map(|g| g.substitute(coord, value)).collect(),
        })
    }

    /// The cone `X = Φ⁻¹(Σ)` cut out by `Q_k ∘ Φ`.
    pub fn phi_lift(&self) -> WeightedVariety {
        let n = self.ambient_dim();
        let generators = self
            .generators
            .iter()
            .map(|g| g.compose_power_map(&self.weights))
            .collect();
        let mut lifted = WeightedVariety::new(WeightVector::unit(n), generators, self.dim)
            .expect("composition with the power map is homogeneous");
        lifted.name = format!("{}-lift", self.name);
        lifted
    }

    /// Projects `z` onto the variety with Gauss–Newton steps.
    pub fn project(&self, z: &[C64]) -> Option<Vec<C64>> {
        let mut z = z.to_vec();
        for _ in 0..100 {
            let r: Vec<C64> = self.generators.iter().map(|g| g.eval(&z)).collect();
            let rn = linalg::norm(&r);
            if rn < 1e-14 * (1.0 + linalg::norm(&z)) {
                return Some(z);
            }
            let j = self.jacobian(&z);
            let svd = j.clone().svd(true, true);
            let rhs = nalgebra::DVector::from_column_slice(&r);
            let step = svd.solve(&rhs, 1e-12).ok()?;
            for (zk, dk) in z.iter_mut().zip(step.iter()) {
                *zk -= dk;
            }
        }
        None
    }
}

/// The slice `Y = {ŷ : Q_k(ξ_c, ŷ) = 0}` through a point, together with the
/// map `η(s, ŷ) = (s/ξ_c)^β * (ξ_c, ŷ)`.
#[derive(Clone, Debug)]
pub struct SliceVariety {
    coord: usize,
    value: C64,
    weights: WeightVector,
    degrees: Vec<u32>,
    full: Vec<WPolynomial>,
    generators: Vec<WPolynomial>,
}

impl SliceVariety {
    /// Index of the fixed coordinate.
    pub fn coord(&self) -> usize {
        self.coord
    }

    /// Value `ξ_c` of the fixed coordinate.
    pub fn value(&self) -> C64 {
        self.value
    }

    /// Polynomials `Q_k(ξ_c, ·)` on `ℂ^{n-1}`.
    pub fn generators(&self) -> &[WPolynomial] {
        &self.generators
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Inserts `ξ_c` at the fixed coordinate.
    pub fn embed(&self, yhat: &[C64]) -> Vec<C64> {
        let mut y = yhat.to_vec();
        y.insert(self.coord, self.value);
        y
    }

    /// Drops the fixed coordinate.
    pub fn project(&self, z: &[C64]) -> Vec<C64> {
        let mut y = z.to_vec();
        y.remove(self.coord);
        y
    }

    pub fn eval(&self, yhat: &[C64]) -> Vec<C64> {
        self.generators.iter().map(|g| g.eval(yhat)).collect()
    }

    /// `η(s, ŷ) = (s/ξ_c)^β * (ξ_c, ŷ)`, with `s` in the fixed slot.
    pub fn eta(&self, s: C64, yhat: &[C64]) -> Vec<C64> {
        scale_action(s / self.value, &self.embed(yhat), &self.weights)
    }

    /// `max_k |Q_k(η(s,ŷ)) − (s/ξ_c)^{d_k} Q_k(ξ_c, ŷ)|` scaled by `1 + |s|^{d_k}`.
    pub fn eta_identity_deviation(&self, s: C64, yhat: &[C64]) -> f64 {
        let z = self.eta(s, yhat);
        self.full
            .iter()
            .zip(&self.generators)
            .zip(&self.degrees)
            .map(|((q, qs), &d)| {
                let lhs = q.eval(&z);
                let rhs = (s / self.value).powu(d) * qs.eval(yhat);
                (lhs - rhs).norm() / (1.0 + s.norm().powi(d as i32))
            })
            .fold(0.0, f64::max)
    }
}
