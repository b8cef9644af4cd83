use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::C64;

use super::expr::{parse_expr, Expr, Var};
use super::grid::GridField;
use super::multi_index::MultiIndex;
use super::program::Program;
use super::FormError;

pub type CustomFn = Arc<dyn Fn(&[C64]) -> C64 + Send + Sync>;

/// A parsed expression together with its compiled program.
#[derive(Clone, Debug)]
pub struct CoeffExpr {
    expr: Expr,
    program: Arc<Program>,
}

impl CoeffExpr {
    pub fn parse(src: &str, n: usize) -> Result<Self, FormError> {
        Ok(Self::from_expr(parse_expr(src, n)?))
    }

    pub fn from_expr(expr: Expr) -> Self {
        let program = Arc::new(Program::compile(&[&expr]));
        Self { expr, program }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut out = [C64::new(0.0, 0.0)];
        self.program.eval(z, &mut out);
        out[0]
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// One coefficient function `f_J`.
#[derive(Clone)]
pub enum Coefficient {
    Expr(CoeffExpr),
    Grid(Arc<GridField>),
    Custom(CustomFn),
}

impl Coefficient {
    pub fn eval(&self, z: &[C64]) -> C64 {
        match self {
            Coefficient::Expr(e) => e.eval(z),
            Coefficient::Grid(g) => g.eval(z),
            Coefficient::Custom(f) => f(z),
        }
    }

    pub fn custom<F: Fn(&[C64]) -> C64 + Send + Sync + 'static>(f: F) -> Self {
        Coefficient::Custom(Arc::new(f))
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Expr(e) => write!(f, "Expr({e})"),
            Coefficient::Grid(g) => write!(f, "Grid(dim {})", g.dim()),
            Coefficient::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Coefficients of a `(0,q)`-covector at one point, keyed by multi-index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub dim: usize,
    pub degree: usize,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl Covector {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn get(&self, k: &MultiIndex) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Adds `v` to the coefficient of `k`.
    pub fn add(&mut self, k: MultiIndex, v: C64) {
        debug_assert_eq!(k.len(), self.degree);
        *self.coeffs.entry(k).or_default() += v;
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, other: &Covector, c: C64) {
        for (k, v) in &other.coeffs {
            self.add(k.clone(), v * c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.coeffs.iter()
    }

    /// Coefficients for every multi-index of the degree, in ascending order.
    pub fn dense(&self) -> Vec<(MultiIndex, C64)> {
        MultiIndex::all(self.dim, self.degree)
            .into_iter()
            .map(|k| {
                let v = self.get(&k);
                (k, v)
            })
            .collect()
    }

    pub fn scaled(&self, c: C64) -> Covector {
        Covector {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn difference(&self, other: &Covector) -> Covector {
        let mut out = self.clone();
        out.add_scaled(other, C64::new(-1.0, 0.0));
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A `(0,q)`-form `Σ_J f_J dz̄_J` on an open set of `ℂⁿ` with coefficients
/// vanishing outside the ball of radius `support_radius`.
#[derive(Clone)]
pub struct AntiForm {
    name: String,
    dim: usize,
    degree: usize,
    support_radius: f64,
    keys: Vec<MultiIndex>,
    coeffs: Vec<Coefficient>,
    fused: Option<Arc<Program>>,
}

impl fmt::Debug for AntiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AntiForm")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("support_radius", &self.support_radius)
            .field("terms", &self.keys.iter().zip(&self.coeffs).collect::<Vec<_>>())
            .finish()
    }
}

impl AntiForm {
    pub fn new(
        dim: usize,
        degree: usize,
        support_radius: f64,
        terms: Vec<(MultiIndex, Coefficient)>,
    ) -> Result<Self, FormError> {
        if !(support_radius > 0.0) {
            return Err(FormError::Invalid(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            if k.len() != degree {
                return Err(FormError::DegreeMismatch {
                    expected: degree,
                    got: k.len(),
                });
            }
            if k.max_entry().is_some_and(|m| m >= dim) {
                return Err(FormError::InvalidKey(k.key()));
            }
            if let Coefficient::Expr(e) = &c {
                if e.expr().arity() > dim {
                    return Err(FormError::Invalid(format!(
                        "coefficient uses more than {dim} variables"
                    )));
                }
                if e.expr().is_zero() {
                    continue;
                }
            }
            if map.insert(k.clone(), c).is_some() {
                return Err(FormError::InvalidKey(format!("repeated key {}", k.key())));
            }
        }
        let (keys, coeffs): (Vec<_>, Vec<_>) = map.into_iter().unzip();
        let exprs: Option<Vec<&Expr>> = coeffs
            .iter()
            .map(|c| match c {
                Coefficient::Expr(e) => Some(e.expr()),
                _ => None,
            })
            .collect();
        let fused = exprs.map(|e| Arc::new(Program::compile(&e)));
        Ok(Self {
            name: String::new(),
            dim,
            degree,
            support_radius,
            keys,
            coeffs,
            fused,
        })
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        Self::new(dim, degree, 1.0, Vec::new()).expect("empty form is valid")
    }

    /// Form with expression coefficients given as `(one-based key, source)`.
    pub fn from_exprs(
        dim: usize,
        degree: usize,
        support_radius: f64,
        terms: &[(&str, &str)],
    ) -> Result<Self, FormError> {
        let terms = terms
            .iter()
            .map(|(k, src)| {
                Ok((
                    MultiIndex::parse_key(k)?,
                    Coefficient::Expr(CoeffExpr::parse(src, dim)?),
                ))
            })
            .collect::<Result<Vec<_>, FormError>>()?;
        Self::new(dim, degree, support_radius, terms)
    }

    /// `∂̄(Σ_K g_K dz̄_K)` computed symbolically.
    pub fn dbar_of(dim: usize, support_radius: f64, potential: &[(MultiIndex, Expr)]) -> Result<Self, FormError> {
        let degree = match potential.first() {
            Some((k, _)) => k.len() + 1,
            None => return Err(FormError::Invalid("empty potential".into())),
        };
        let mut acc: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
        for (k, g) in potential {
            if k.len() + 1 != degree {
                return Err(FormError::DegreeMismatch {
                    expected: degree - 1,
                    got: k.len(),
                });
            }
            for j in 0..dim {
                if k.contains(j) {
                    continue;
                }
                let d = g.diff(Var::Zb(j))?;
                if d.is_zero() {
                    continue;
                }
                let (sign, key) = k.wedge_front(j)?;
                let term = Expr::mul(Expr::constant(sign), d);
                let entry = acc.remove(&key).unwrap_or(Expr::constant(0.0));
                acc.insert(key, Expr::add(entry, term));
            }
        }
        let terms = acc
            .into_iter()
            .map(|(k, e)| (k, Coefficient::Expr(CoeffExpr::from_expr(e))))
            .collect();
        Self::new(dim, degree, support_radius, terms)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn keys(&self) -> &[MultiIndex] {
        &self.keys
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &Coefficient)> {
        self.keys.iter().zip(&self.coeffs)
    }

    pub fn coefficient(&self, k: &MultiIndex) -> Option<&Coefficient> {
        self.keys.iter().position(|x| x == k).map(|i| &self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.keys.is_empty()
    }

    /// Coefficient values at `z` in the order of [`AntiForm::keys`].
    pub fn eval_into(&self, z: &[C64], out: &mut [C64]) {
        match &self.fused {
            Some(p) => p.eval(z, out),
            None => {
                for (o, c) in out.iter_mut().zip(&self.coeffs) {
                    *o = c.eval(z);
                }
            }
        }
    }

    pub fn eval(&self, z: &[C64]) -> Covector {
        let mut vals = vec![C64::new(0.0, 0.0); self.keys.len()];
        self.eval_into(z, &mut vals);
        let mut out = Covector::zero(self.dim, self.degree);
        for (k, v) in self.keys.iter().zip(vals) {
            out.add(k.clone(), v);
        }
        out
    }

    /// `c·ω`.
    pub fn scaled(&self, c: C64) -> AntiForm {
        let terms = self
            .coefficients()
            .map(|(k, coef)| {
                let scaled = match coef {
                    Coefficient::Expr(e) => {
                        Coefficient::Expr(CoeffExpr::from_expr(Expr::mul(Expr::Const(c), e.expr().clone())))
                    }
                    other => {
                        let other = other.clone();
                        Coefficient::custom(move |z| other.eval(z) * c)
                    }
                };
                (k.clone(), scaled)
            })
            .collect();
        let mut out =
            AntiForm::new(self.dim, self.degree, self.support_radius, terms).expect("scaling preserves validity");
        out.name = self.name.clone();
        out
    }

    /// `ω + η`.
    pub fn sum(&self, other: &AntiForm) -> Result<AntiForm, FormError> {
        if other.dim != self.dim || other.degree != self.degree {
            return Err(FormError::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let mut terms: BTreeMap<MultiIndex, Coefficient> =
            self.coefficients().map(|(k, c)| (k.clone(), c.clone())).collect();
        for (k, c) in other.coefficients() {
            let merged = match (terms.remove(k), c) {
                (None, c) => c.clone(),
                (Some(Coefficient::Expr(a)), Coefficient::Expr(b)) => {
                    Coefficient::Expr(CoeffExpr::from_expr(Expr::add(a.expr().clone(), b.expr().clone())))
                }
                (Some(a), b) => {
                    let b = b.clone();
                    Coefficient::custom(move |z| a.eval(z) + b.eval(z))
                }
            };
            terms.insert(k.clone(), merged);
        }
        AntiForm::new(
            self.dim,
            self.degree,
            self.support_radius.max(other.support_radius),
            terms.into_iter().collect(),
        )
    }

    /// Replaces (or inserts) one coefficient.
    pub fn with_term(&self, k: MultiIndex, c: Coefficient) -> Result<AntiForm, FormError> {
        let mut terms: Vec<(MultiIndex, Coefficient)> = self
            .coefficients()
            .filter(|(key, _)| **key != k)
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        terms.push((k, c));
        let mut out = AntiForm::new(self.dim, self.degree, self.support_radius, terms)?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// Samples points with `R < ‖z‖ ≤ 2R` and reports the largest coefficient
    /// modulus found there (zero for a correctly declared support).
    pub fn support_violation(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let z: Vec<C64> = (0..self.dim)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let nz = crate::linalg::norm(&z);
            if nz == 0.0 {
                continue;
            }
            let r = self.support_radius * (1.0 + rng.gen::<f64>() + 1e-9);
            let z: Vec<C64> = z.iter().map(|v| v * (r / nz)).collect();
            worst = worst.max(self.eval(&z).max_abs());
        }
        worst
    }
}

/// JSON form definition. Either `coeffs` (the coefficients of `ω`) or
/// `potential` (coefficients `g_K` with `ω = ∂̄(Σ g_K dz̄_K)`) is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub q: usize,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<BTreeMap<String, String>>,
}

impl FormFile {
    pub fn build(&self, n: usize) -> Result<AntiForm, FormError> {
        let form = match (&self.coeffs, &self.potential) {
            (Some(c), None) => {
                let terms: Vec<(&str, &str)> = c.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                AntiForm::from_exprs(n, self.q, self.r, &terms)?
            }
            (None, Some(p)) => {
                let pot = p
                    .iter()
                    .map(|(k, v)| Ok((MultiIndex::parse_key(k)?, parse_expr(v, n)?)))
                    .collect::<Result<Vec<_>, FormError>>()?;
                let form = AntiForm::dbar_of(n, self.r, &pot)?;
                if form.degree() != self.q {
                    return Err(FormError::DegreeMismatch {
                        expected: self.q,
                        got: form.degree(),
                    });
                }
                form
            }
            _ => {
                return Err(FormError::Invalid(
                    "exactly one of `coeffs` and `potential` must be given".into(),
                ))
            }
        };
        Ok(form.with_name(self.name.clone().unwrap_or_default()))
    }

    /// File describing a form whose coefficients are all expressions.
    pub fn from_form(form: &AntiForm) -> Option<FormFile> {
        let coeffs = form
            .coefficients()
            .map(|(k, c)| match c {
                Coefficient::Expr(e) => Some((k.key(), e.to_string())),
                _ => None,
            })
            .collect::<Option<BTreeMap<_, _>>>()?;
        Some(FormFile {
            name: (!form.name().is_empty()).then(|| form.name().to_string()),
            q: form.degree(),
            r: form.support_radius(),
            coeffs: Some(coeffs),
            potential: None,
        })
    }
}

pub fn parse_form(json: &str, n: usize) -> Result<AntiForm, FormError> {
    let file: FormFile = serde_json::from_str(json).map_err(|e| FormError::Invalid(e.to_string()))?;
    file.build(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dbar_of_potential() {
        let g = parse_expr("bump(0.5, 1) * z1 * zb2", 2).unwrap();
        let w = AntiForm::dbar_of(2, 1.0, &[(MultiIndex::empty(), g)]).unwrap();
        assert_eq!(w.degree(), 1);
        let z = [c(0.3, 0.1), c(0.2, -0.3)];
        // inside the plateau the bump is 1, so ∂̄g = z1 dz̄2
        let v = w.eval(&z);
        assert!(v.get(&MultiIndex::single(0)).norm() < 1e-15);
        assert!((v.get(&MultiIndex::single(1)) - z[0]).norm() < 1e-15);
        assert_eq!(w.support_violation(50, 1), 0.0);
    }

    #[test]
    fn dbar_of_one_form_has_signs() {
        // ∂̄(g dz̄2) = ∂g/∂z̄1 dz̄1∧dz̄2 for g = zb1
        let g = parse_expr("zb1", 2).unwrap();
        let w = AntiForm::dbar_of(2, 1.0, &[(MultiIndex::single(1), g)]).unwrap();
        let v = w.eval(&[c(0.1, 0.0), c(0.2, 0.0)]);
        assert_eq!(v.get(&MultiIndex::new(vec![0, 1]).unwrap()), c(1.0, 0.0));
        // ∂̄(g dz̄1) = −∂g/∂z̄2 dz̄1∧dz̄2 for g = zb2
        let g = parse_expr("zb2", 2).unwrap();
        let w = AntiForm::dbar_of(2, 1.0, &[(MultiIndex::single(0), g)]).unwrap();
        let v = w.eval(&[c(0.1, 0.0), c(0.2, 0.0)]);
        assert_eq!(v.get(&MultiIndex::new(vec![0, 1]).unwrap()), c(-1.0, 0.0));
    }

    #[test]
    fn json_forms() {
        let w = parse_form(r#"{"q": 1, "R": 1.0, "coeffs": {"1": "bump(0.5,1)*zb2", "2": "0"}}"#, 2).unwrap();
        assert_eq!(w.keys().len(), 1);
        let back = FormFile::from_form(&w).unwrap().build(2).unwrap();
        let z = [c(0.6, 0.1), c(0.2, 0.4)];
        assert_eq!(back.eval(&z), w.eval(&z));
        let p = parse_form(r#"{"q": 1, "R": 1.0, "potential": {"": "bump(0.5,1)*z1*zb1"}}"#, 2).unwrap();
        assert_eq!(p.degree(), 1);
        assert!(parse_form(r#"{"q": 2, "R": 1.0, "coeffs": {"1": "z1"}}"#, 2).is_err());
        assert!(parse_form(r#"{"q": 1, "R": 1.0}"#, 2).is_err());
    }

    #[test]
    fn linear_operations() {
        let w = AntiForm::from_exprs(2, 1, 1.0, &[("1", "bump(0.5,1)*zb2")]).unwrap();
        let z = [c(0.2, 0.1), c(-0.1, 0.3)];
        let a = w.scaled(c(2.0, 1.0)).eval(&z);
        assert_eq!(a, w.eval(&z).scaled(c(2.0, 1.0)));
        let s = w.sum(&w).unwrap().eval(&z);
        assert!(s.difference(&w.eval(&z).scaled(c(2.0, 0.0))).max_abs() < 1e-15);
    }
}
