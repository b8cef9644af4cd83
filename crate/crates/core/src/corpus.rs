//! Built-in test varieties with parametrizations and closed test forms.
//!
//! | name       | equation          | β         | d |
//! |------------|-------------------|-----------|---|
//! | `line`     | `z₂ = 0`          | `(1,1)`   | 1 |
//! | `cusp`     | `z₁² = z₂³`       | `(3,2)`   | 1 |
//! | `cone`     | `z₁z₂ = z₃²`      | `(1,1,1)` | 2 |
//! | `umbrella` | `z₁² = z₂²z₃`     | `(3,2,2)` | 2 |
//!
//! Every test form is `ω = ∂̄g` for a compactly supported `g` given
//! symbolically, with support in the ball of radius 2.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::forms::{parse_expr, AntiForm, Expr, MultiIndex};
use crate::linalg;
use crate::variety::{
    Atlas, Parametrization, ProjectiveAtlas, ProjectiveChart, WPolynomial, WeightVector, WeightedVariety,
};
use crate::C64;

/// Support radius of every corpus form.
pub const FORM_RADIUS: f64 = 2.0;

/// A closed test form together with its potential.
#[derive(Clone, Debug)]
pub struct TestForm {
    pub name: String,
    pub form: AntiForm,
    /// `(K, g_K)` with `ω = ∂̄ Σ_K g_K dz̄_K`.
    pub potential: Vec<(MultiIndex, Expr)>,
}

impl TestForm {
    fn new(name: &str, n: usize, potential: &[(&str, &str)]) -> Self {
        let potential: Vec<(MultiIndex, Expr)> = potential
            .iter()
            .map(|(k, src)| {
                (
                    MultiIndex::parse_key(k).expect("corpus key"),
                    parse_expr(src, n).expect("corpus expression"),
                )
            })
            .collect();
        let form = AntiForm::dbar_of(n, FORM_RADIUS, &potential)
            .expect("corpus potential")
            .with_name(name);
        Self {
            name: name.to_string(),
            form,
            potential,
        }
    }

    pub fn degree(&self) -> usize {
        self.form.degree()
    }

    /// `Σ_K g_K(z) dz̄_K` at `z`.
    pub fn potential_at(&self, z: &[C64]) -> crate::forms::Covector {
        let mut out = crate::forms::Covector::zero(z.len(), self.degree() - 1);
        for (k, g) in &self.potential {
            out.add(k.clone(), g.eval(z));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub variety: WeightedVariety,
    pub atlas: Atlas,
    /// Charts of the projectivization, for cones only.
    pub projective: Option<ProjectiveAtlas>,
    pub forms: Vec<TestForm>,
}

impl CorpusEntry {
    pub fn name(&self) -> &str {
        self.variety.name()
    }

    pub fn dim(&self) -> usize {
        self.variety.dim_hint().expect("corpus dimensions are declared")
    }

    pub fn form(&self, name: &str) -> Option<&TestForm> {
        self.forms.iter().find(|f| f.name == name)
    }

    /// Random regular points with `‖z‖ ∈ [r_min, r_max]`, drawn by sampling
    /// parameters of the first parametrization.
    pub fn sample_points(&self, count: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Vec<C64>> {
        let par = &self.atlas.parametrizations[0];
        let radii = (par.radii_for)(r_max);
        let mut rng = StdRng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 1000 * count.max(1) {
            attempts += 1;
            let w: Vec<C64> = radii
                .iter()
                .map(|&r| C64::from_polar(r * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>()))
                .collect();
            let z = par.eval(&w);
            let nz = linalg::norm(&z);
            if nz < r_min || nz > r_max {
                continue;
            }
            if self.variety.is_regular_point(&z).unwrap_or(false) {
                out.push(z);
            }
        }
        out
    }
}

fn poly(n: usize, terms: &[(&[u32], f64)]) -> WPolynomial {
    WPolynomial::from_real(n, terms).expect("corpus polynomial")
}

fn variety(name: &str, beta: Vec<u32>, gens: Vec<WPolynomial>, dim: usize) -> WeightedVariety {
    WeightedVariety::new(WeightVector::new(beta).expect("corpus weights"), gens, Some(dim))
        .expect("corpus variety")
        .with_name(name)
}

fn par(
    name: &str,
    dim: usize,
    mult: f64,
    map: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    radii: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
) -> Parametrization {
    Parametrization {
        name: name.to_string(),
        dim,
        map: Arc::new(map),
        radii_for: Arc::new(radii),
        multiplicity: mult,
    }
}

pub fn line() -> CorpusEntry {
    let n = 2;
    let v = variety("line", vec![1, 1], vec![poly(n, &[(&[0, 1], 1.0)])], 1);
    let atlas = Atlas::new(vec![par("s", 1, 1.0, |w| vec![w[0], C64::new(0.0, 0.0)], |r| vec![r])]);
    let projective = ProjectiveAtlas {
        charts: vec![ProjectiveChart {
            name: "point".into(),
            dim: 0,
            map: Arc::new(|_| vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            radius: 1.0,
        }],
    };
    let forms = vec![
        TestForm::new("bump", n, &[("", "bump(0.2, 2)")]),
        TestForm::new(
            "bump-poly",
            n,
            &[("", "bump(0.1, 2) * (1 + z1*zb1 + 2*zb2 - 0.5*i*z1)")],
        ),
        TestForm::new("bump-exp", n, &[("", "bump(0.3, 2) * exp(z1 - zb1/2)")]),
    ];
    CorpusEntry {
        variety: v,
        atlas,
        projective: Some(projective),
        forms,
    }
}

pub fn cusp() -> CorpusEntry {
    let n = 2;
    let v = variety("cusp", vec![3, 2], vec![poly(n, &[(&[2, 0], 1.0), (&[0, 3], -1.0)])], 1);
    let atlas = Atlas::new(vec![par(
        "s",
        1,
        1.0,
        |w| vec![w[0].powu(3), w[0].powu(2)],
        |r| vec![r.sqrt().min(r.cbrt())],
    )]);
    let forms = vec![
        TestForm::new("bump", n, &[("", "bump(0.2, 2)")]),
        TestForm::new("bump-poly", n, &[("", "bump(0.1, 2) * (zb2 + 3*z1 - i*z2*zb2)")]),
        TestForm::new("bump-exp", n, &[("", "bump(0.3, 2) * exp((zb1 + z2) / 2)")]),
    ];
    CorpusEntry {
        variety: v,
        atlas,
        projective: None,
        forms,
    }
}

pub fn cone() -> CorpusEntry {
    let n = 3;
    let v = variety(
        "cone",
        vec![1, 1, 1],
        vec![poly(n, &[(&[1, 1, 0], 1.0), (&[0, 0, 2], -1.0)])],
        2,
    );
    let atlas = Atlas::new(vec![par(
        "ab",
        2,
        2.0,
        |w| vec![w[0] * w[0], w[1] * w[1], w[0] * w[1]],
        |r| vec![r.sqrt(), r.sqrt()],
    )]);
    let one = C64::new(1.0, 0.0);
    let projective = ProjectiveAtlas {
        charts: vec![
            ProjectiveChart {
                name: "x".into(),
                dim: 1,
                map: Arc::new(move |x| vec![one, x[0] * x[0], x[0]]),
                radius: 1.0,
            },
            ProjectiveChart {
                name: "y".into(),
                dim: 1,
                map: Arc::new(move |y| vec![y[0] * y[0], one, y[0]]),
                radius: 1.0,
            },
        ],
    };
    let forms = vec![
        TestForm::new("bump", n, &[("", "bump(0.2, 2)")]),
        TestForm::new("bump-poly", n, &[("", "bump(0.1, 2) * (zb3 + z1*zb2 - 2*i*z3)")]),
        TestForm::new("q2", n, &[("1", "bump(0.2, 2) * zb2"), ("3", "bump(0.3, 2) * z1")]),
    ];
    CorpusEntry {
        variety: v,
        atlas,
        projective: Some(projective),
        forms,
    }
}

pub fn umbrella() -> CorpusEntry {
    let n = 3;
    let v = variety(
        "umbrella",
        vec![3, 2, 2],
        vec![poly(n, &[(&[2, 0, 0], 1.0), (&[0, 2, 1], -1.0)])],
        2,
    );
    let atlas = Atlas::new(vec![par(
        "av",
        2,
        1.0,
        |w| vec![w[0] * w[1], w[0], w[1] * w[1]],
        |r| vec![r, r.sqrt()],
    )]);
    let forms = vec![
        TestForm::new("bump", n, &[("", "bump(0.2, 2)")]),
        TestForm::new("bump-poly", n, &[("", "bump(0.1, 2) * (zb1 + z2*zb3 + i)")]),
        TestForm::new("q2", n, &[("2", "bump(0.2, 2) * (1 + zb1)")]),
    ];
    CorpusEntry {
        variety: v,
        atlas,
        projective: None,
        forms,
    }
}

/// All shipped varieties in a fixed order.
pub fn corpus() -> Vec<CorpusEntry> {
    vec![line(), cusp(), cone(), umbrella()]
}

pub fn by_name(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.name() == name)
}
