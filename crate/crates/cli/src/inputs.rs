//! Resolution of `--variety`, `--form` and point arguments.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use dbar_core::corpus::{self, CorpusEntry};
use dbar_core::forms::{parse_form, AntiForm, LpExponent};
use dbar_core::kernel::QuadratureSpec;
use dbar_core::linalg;
use dbar_core::solver::{SolverConfig, SolverMode};
use dbar_core::variety::io::parse_variety;
use dbar_core::variety::{cone_chart, scale_action, VarietyError, WeightVector, WeightedVariety};
use dbar_core::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::args::{Mode, PointArgs, QuadArgs, SolverArgs};
use crate::error::CliError;

/// Radii of randomly sampled points.
pub const R_MIN: f64 = 0.1;
pub const R_MAX: f64 = 1.5;

/// A variety together with its corpus entry, if it came from the corpus.
pub struct Target {
    pub variety: WeightedVariety,
    pub entry: Option<CorpusEntry>,
}

impl Target {
    pub fn name(&self) -> String {
        match self.variety.name() {
            "" => "variety".to_string(),
            s => s.to_string(),
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::MissingFile {
        path: path.to_path_buf(),
        source,
    })
}

/// A corpus name or the path of a variety JSON file.
pub fn resolve_variety(arg: &str) -> Result<Target, CliError> {
    if let Some(entry) = corpus::by_name(arg) {
        return Ok(Target {
            variety: entry.variety.clone(),
            entry: Some(entry),
        });
    }
    let path = PathBuf::from(arg);
    let variety = parse_variety(&read_file(&path)?)?;
    let variety = if variety.name().is_empty() {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("variety")
            .to_string();
        variety.with_name(stem)
    } else {
        variety
    };
    Ok(Target { variety, entry: None })
}

/// Corpus targets, or the single named one.
pub fn resolve_targets(arg: Option<&str>) -> Result<Vec<Target>, CliError> {
    match arg {
        Some(a) => Ok(vec![resolve_variety(a)?]),
        None => Ok(corpus::corpus()
            .into_iter()
            .map(|e| Target {
                variety: e.variety.clone(),
                entry: Some(e),
            })
            .collect()),
    }
}

/// The named form, or every corpus form of the target with degree `q`.
pub fn resolve_forms(target: &Target, form: Option<&str>, q: Option<usize>) -> Result<Vec<AntiForm>, CliError> {
    let n = target.variety.ambient_dim();
    let forms = match (form, &target.entry) {
        (Some(name), Some(entry)) if entry.form(name).is_some() => vec![entry.form(name).unwrap().form.clone()],
        (Some(path), _) => {
            let path = PathBuf::from(path);
            let form = parse_form(&read_file(&path)?, n)?;
            let form = if form.name().is_empty() {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("form").to_string();
                form.with_name(stem)
            } else {
                form
            };
            vec![form]
        }
        (None, Some(entry)) => entry.forms.iter().map(|f| f.form.clone()).collect(),
        (None, None) => return Err(CliError::Config("--form is required for a variety file".into())),
    };
    let forms: Vec<AntiForm> = forms
        .into_iter()
        .filter(|f| q.map_or(true, |q| f.degree() == q))
        .collect();
    if forms.is_empty() {
        return Err(CliError::Config(format!(
            "no form of degree {} on {}",
            q.unwrap_or(0),
            target.name()
        )));
    }
    Ok(forms)
}

pub fn parse_p(s: &str) -> Result<LpExponent, CliError> {
    let p = match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        other => other
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("invalid --p `{s}`")))?,
    };
    LpExponent::new(p).map_err(|e| CliError::Config(e.to_string()))
}

pub fn quadrature(args: &QuadArgs) -> Result<QuadratureSpec, CliError> {
    let mut spec = QuadratureSpec::default();
    if let Some(r) = args.rings {
        spec.rings_per_decade = r;
    }
    if let Some(a) = args.angles {
        spec.angular_nodes = a;
    }
    if let Some(t) = args.tol {
        spec.target_rel_err = t;
    }
    if let Some(m) = args.max_depth {
        spec.max_depth = m;
    }
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

pub fn solver_config(args: &SolverArgs) -> Result<SolverConfig, CliError> {
    Ok(SolverConfig {
        sigma: args.sigma,
        mode: match args.mode {
            Mode::Weighted => SolverMode::Weighted,
            Mode::Cone => SolverMode::Cone,
        },
        p: parse_p(&args.p)?,
        quad: quadrature(&args.quad)?,
        ..SolverConfig::default()
    })
}

/// An evaluation point and the complex number used as its plot coordinate.
#[derive(Clone, Debug)]
pub struct Point {
    pub z: Vec<C64>,
    /// Scaling parameter for grid points, `z₁` otherwise.
    pub label: C64,
}

impl Point {
    fn plain(z: Vec<C64>) -> Self {
        let label = z[0];
        Self { z, label }
    }
}

pub fn points(target: &Target, args: &PointArgs, default_count: usize) -> Result<Vec<Point>, CliError> {
    if let Some(n) = args.grid {
        if n == 0 {
            return Err(CliError::Config("--grid must be positive".into()));
        }
        return grid_points(target, n, args.seed);
    }
    match &args.points {
        None => random_points(target, default_count, args.seed),
        Some(s) => match s.parse::<usize>() {
            Ok(0) => Err(CliError::Config("--points must be positive".into())),
            Ok(count) => random_points(target, count, args.seed),
            Err(_) => file_points(target, Path::new(s)),
        },
    }
}

fn file_points(target: &Target, path: &Path) -> Result<Vec<Point>, CliError> {
    let raw: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let n = target.variety.ambient_dim();
    raw.into_iter()
        .map(|p| {
            if p.len() != n {
                return Err(VarietyError::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                }
                .into());
            }
            let z: Vec<C64> = p.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            if !target.variety.membership(&z, 1e-8) {
                return Err(VarietyError::NotOnVariety.into());
            }
            Ok(Point::plain(z))
        })
        .collect()
}

fn random_points(target: &Target, count: usize, seed: u64) -> Result<Vec<Point>, CliError> {
    let pts = match &target.entry {
        Some(entry) => entry.sample_points(count, R_MIN, R_MAX, seed),
        None => chart_samples(&target.variety, count, R_MIN, R_MAX, seed)?,
    };
    if pts.len() < count {
        return Err(CliError::Other(format!(
            "found only {} of {count} regular points",
            pts.len()
        )));
    }
    Ok(pts.into_iter().map(Point::plain).collect())
}

/// `N²` points `s^β * ξ` with `|s| = (j+1)/N` and `arg s = 2πk/N` for a
/// regular point `ξ` of norm 1.
fn grid_points(target: &Target, n: usize, seed: u64) -> Result<Vec<Point>, CliError> {
    let xi = base_point(&target.variety, seed)?;
    let beta = target.variety.weights();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let s = C64::from_polar((j + 1) as f64 / n as f64, TAU * k as f64 / n as f64);
            out.push(Point {
                z: scale_action(s, &xi, beta),
                label: s,
            });
        }
    }
    Ok(out)
}

/// Real `t > 0` with `‖t^β * y‖ = target`.
fn scale_to_norm(y: &[C64], beta: &WeightVector, target: f64) -> f64 {
    let norm_at = |t: f64| linalg::norm(&scale_action(C64::new(t, 0.0), y, beta));
    let (mut lo, mut hi) = (-30.0_f64, 30.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// A regular point of norm 1 with a valid chart, found by projecting seeded
/// random vectors onto the variety.
pub fn base_point(v: &WeightedVariety, seed: u64) -> Result<Vec<C64>, CliError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = v.ambient_dim();
    for _ in 0..500 {
        let z: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let Some(y) = v.project(&z) else { continue };
        if linalg::norm(&y) < 1e-3 || !v.is_regular_point(&y).unwrap_or(false) {
            continue;
        }
        let t = scale_to_norm(&y, v.weights(), 1.0);
        let xi = scale_action(C64::new(t, 0.0), &y, v.weights());
        if cone_chart(v, &xi).is_ok() {
            return Ok(xi);
        }
    }
    Err(VarietyError::NotRegular.into())
}

/// Points `Π(s, x)` of one chart with `x` uniform in half the chart polydisc
/// and `|s|` chosen so that `‖z‖` is uniform in `[r_min, r_max]`.
pub fn chart_samples(
    v: &WeightedVariety,
    count: usize,
    r_min: f64,
    r_max: f64,
    seed: u64,
) -> Result<Vec<Vec<C64>>, CliError> {
    let xi = base_point(v, seed)?;
    let chart = cone_chart(v, &xi)?;
    let mut rng = StdRng::seed_from_u64(seed.wrapping_add(1));
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count.max(1) {
        attempts += 1;
        let mut w = vec![C64::new(1.0, 0.0)];
        w.extend(
            chart
                .zeta()
                .iter()
                .map(|c| c + C64::from_polar(0.5 * chart.radius() * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>())),
        );
        let Ok(y) = chart.map(&w) else { continue };
        let r = rng.gen_range(r_min..=r_max);
        let s = C64::from_polar(scale_to_norm(&y, v.weights(), r), TAU * rng.gen::<f64>());
        let z = scale_action(s, &y, v.weights());
        if v.is_regular_point(&z).unwrap_or(false) {
            out.push(z);
        }
    }
    Ok(out)
}
