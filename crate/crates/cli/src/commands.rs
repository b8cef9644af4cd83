use std::time::Instant;

use dbar_core::corpus::{self, FORM_RADIUS};
use dbar_core::forms::{AntiForm, MultiIndex};
use dbar_core::kernel::{audit_orientation, EPSILON};
use dbar_core::solver::{sigma_min, solve, PointSolution};
use dbar_core::variety::{cone_chart, Sampler};
use dbar_core::verify::*;
use dbar_core::C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{IdentityArgs, LpProbeArgs, OutputArgs, ProbeKind, SolveArgs, VerifyArgs};
use crate::error::CliError;
use crate::inputs::{self, Point, Target};
use crate::output::{Cell, Sink, Table};

/// Result of a completed run: `passed` is false iff some check failed.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub lines: Vec<String>,
}

impl Outcome {
    fn from_checks(checks: &[Check], sink: &Sink) -> Self {
        let mut lines: Vec<String> = checks.iter().map(ToString::to_string).collect();
        lines.extend(sink.written.iter().map(|p| format!("wrote {}", p.display())));
        Self {
            passed: checks.iter().all(|c| c.passed),
            lines,
        }
    }
}

fn coordinate_headers(n: usize) -> Vec<String> {
    (1..=n).flat_map(|k| [format!("z{k}_re"), format!("z{k}_im")]).collect()
}

fn coordinate_cells(z: &[C64]) -> Vec<Cell> {
    z.iter().flat_map(|c| [Cell::Num(c.re), Cell::Num(c.im)]).collect()
}

fn coefficient_name(k: &MultiIndex) -> String {
    match k.key().as_str() {
        "" => "lambda".to_string(),
        key => format!("lambda_{key}"),
    }
}

fn elapsed(sink: &Sink, started: Instant) -> Option<f64> {
    sink.timing.then(|| started.elapsed().as_secs_f64())
}

#[derive(Serialize)]
struct ProbeReport<T: Serialize> {
    seed: u64,
    probe: T,
    checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

pub fn solve_cmd(args: &SolveArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let target = inputs::resolve_variety(&args.variety)?;
    let form = inputs::resolve_forms(&target, Some(&args.form), None)?.remove(0);
    let cfg = inputs::solver_config(&args.solver)?;
    let points = inputs::points(&target, &args.points, 10)?;
    let mut sink = Sink::new(&args.output)?;
    let v = &target.variety;
    let n = v.ambient_dim();
    let q = form.degree();

    let solutions: Vec<PointSolution> = points
        .par_iter()
        .map(|p| solve(&form, v, &p.z, &cfg))
        .collect::<Result<_, _>>()?;
    let residuals = (!args.no_residual).then(|| {
        let z: Vec<Vec<C64>> = points.iter().map(|p| p.z.clone()).collect();
        residual_check(v, &form, &cfg, &z, &ResidualOptions::default())
    });

    let keys = MultiIndex::all(n, q - 1);
    let mut headers = vec!["point".to_string()];
    headers.extend(coordinate_headers(n));
    for k in &keys {
        let name = coefficient_name(k);
        headers.push(format!("{name}_re"));
        headers.push(format!("{name}_im"));
    }
    headers.extend(["sigma", "level", "residual", "closedness_defect"].map(String::from));
    let mut table = Table::new(headers);
    let mut plot = Vec::with_capacity(points.len());
    let mut report = SolveReport::new(&target.name(), form.name(), cfg, args.points.seed);
    for (i, (p, s)) in points.iter().zip(&solutions).enumerate() {
        report.quadrature.record(s.evaluations, s.level);
        let mut row = vec![Cell::from(i)];
        row.extend(coordinate_cells(&p.z));
        for k in &keys {
            let c = s.value.get(k);
            row.push(c.re.into());
            row.push(c.im.into());
        }
        let res = residuals.as_ref().map(|t| &t.rows[i]);
        row.push(Cell::Int(s.sigma as i64));
        row.push(s.level.into());
        row.push(res.and_then(|r| r.residual).into());
        row.push(res.and_then(|r| r.closedness_defect).into());
        table.push(row);
        plot.push((p.label.re, p.label.im, s.value.norm()));
    }
    report.residuals = residuals;
    report.wall_time_s = elapsed(&sink, started);
    sink.table("solution", &table)?;
    sink.plot("plot", &plot)?;
    sink.report("report", &report)?;

    let mut checks = Vec::new();
    if let Some(t) = &report.residuals {
        checks.push(
            Check::at_most(
                format!("residual {}/{}", target.name(), form.name()),
                t.max_residual,
                t.tol,
            )
            .with_detail(format!("{} points", t.rows.len())),
        );
        checks.push(Check::at_most("failed points", t.failures as f64, 0.0));
    }
    let mut out = Outcome::from_checks(&checks, &sink);
    out.lines.insert(
        0,
        format!("solved {} points of {}/{}", points.len(), target.name(), form.name()),
    );
    Ok(out)
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let cfg = inputs::solver_config(&args.solver)?;
    let opts = ResidualOptions {
        h: args.fd_step,
        tol: args.residual_tol,
        ..Default::default()
    };
    let mut sink = Sink::new(&args.output)?;
    let mut report = VerifyReport::new(args.points.seed);

    let eps = audit_orientation(&cfg.quad)?;
    report.push(Check::at_most("orientation", (eps - EPSILON).abs(), 1e-6).with_detail(format!("measured {eps:.8}")));

    let mut headers = vec!["variety".to_string(), "form".into(), "point".into()];
    headers.extend(["residual", "form_norm", "closedness_defect", "level", "error"].map(String::from));
    let mut table = Table::new(headers);
    for target in inputs::resolve_targets(args.variety.as_deref())? {
        let forms = inputs::resolve_forms(&target, args.form.as_deref(), args.q)?;
        let points: Vec<Vec<C64>> = inputs::points(&target, &args.points, 10)?
            .into_iter()
            .map(|p| p.z)
            .collect();
        for form in &forms {
            let name = format!("{}/{}", target.name(), form.name());
            let t = residual_check(&target.variety, form, &cfg, &points, &opts);
            for (i, r) in t.rows.iter().enumerate() {
                table.push(vec![
                    target.name().into(),
                    form.name().into(),
                    i.into(),
                    r.residual.into(),
                    r.form_norm.into(),
                    r.closedness_defect.into(),
                    r.level.into(),
                    r.error.clone().unwrap_or_default().into(),
                ]);
            }
            report.push(
                Check::at_most(format!("residual {name}"), t.max_residual, t.tol)
                    .with_detail(format!("mean {:.1e}", t.mean_residual)),
            );
            report.push(Check::at_most(
                format!("closedness {name}"),
                t.max_closedness_defect,
                opts.closed_tol,
            ));
            report.push(Check::at_most(format!("failed points {name}"), t.failures as f64, 0.0));
        }
    }
    report.wall_time_s = elapsed(&sink, started);
    sink.table("residuals", &table)?;
    sink.report("verify", &report)?;
    Ok(Outcome::from_checks(&report.checks, &sink))
}

fn family_table(ratios: &[f64]) -> Table {
    let mut t = Table::new(["member", "ratio"]);
    for (i, r) in ratios.iter().enumerate() {
        t.push(vec![i.into(), (*r).into()]);
    }
    t
}

fn family_checks(name: &str, fam: &FamilyRatios) -> Vec<Check> {
    vec![
        Check::at_most(
            format!("{name} change under family doubling"),
            fam.relative_change,
            FAMILY_STABILITY,
        )
        .with_detail(format!("max ratio {:.6}", fam.max_doubled)),
        Check::at_most(
            format!("{name} non-finite ratios"),
            fam.ratios.iter().filter(|r| !r.is_finite()).count() as f64,
            0.0,
        ),
    ]
}

pub fn lp_probe_cmd(args: &LpProbeArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let cfg = inputs::solver_config(&args.solver)?;
    let p = inputs::parse_p(&args.solver.p)?;
    let mut sink = Sink::new(&args.output)?;
    if args.family < 2 {
        return Err(CliError::Config("--family needs at least 2 members".into()));
    }
    let checks = match args.kind {
        ProbeKind::Cauchy => {
            let probe = cauchy_ratio_probe(
                &args.delta,
                p.value(),
                1.0,
                args.family,
                &DiscGrid::default(),
                &cfg.quad,
                0,
            )?;
            let mut checks = Vec::new();
            let mut table = Table::new(["delta", "member", "ratio"]);
            for (delta, fam) in &probe.by_delta {
                checks.extend(family_checks(&format!("Cauchy delta={delta}"), fam));
                for (i, r) in fam.ratios.iter().enumerate() {
                    table.push(vec![(*delta).into(), i.into(), (*r).into()]);
                }
            }
            sink.table("ratios", &table)?;
            sink.report(
                "lp_probe",
                &ProbeReport {
                    seed: args.seed,
                    probe,
                    checks: checks.clone(),
                    wall_time_s: elapsed(&sink, started),
                },
            )?;
            checks
        }
        ProbeKind::Constant => {
            let entry = corpus_entry(&args.variety)?;
            let basis: Vec<AntiForm> = entry
                .forms
                .iter()
                .filter(|f| f.degree() == args.q)
                .map(|f| f.form.clone())
                .collect();
            if basis.is_empty() {
                return Err(CliError::Config(format!(
                    "no corpus form of degree {} on {}",
                    args.q,
                    entry.name()
                )));
            }
            let sampler = Sampler::MonteCarlo {
                samples: args.samples,
                seed: args.seed,
            };
            let probe = lp_bound_probe(
                &entry.variety,
                &entry.atlas,
                &basis,
                p,
                FORM_RADIUS,
                args.family,
                &sampler,
                &cfg,
            )?;
            let checks = family_checks(&format!("C_Sigma {}", entry.name()), &probe.family);
            sink.table("ratios", &family_table(&probe.family.ratios))?;
            sink.report(
                "lp_probe",
                &ProbeReport {
                    seed: args.seed,
                    probe,
                    checks: checks.clone(),
                    wall_time_s: elapsed(&sink, started),
                },
            )?;
            checks
        }
        ProbeKind::Shrink => {
            let entry = corpus_entry(&args.variety)?;
            let d = entry.dim();
            let floor = sigma_min(d, p, 1)?.sigma;
            let sigma = args.solver.sigma.unwrap_or(floor - 1);
            let radii = [0.2, 0.1, 0.05, 0.025, 0.0125];
            let family = shrinking_bumps(entry.variety.ambient_dim(), &radii)?;
            let output = Sampler::Product {
                rings: 1,
                order: 6,
                angles: 12,
                tau_min: 1e-2,
            };
            let input = Sampler::Product {
                rings: 2,
                order: 8,
                angles: 24,
                tau_min: 1e-6,
            };
            let probe = shrinking_support_probe(
                &entry.variety,
                &entry.atlas,
                &family,
                sigma,
                p,
                1.0,
                &output,
                &input,
                &cfg,
            )?;
            let check = if sigma < floor {
                Check::at_least(format!("growth at sigma={sigma} below {floor}"), probe.growth, 10.0)
            } else {
                Check::at_most(format!("growth at admissible sigma={sigma}"), probe.growth, 10.0)
            };
            let mut table = Table::new(["support_radius", "ratio"]);
            for (r, ratio) in &probe.ratios {
                table.push(vec![(*r).into(), (*ratio).into()]);
            }
            let checks = vec![check];
            sink.table("ratios", &table)?;
            sink.report(
                "lp_probe",
                &ProbeReport {
                    seed: args.seed,
                    probe,
                    checks: checks.clone(),
                    wall_time_s: elapsed(&sink, started),
                },
            )?;
            checks
        }
    };
    Ok(Outcome::from_checks(&checks, &sink))
}

fn corpus_entry(name: &str) -> Result<corpus::CorpusEntry, CliError> {
    corpus::by_name(name).ok_or_else(|| {
        CliError::Config(format!(
            "Lp probes need a corpus variety with a parametrization, got `{name}`"
        ))
    })
}

pub fn identity_cmd(args: &IdentityArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let cfg = inputs::solver_config(&args.solver)?;
    let mut sink = Sink::new(&args.output)?;
    let mut report = VerifyReport::new(args.points.seed);

    let signs = sign_cancellation_exhaustive(args.q, args.n);
    report.push(
        Check::at_most(
            format!("sign cancellation q<={} n<={}", args.q, args.n),
            signs.failures.len() as f64,
            0.0,
        )
        .with_detail(format!("{} cases", signs.cases)),
    );

    let mut table = Table::new(["variety", "form", "identity", "point", "deviation", "error"]);
    let s = C64::new(0.8, 0.3);
    for target in inputs::resolve_targets(args.variety.as_deref())? {
        let forms = inputs::resolve_forms(&target, args.form.as_deref(), None)?;
        let points: Vec<Point> = inputs::points(&target, &args.points, 3)?;
        let z: Vec<Vec<C64>> = points.iter().map(|p| p.z.clone()).collect();
        report.push(aleph_check(&target, &z));
        for form in &forms {
            let name = format!("{}/{}", target.name(), form.name());
            let tables = [
                (
                    "commutation",
                    commutation_check(&target.variety, form, &cfg, &z, s, args.commutation_tol),
                ),
                (
                    "power map",
                    phi_commutation_check(&target.variety, form, &cfg, &z, args.phi_tol),
                ),
            ];
            for (label, t) in tables {
                for (i, (d, e)) in t.deviations.iter().zip(&t.errors).enumerate() {
                    table.push(vec![
                        target.name().into(),
                        form.name().into(),
                        label.into(),
                        i.into(),
                        (*d).into(),
                        e.clone().unwrap_or_default().into(),
                    ]);
                }
                let failed = t.errors.iter().filter(|e| e.is_some()).count();
                report.push(if failed > 0 {
                    Check::error(format!("{label} {name}"), t.tol, format!("{failed} points failed"))
                } else {
                    Check::at_most(format!("{label} {name}"), t.max_deviation, t.tol)
                });
            }
        }
    }
    report.wall_time_s = elapsed(&sink, started);
    sink.table("deviations", &table)?;
    sink.report("identities", &report)?;
    Ok(Outcome::from_checks(&report.checks, &sink))
}

/// Pulled-back multiplier against its chart form at every point and degree.
fn aleph_check(target: &Target, points: &[Vec<C64>]) -> Check {
    let name = format!("pulled-back multiplier {}", target.name());
    let mut worst = 0.0_f64;
    for z in points {
        let chart = match cone_chart(&target.variety, z) {
            Ok(c) => c,
            Err(e) => return Check::error(name, 1e-8, e.to_string()),
        };
        let x: Vec<C64> = chart
            .zeta()
            .iter()
            .map(|c| c + C64::new(0.3, -0.2) * chart.radius())
            .collect();
        for q in 1..=chart.dim() {
            match aleph_pullback_deviation(&chart, q, C64::new(0.7, 0.4), &x) {
                Ok(d) => worst = worst.max(d),
                Err(e) => return Check::error(name, 1e-8, e.to_string()),
            }
        }
    }
    Check::at_most(name, worst, 1e-8)
}

pub fn corpus_list_cmd(args: &OutputArgs) -> Result<Outcome, CliError> {
    let mut sink = Sink::new(args)?;
    let mut table = Table::new(["variety", "n", "dim", "beta", "degrees", "form", "q", "support_radius"]);
    let mut lines = Vec::new();
    for e in corpus::corpus() {
        let beta = format!("{:?}", e.variety.weights().as_slice());
        let degrees = format!("{:?}", e.variety.degrees());
        for f in &e.forms {
            lines.push(format!(
                "{:<9} beta={beta:<10} {:<10} q={}",
                e.name(),
                f.name,
                f.degree()
            ));
            table.push(vec![
                e.name().into(),
                e.variety.ambient_dim().into(),
                e.dim().into(),
                beta.clone().into(),
                degrees.clone().into(),
                f.name.as_str().into(),
                f.degree().into(),
                f.form.support_radius().into(),
            ]);
        }
    }
    sink.table("corpus", &table)?;
    lines.extend(sink.written.iter().map(|p| format!("wrote {}", p.display())));
    Ok(Outcome { passed: true, lines })
}
