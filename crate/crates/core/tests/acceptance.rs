//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion, followed by indented detail lines, and fails if the criterion
//! does not hold.

use std::time::Instant;

use dbar_core::corpus::{self, CorpusEntry, FORM_RADIUS};
use dbar_core::forms::{cutoff, parse_expr, AntiForm, LpExponent, MultiIndex};
use dbar_core::kernel::{QuadratureSpec, EPSILON};
use dbar_core::linalg;
use dbar_core::solver::{delta_fraction, sigma_min, solve_cone, solve_weighted, SolverConfig, SolverMode};
use dbar_core::variety::{cone_chart, Sampler, WPolynomial, WeightVector, WeightedVariety};
use dbar_core::verify::*;
use dbar_core::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SEED: u64 = 20_241;

const RESIDUAL_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-2;
const RESIDUAL_POINTS: usize = 10;
const ORACLE_TOL: f64 = 1e-6;
const ORACLE_POINTS: usize = 50;
const INDICATOR_TOL: f64 = 1e-4;
const COINCIDENCE_TOL: f64 = 1e-10;
const ALEPH_TOL: f64 = 1e-8;
const COMMUTATION_TOL: f64 = 1e-5;
const PHI_TOL: f64 = 1e-6;
const GROWTH_MIN: f64 = 10.0;
const FUBINI_TOL: f64 = 1e-3;
const SOLVER_CONVERGENCE_TOL: f64 = 1e-5;
const RATIO_CONVERGENCE_TOL: f64 = 1e-2;
/// Monte Carlo constants use 100 samples; the tolerance is of the order of
/// their sampling error.
const MC_CONVERGENCE_TOL: f64 = 0.1;

fn report(criterion: u32, title: &str, checks: &[Check], started: Instant) {
    let passed = checks.iter().all(|c| c.passed);
    println!(
        "{} criterion {criterion}: {title} ({} checks, {:.1}s)",
        if passed { "PASS" } else { "FAIL" },
        checks.len(),
        started.elapsed().as_secs_f64()
    );
    for c in checks {
        println!("    {c}");
    }
    assert!(passed, "criterion {criterion} failed");
}

fn radius(z: &[C64]) -> f64 {
    linalg::norm(z)
}

#[test]
fn criterion_1_solution_property() {
    let started = Instant::now();
    let mut checks = Vec::new();
    for entry in corpus::corpus() {
        let points = entry.sample_points(RESIDUAL_POINTS, 0.1, 1.5, SEED);
        assert_eq!(points.len(), RESIDUAL_POINTS);
        let t = Instant::now();
        for form in &entry.forms {
            let table = residual_check(
                &entry.variety,
                &form.form,
                &SolverConfig::default(),
                &points,
                &ResidualOptions {
                    h: FD_STEP,
                    tol: RESIDUAL_TOL,
                    ..Default::default()
                },
            );
            let name = format!("{}/{}", entry.name(), form.name);
            checks.push(
                Check::at_most(format!("residual {name}"), table.max_residual, RESIDUAL_TOL).with_detail(format!(
                    "mean {:.1e}, closedness {:.1e}",
                    table.mean_residual, table.max_closedness_defect
                )),
            );
            checks.push(Check::at_most(
                format!("failed points {name}"),
                table.failures as f64,
                0.0,
            ));
            checks.push(Check::at_most(
                format!("not closed {name}"),
                table.not_closed as u8 as f64,
                0.0,
            ));
        }
        checks.push(Check::at_most(
            format!("runtime {} [s]", entry.name()),
            t.elapsed().as_secs_f64(),
            300.0,
        ));
    }
    report(1, "solution property on the corpus", &checks, started);
}

type OracleFn = Box<dyn Fn(C64) -> C64 + Sync>;

fn oracle_functions() -> Vec<(&'static str, OracleFn)> {
    vec![
        ("bump", Box::new(|t: C64| C64::new(cutoff(0.0, 2.0, t.norm()), 0.0))),
        (
            "shifted-poly",
            Box::new(|t: C64| cutoff(0.2, 2.0, (t - C64::new(0.0, 0.3)).norm()) * (1.0 + t.conj() * t.conj() / 2.0)),
        ),
        (
            "bump-exp",
            Box::new(|t: C64| cutoff(0.0, 2.0, t.norm()) * (t - t.conj() / 3.0).exp()),
        ),
    ]
}

#[test]
fn criterion_2_cauchy_pompeiu() {
    let started = Instant::now();
    let spec = QuadratureSpec::default();
    let mut rng = StdRng::seed_from_u64(SEED);
    let points: Vec<C64> = (0..ORACLE_POINTS)
        .map(|_| C64::from_polar(1.5 * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>()))
        .collect();
    let mut checks = Vec::new();
    for (name, f) in oracle_functions() {
        let table = cauchy_pompeiu_check(f, 2.5, &points, FD_STEP, &spec).unwrap();
        checks.push(Check::at_most(
            format!("dbar(I f) - eps f, {name}"),
            table.max_error,
            ORACLE_TOL,
        ));
    }
    checks.push(Check::at_most("eps", EPSILON, -1.0).with_detail("single global sign"));
    // Points on vertices of the brute-force grid, so that no midpoint node
    // sits next to the pole of the kernel.
    for z in [
        C64::new(0.3, -0.4),
        C64::new(-0.7, 0.2),
        C64::new(0.05, 0.61),
        C64::new(-0.25, -0.85),
    ] {
        let (brute, adaptive) = indicator_brute_force(z, 1000, &spec).unwrap();
        let rel = (brute - adaptive).norm() / adaptive.norm();
        checks.push(Check::at_most(
            format!("indicator vs 10^6-node sum at {z}"),
            rel,
            INDICATOR_TOL,
        ));
        let exact = -z.conj();
        checks.push(Check::at_most(
            format!("indicator vs -conj(z) at {z}"),
            (adaptive - exact).norm(),
            1e-9,
        ));
    }
    report(2, "Cauchy-Pompeiu oracle", &checks, started);
}

fn complex_literal(c: C64) -> String {
    format!("({:.6} + {:.6}*i)", c.re, c.im)
}

fn random_cone_form(rng: &mut StdRng, n: usize) -> AntiForm {
    let c = |rng: &mut StdRng| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let inner = rng.gen_range(0.1..0.5);
    let monomials = ["1", "zb1", "z2", "zb3*z1", "zb2*zb3"];
    let random_expr = |rng: &mut StdRng| -> String {
        let terms: Vec<String> = monomials
            .iter()
            .map(|m| format!("{}*{}", complex_literal(c(rng)), m))
            .collect();
        format!("bump({inner:.3}, 2) * ({})", terms.join(" + "))
    };
    let potential: Vec<(MultiIndex, dbar_core::forms::Expr)> = if rng.gen_bool(0.5) {
        vec![(MultiIndex::empty(), parse_expr(&random_expr(rng), n).unwrap())]
    } else {
        (0..n)
            .map(|k| (MultiIndex::single(k), parse_expr(&random_expr(rng), n).unwrap()))
            .collect()
    };
    AntiForm::dbar_of(n, FORM_RADIUS, &potential).unwrap()
}

#[test]
fn criterion_3_cone_weighted_coincidence() {
    let started = Instant::now();
    let cone = corpus::cone();
    let mut rng = StdRng::seed_from_u64(SEED);
    let points = cone.sample_points(20, 0.1, 1.5, SEED);
    let mut worst = 0.0_f64;
    for (i, z) in points.iter().enumerate() {
        let form = random_cone_form(&mut rng, 3);
        let q = form.degree();
        let d = cone.variety.local_dimension(z).unwrap();
        let sigma = sigma_min(d, LpExponent::Finite(2.0), q).unwrap().sigma;
        let cfg = SolverConfig::default().with_sigma(sigma);
        let a = solve_cone(&form, &cone.variety, z, &cfg.with_mode(SolverMode::Cone))
            .unwrap()
            .value;
        let b = solve_weighted(&form, &cone.variety, z, &cfg).unwrap().value;
        let rel = a.difference(&b).norm() / a.norm().max(b.norm());
        assert!(a.norm() > 0.0, "pair {i} is trivial");
        worst = worst.max(rel);
    }
    let checks = vec![Check::at_most(
        "max relative difference over 20 pairs",
        worst,
        COINCIDENCE_TOL,
    )];
    report(3, "cone and weighted operators coincide on the cone", &checks, started);
}

/// `z₁z₂ = z₃z₄` with weights `(1, 2, 2, 1)`: three-dimensional, so the chart
/// test reaches `q = 3`.
fn quadric_threefold() -> WeightedVariety {
    let g = WPolynomial::from_real(4, &[(&[1, 1, 0, 0], 1.0), (&[0, 0, 1, 1], -1.0)]).unwrap();
    WeightedVariety::new(WeightVector::new(vec![1, 2, 2, 1]).unwrap(), vec![g], Some(3)).unwrap()
}

#[test]
fn criterion_4_sign_cancellation() {
    let started = Instant::now();
    let exhaustive = sign_cancellation_exhaustive(4, 6);
    let mut checks = vec![Check::at_most(
        "sign identity failures, q <= 4, n <= 6",
        exhaustive.failures.len() as f64,
        0.0,
    )
    .with_detail(format!("{} cases", exhaustive.cases))];
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut varieties: Vec<(String, WeightedVariety, Vec<Vec<C64>>)> = corpus::corpus()
        .into_iter()
        .map(|e| {
            let pts = e.sample_points(5, 0.2, 1.5, SEED);
            (e.name().to_string(), e.variety, pts)
        })
        .collect();
    let quadric = quadric_threefold();
    let quadric_points = (0..5)
        .map(|_| {
            let a = C64::new(rng.gen_range(0.3..1.0), rng.gen_range(-1.0..1.0));
            let b = C64::new(rng.gen_range(0.3..1.0), rng.gen_range(-1.0..1.0));
            let c = C64::new(rng.gen_range(0.3..1.0), rng.gen_range(-1.0..1.0));
            vec![a, b * c / a, b, c]
        })
        .collect();
    varieties.push(("quadric".into(), quadric, quadric_points));
    for (name, v, points) in &varieties {
        let mut worst = 0.0_f64;
        let mut max_q = 0;
        for z in points {
            let chart = cone_chart(v, z).unwrap();
            let x: Vec<C64> = chart
                .zeta()
                .iter()
                .map(|c| c + C64::new(0.3, -0.2) * chart.radius())
                .collect();
            let s = C64::new(rng.gen_range(0.3..1.5), rng.gen_range(-1.0..1.0));
            for q in 1..=chart.dim() {
                worst = worst.max(aleph_pullback_deviation(&chart, q, s, &x).unwrap());
                max_q = max_q.max(q);
            }
        }
        checks.push(
            Check::at_most(format!("pulled-back multiplier on {name}"), worst, ALEPH_TOL)
                .with_detail(format!("q <= {max_q}")),
        );
    }
    report(4, "sign cancellation, combinatorial and on charts", &checks, started);
}

#[test]
fn criterion_5_commutation_identities() {
    let started = Instant::now();
    let mut checks = Vec::new();
    let cfg = SolverConfig::default();
    for entry in corpus::corpus() {
        let points = entry.sample_points(4, 0.2, 1.5, SEED);
        for form in &entry.forms {
            let name = format!("{}/{}", entry.name(), form.name);
            let comm = commutation_check(
                &entry.variety,
                &form.form,
                &cfg,
                &points,
                C64::new(0.8, 0.3),
                COMMUTATION_TOL,
            );
            checks.push(Check::at_most(
                format!("commutation {name}"),
                comm.max_deviation,
                COMMUTATION_TOL,
            ));
            assert!(comm.errors.iter().all(Option::is_none), "{:?}", comm.errors);
            let phi = phi_commutation_check(&entry.variety, &form.form, &cfg, &points, PHI_TOL);
            checks.push(Check::at_most(format!("power map {name}"), phi.max_deviation, PHI_TOL));
            assert!(phi.errors.iter().all(Option::is_none), "{:?}", phi.errors);
        }
    }
    report(
        5,
        "commutation with the cone chart and with the power map",
        &checks,
        started,
    );
}

fn q1_basis(entry: &CorpusEntry) -> Vec<AntiForm> {
    entry
        .forms
        .iter()
        .filter(|f| f.degree() == 1)
        .map(|f| f.form.clone())
        .collect()
}

#[test]
fn criterion_6_lp_machinery() {
    let started = Instant::now();
    let mut checks = Vec::new();

    // δ in [0, 1) at σ = sigma_min, exactly.
    let mut bad = 0;
    let mut cases = 0;
    for d in 1..=5 {
        for q in 1..=d {
            for p in [
                LpExponent::Finite(1.0),
                LpExponent::Finite(1.5),
                LpExponent::Finite(2.0),
                LpExponent::Finite(4.0),
                LpExponent::Infinity,
            ] {
                let sigma = sigma_min(d, p, q).unwrap().sigma;
                let (num, den) = delta_fraction(sigma, q, d, p);
                cases += 1;
                if !(den > 0 && 0 <= num && num < den) {
                    bad += 1;
                }
            }
        }
    }
    checks.push(
        Check::at_most("delta outside [0, 1) at sigma_min", bad as f64, 0.0).with_detail(format!("{cases} cases")),
    );

    // Weighted Cauchy operator on a 10-member family and its midpoint refinement.
    let probe = cauchy_ratio_probe(
        &[0.0, 0.5, 0.9],
        2.0,
        1.0,
        10,
        &DiscGrid::default(),
        &QuadratureSpec::default(),
        0,
    )
    .unwrap();
    for (delta, fam) in &probe.by_delta {
        checks.push(
            Check::at_most(
                format!("Cauchy family max ratio change, delta={delta}"),
                fam.relative_change,
                FAMILY_STABILITY,
            )
            .with_detail(format!("max ratio {:.4}, finite {}", fam.max_doubled, fam.finite())),
        );
    }

    // Empirical constants on the homogeneous corpus varieties.
    for entry in [corpus::line(), corpus::cone()] {
        let basis = q1_basis(&entry);
        let probe = lp_bound_probe(
            &entry.variety,
            &entry.atlas,
            &basis,
            LpExponent::Finite(2.0),
            FORM_RADIUS,
            10,
            &Sampler::MonteCarlo {
                samples: 100,
                seed: SEED,
            },
            &SolverConfig::default().with_mode(SolverMode::Cone),
        )
        .unwrap();
        let scale_spread = probe
            .scaled_ratios
            .iter()
            .map(|r| (r - probe.basis_ratios[0]).abs() / probe.basis_ratios[0])
            .fold(0.0, f64::max);
        checks.push(
            Check::at_most(
                format!("C_Sigma change under family doubling, {}", entry.name()),
                probe.family.relative_change,
                FAMILY_STABILITY,
            )
            .with_detail(format!(
                "C = {:.4}, sigma = {}, delta = {}, finite {}",
                probe.family.max_doubled,
                probe.estimator.sigma,
                probe.estimator.delta,
                probe.family.finite()
            )),
        );
        checks.push(Check::at_most(
            format!("ratio of c*omega vs omega, {}", entry.name()),
            scale_spread,
            1e-12,
        ));
    }

    // σ one below its admissible value: growth along shrinking supports.
    let line = corpus::line();
    let family = shrinking_bumps(2, &[0.2, 0.1, 0.05, 0.025, 0.0125]).unwrap();
    let p = LpExponent::Finite(1.0);
    let sigma = sigma_min(1, p, 1).unwrap().sigma;
    let cfg = SolverConfig {
        quad: QuadratureSpec {
            target_rel_err: 1e-4,
            ..Default::default()
        },
        ..Default::default()
    };
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
    let low = shrinking_support_probe(
        &line.variety,
        &line.atlas,
        &family,
        sigma - 1,
        p,
        1.0,
        &output,
        &input,
        &cfg,
    )
    .unwrap();
    let ok = shrinking_support_probe(
        &line.variety,
        &line.atlas,
        &family,
        sigma,
        p,
        1.0,
        &output,
        &input,
        &cfg,
    )
    .unwrap();
    checks.push(
        Check::at_least("ratio growth with sigma = sigma_min - 1, p = 1", low.growth, GROWTH_MIN)
            .with_detail(format!("at sigma_min the ratio changes by {:.3}x", ok.growth)),
    );
    report(6, "Lp machinery", &checks, started);
}

type Integrand = Box<dyn Fn(&[C64]) -> f64 + Sync>;

fn fubini_integrands() -> Vec<(&'static str, f64, Integrand)> {
    vec![
        ("gaussian", 6.0, Box::new(|z: &[C64]| (-radius(z).powi(2)).exp())),
        (
            "bump",
            2.0,
            Box::new(|z: &[C64]| cutoff(0.5, 1.5, radius(z)) * (1.0 + z[0].norm_sqr())),
        ),
        (
            "mixed",
            6.0,
            Box::new(|z: &[C64]| (z[0] + 2.0 * z[z.len() - 1]).norm_sqr() * (-2.0 * radius(z).powi(2)).exp()),
        ),
    ]
}

const FUBINI_SAMPLER: Sampler = Sampler::Product {
    rings: 1,
    order: 8,
    angles: 16,
    tau_min: 1e-6,
};

#[test]
fn criterion_7_fubini_split() {
    let started = Instant::now();
    let mut checks = Vec::new();
    for entry in [corpus::line(), corpus::cone()] {
        let proj = entry.projective.as_ref().expect("cones carry projective charts");
        for (name, r, f) in fubini_integrands() {
            let c = nested_integral_check(
                &entry.atlas,
                proj,
                entry.dim(),
                f,
                r,
                &FUBINI_SAMPLER,
                &NestedRule::default(),
            )
            .unwrap();
            checks.push(
                Check::at_most(format!("{}/{name}", entry.name()), c.relative_error, FUBINI_TOL)
                    .with_detail(format!("direct {:.6}, nested {:.6}", c.direct, c.nested)),
            );
        }
    }
    report(7, "direct and radial-first integration agree", &checks, started);
}

#[test]
fn criterion_8_self_convergence() {
    let started = Instant::now();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let base = SolverConfig::default();
    let fine = SolverConfig {
        quad: base.quad.reference(),
        ..base
    };
    for entry in corpus::corpus() {
        let points = entry.sample_points(2, 0.2, 1.5, SEED + 1);
        for form in &entry.forms {
            let name = format!("{}/{}", entry.name(), form.name);
            rows.extend(
                solver_convergence(&entry.variety, &form.form, &base, &points, SOLVER_CONVERGENCE_TOL).unwrap(),
            );
            let opts = ResidualOptions {
                h: FD_STEP,
                tol: RESIDUAL_TOL,
                ..Default::default()
            };
            let r0 = residual_check(&entry.variety, &form.form, &base, &points[..1], &opts);
            let r1 = residual_check(&entry.variety, &form.form, &fine, &points[..1], &opts);
            rows.push(ConvergenceRow::absolute(
                format!("residual {name}"),
                r0.max_residual,
                r1.max_residual,
                RESIDUAL_TOL,
            ));
            let c0 = commutation_check(
                &entry.variety,
                &form.form,
                &base,
                &points[..1],
                C64::new(0.8, 0.3),
                COMMUTATION_TOL,
            );
            let c1 = commutation_check(
                &entry.variety,
                &form.form,
                &fine,
                &points[..1],
                C64::new(0.8, 0.3),
                COMMUTATION_TOL,
            );
            rows.push(ConvergenceRow::absolute(
                format!("commutation {name}"),
                c0.max_deviation,
                c1.max_deviation,
                COMMUTATION_TOL,
            ));
            let p0 = phi_commutation_check(&entry.variety, &form.form, &base, &points[..1], PHI_TOL);
            let p1 = phi_commutation_check(&entry.variety, &form.form, &fine, &points[..1], PHI_TOL);
            rows.push(ConvergenceRow::absolute(
                format!("power map {name}"),
                p0.max_deviation,
                p1.max_deviation,
                PHI_TOL,
            ));
        }
    }

    let spec = QuadratureSpec::default();
    let points = [C64::new(0.3, -0.4), C64::new(-0.9, 0.5), C64::new(1.2, 0.1)];
    for (name, f) in oracle_functions() {
        let a = cauchy_pompeiu_check(&f, 2.5, &points, FD_STEP, &spec).unwrap();
        let b = cauchy_pompeiu_check(&f, 2.5, &points, FD_STEP, &spec.reference()).unwrap();
        rows.push(ConvergenceRow::absolute(
            format!("oracle {name}"),
            a.max_error,
            b.max_error,
            ORACLE_TOL,
        ));
    }

    let c0 = cauchy_ratio_probe(&[0.0, 0.5, 0.9], 2.0, 1.0, 10, &DiscGrid::default(), &spec, 0).unwrap();
    let c1 = cauchy_ratio_probe(&[0.0, 0.5, 0.9], 2.0, 1.0, 10, &DiscGrid::default().refined(), &spec, 0).unwrap();
    for ((delta, a), (_, b)) in c0.by_delta.iter().zip(&c1.by_delta) {
        rows.push(ConvergenceRow::relative(
            format!("Cauchy family ratio delta={delta}"),
            a.max_doubled,
            b.max_doubled,
            RATIO_CONVERGENCE_TOL,
            0.0,
        ));
    }

    let cone = corpus::cone();
    let probe = |samples| {
        lp_bound_probe(
            &cone.variety,
            &cone.atlas,
            &q1_basis(&cone),
            LpExponent::Finite(2.0),
            FORM_RADIUS,
            10,
            &Sampler::MonteCarlo { samples, seed: SEED },
            &SolverConfig::default().with_mode(SolverMode::Cone),
        )
        .unwrap()
        .family
        .max_doubled
    };
    rows.push(ConvergenceRow::relative(
        "C_Sigma cone",
        probe(100),
        probe(200),
        MC_CONVERGENCE_TOL,
        0.0,
    ));

    for entry in [corpus::line(), corpus::cone()] {
        let proj = entry.projective.as_ref().unwrap();
        let fine_sampler = match FUBINI_SAMPLER {
            s @ Sampler::Product { .. } => s.refined(),
            s => s,
        };
        for (name, r, f) in fubini_integrands() {
            let a = nested_integral_check(
                &entry.atlas,
                proj,
                entry.dim(),
                &f,
                r,
                &FUBINI_SAMPLER,
                &NestedRule::default(),
            )
            .unwrap();
            let b = nested_integral_check(
                &entry.atlas,
                proj,
                entry.dim(),
                &f,
                r,
                &fine_sampler,
                &NestedRule::default().refined(),
            )
            .unwrap();
            rows.push(ConvergenceRow::relative(
                format!("direct integral {}/{name}", entry.name()),
                a.direct,
                b.direct,
                FUBINI_TOL,
                0.0,
            ));
            rows.push(ConvergenceRow::relative(
                format!("nested integral {}/{name}", entry.name()),
                a.nested,
                b.nested,
                FUBINI_TOL,
                0.0,
            ));
        }
    }

    let checks: Vec<Check> = rows.iter().map(ConvergenceRow::to_check).collect();
    report(8, "quadrature self-convergence", &checks, started);
}
