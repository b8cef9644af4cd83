use dbar_core::corpus;
use dbar_core::forms::{AntiForm, MultiIndex};
use dbar_core::kernel::{QuadratureSpec, EPSILON};
use dbar_core::solver::{solve, solve_cone, solve_weighted, SolverConfig, SolverError};
use dbar_core::verify::{residual_check, ResidualOptions};
use dbar_core::C64;
use proptest::prelude::*;

fn fast() -> SolverConfig {
    SolverConfig {
        quad: QuadratureSpec {
            target_rel_err: 1e-5,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn origin_gives_zero() {
    let cone = corpus::cone();
    let omega = &cone.form("bump").unwrap().form;
    let s = solve(omega, &cone.variety, &[C64::new(0.0, 0.0); 3], &fast()).unwrap();
    assert_eq!(s.value.norm(), 0.0);
}

#[test]
fn points_outside_the_support_give_zero() {
    let line = corpus::line();
    let omega = &line.form("bump").unwrap().form;
    let r = omega.support_radius();
    let s = solve(
        omega,
        &line.variety,
        &[C64::new(1.5 * r, 0.0), C64::new(0.0, 0.0)],
        &fast(),
    )
    .unwrap();
    assert!(s.value.norm() < 1e-12);
}

#[test]
fn zero_form_has_zero_residual() {
    let cone = corpus::cone();
    let omega = AntiForm::zero(3, 1);
    let points = cone.sample_points(2, 0.3, 1.2, 17);
    let table = residual_check(&cone.variety, &omega, &fast(), &points, &ResidualOptions::default());
    assert!(table.passed(), "{table:?}");
    assert_eq!(table.max_residual, 0.0);
}

#[test]
fn non_closed_input_is_flagged() {
    let cone = corpus::cone();
    let omega = AntiForm::from_exprs(3, 1, 2.0, &[("2", "bump(0.2, 2) * zb1")]).unwrap();
    let points = cone.sample_points(2, 0.5, 1.0, 3);
    let table = residual_check(&cone.variety, &omega, &fast(), &points, &ResidualOptions::default());
    assert!(table.not_closed);
    assert!(table.max_closedness_defect > 1e-2);
    assert!(!table.passed());
}

#[test]
fn corpus_forms_are_closed() {
    let cone = corpus::cone();
    let points = cone.sample_points(2, 0.3, 1.5, 5);
    for form in cone.forms.iter().filter(|f| f.degree() == 1) {
        let table = residual_check(&cone.variety, &form.form, &fast(), &points, &ResidualOptions::default());
        assert!(!table.not_closed, "{}: {}", form.name, table.max_closedness_defect);
    }
}

#[test]
fn cone_mode_rejects_weighted_varieties() {
    let cusp = corpus::cusp();
    let omega = &cusp.form("bump").unwrap().form;
    let z = cusp.sample_points(1, 0.5, 1.0, 1).remove(0);
    assert!(matches!(
        solve_cone(omega, &cusp.variety, &z, &fast()),
        Err(SolverError::NotACone)
    ));
}

#[test]
fn invalid_inputs_are_rejected() {
    let line = corpus::line();
    let omega = &line.form("bump").unwrap().form;
    let short = [C64::new(0.5, 0.0)];
    assert!(matches!(
        solve(omega, &line.variety, &short, &fast()),
        Err(SolverError::DimensionMismatch { expected: 2, got: 1 })
    ));
    let z = [C64::new(0.5, 0.0), C64::new(0.0, 0.0)];
    assert!(matches!(
        solve(omega, &line.variety, &z, &fast().with_sigma(-2)),
        Err(SolverError::SigmaOutOfRange { sigma: -2, q: 1 })
    ));
}

#[test]
fn degree_one_solution_is_the_potential() {
    let umbrella = corpus::umbrella();
    let form = umbrella.form("bump").unwrap();
    for z in umbrella.sample_points(2, 0.3, 1.2, 8) {
        let s = solve_weighted(&form.form, &umbrella.variety, &z, &fast()).unwrap();
        let g = form.potential_at(&z).get(&MultiIndex::empty());
        assert!((s.value.get(&MultiIndex::empty()) - EPSILON * g).norm() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solution_is_linear(re in -2.0..2.0f64, im in -2.0..2.0f64, seed in 0u64..1000) {
        let c = C64::new(re, im);
        let cusp = corpus::cusp();
        let a = &cusp.form("bump").unwrap().form;
        let b = &cusp.form("bump-poly").unwrap().form;
        let z = cusp.sample_points(1, 0.3, 1.2, seed).remove(0);
        let cfg = fast();
        let sa = solve(a, &cusp.variety, &z, &cfg).unwrap().value;
        let sb = solve(b, &cusp.variety, &z, &cfg).unwrap().value;
        let combined = solve(&a.scaled(c).sum(b).unwrap(), &cusp.variety, &z, &cfg).unwrap().value;
        let mut expected = sb.clone();
        expected.add_scaled(&sa, c);
        let scale = 1.0 + c.norm() * sa.norm() + sb.norm();
        prop_assert!(combined.difference(&expected).norm() <= 1e-6 * scale);
    }

    #[test]
    fn cone_and_weighted_operators_agree(seed in 0u64..1000) {
        let cone = corpus::cone();
        let omega = &cone.form("bump").unwrap().form;
        let z = cone.sample_points(1, 0.3, 1.2, seed).remove(0);
        let cfg = fast().with_sigma(1);
        let a = solve_weighted(omega, &cone.variety, &z, &cfg).unwrap().value;
        let b = solve_cone(omega, &cone.variety, &z, &cfg).unwrap().value;
        prop_assert!(a.difference(&b).norm() <= 1e-10 * (1.0 + a.norm()));
    }
}
