use dbar_core::corpus;
use dbar_core::forms::{parse_expr, sign_perm, AntiForm, LpExponent, MultiIndex};
use dbar_core::solver::{delta, delta_fraction, sigma_min};
use dbar_core::variety::{scale_action, WeightVector};
use dbar_core::C64;
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(re, im)| C64::new(re, im))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn scaling_action_composes(s in complex(2.0), t in complex(2.0), z in prop::collection::vec(complex(1.0), 3)) {
        let beta = WeightVector::new(vec![3, 2, 2]).unwrap();
        let lhs = scale_action(s, &scale_action(t, &z, &beta), &beta);
        let rhs = scale_action(s * t, &z, &beta);
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn generators_are_homogeneous(s in complex(1.5), z in prop::collection::vec(complex(1.0), 3)) {
        let entry = corpus::umbrella();
        let v = &entry.variety;
        for (g, &d) in v.generators().iter().zip(v.degrees()) {
            let scaled = g.eval(&scale_action(s, &z, v.weights()));
            prop_assert!(close(scaled, s.powu(d) * g.eval(&z), 1e-12));
        }
    }

    #[test]
    fn orbits_stay_on_the_variety(t in complex(1.0), s in complex(1.5)) {
        let cusp = corpus::cusp();
        let z = vec![t.powu(3), t.powu(2)];
        let w = scale_action(s, &z, cusp.variety.weights());
        prop_assert!(cusp.variety.membership(&w, 1e-10));
    }

    #[test]
    fn sign_counts_smaller_indices(set in prop::collection::btree_set(0usize..8, 1..6), j in 0usize..8) {
        prop_assume!(!set.contains(&j));
        let k = MultiIndex::new(set.iter().copied().collect()).unwrap();
        let below = set.iter().filter(|&&i| i < j).count();
        let expected = if below % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(sign_perm(j, &k).unwrap(), expected);
    }

    #[test]
    fn sign_swaps_antisymmetrically(set in prop::collection::btree_set(0usize..8, 0..5), j in 0usize..8, k in 0usize..8) {
        prop_assume!(j != k && !set.contains(&j) && !set.contains(&k));
        let base = MultiIndex::new(set.iter().copied().collect()).unwrap();
        let with = |i: usize| {
            let mut e = base.entries().to_vec();
            e.push(i);
            e.sort_unstable();
            MultiIndex::new(e).unwrap()
        };
        // dz̄_j ∧ dz̄_k ∧ dz̄_K = −dz̄_k ∧ dz̄_j ∧ dz̄_K
        let jk = sign_perm(k, &base).unwrap() * sign_perm(j, &with(k)).unwrap();
        let kj = sign_perm(j, &base).unwrap() * sign_perm(k, &with(j)).unwrap();
        prop_assert_eq!(jk, -kj);
    }

    #[test]
    fn keys_round_trip(set in prop::collection::btree_set(0usize..12, 0..6)) {
        let k = MultiIndex::new(set.into_iter().collect()).unwrap();
        prop_assert_eq!(MultiIndex::parse_key(&k.key()).unwrap(), k);
    }

    #[test]
    fn forms_evaluate_linearly(c in complex(2.0), z in prop::collection::vec(complex(1.0), 3)) {
        let a = AntiForm::from_exprs(3, 1, 2.0, &[("1", "bump(0.5, 2) * z2"), ("3", "zb1 * bump(0.5, 2)")]).unwrap();
        let b = AntiForm::from_exprs(3, 1, 2.0, &[("2", "exp(z3) * bump(0.5, 2)"), ("3", "abs2(z1) * bump(0.5, 2)")]).unwrap();
        let combined = a.scaled(c).sum(&b).unwrap();
        let mut expected = b.eval(&z);
        expected.add_scaled(&a.eval(&z), c);
        prop_assert!(combined.eval(&z).difference(&expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    }

    #[test]
    fn printed_expressions_parse_back(z in prop::collection::vec(complex(1.0), 2)) {
        for src in ["bump(0.3, 1.5) * (z1 + 2*i*zb2)^2", "exp(-abs2(z1)) * conj(z2) / (2 + re(z1))", "bump(0.2, 1, z1 - 0.5)"] {
            let e = parse_expr(src, 2).unwrap();
            let again = parse_expr(&e.to_string(), 2).unwrap();
            prop_assert!(close(e.eval(&z), again.eval(&z), 1e-12));
        }
    }

    #[test]
    fn sigma_min_puts_delta_in_unit_interval(d in 1usize..5, q in 1usize..5, num in 1i64..40, den in 1i64..12) {
        prop_assume!(q <= d && num >= den);
        let p = LpExponent::Finite(num as f64 / den as f64);
        let s = sigma_min(d, p, q).unwrap();
        let (a, b) = delta_fraction(s.sigma, q, d, p);
        prop_assert!(b > 0);
        if s.floored {
            prop_assert!(a < 0);
        } else {
            prop_assert!(a >= 0 && a < b);
            let (a1, b1) = delta_fraction(s.sigma - 1, q, d, p);
            prop_assert!(a1 < 0 && b1 > 0);
        }
        prop_assert!((delta(s.sigma, q, d, p) - a as f64 / b as f64).abs() < 1e-12);
    }
}
