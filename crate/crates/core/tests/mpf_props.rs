mod common;

use mmlab::mpf::{builtins, check_triangle_triplets, classify_sequence, defect_table, make_mulholland, ClassifyConfig, Phi};
use mmlab::MPFDescriptor;
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-9;
const PAIRS: usize = 10_000;

fn random_args(arity: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..arity)
        .map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..10.0) })
        .collect()
}

fn validated_gallery() -> Vec<(&'static str, MPFDescriptor)> {
    builtins::gallery()
        .into_iter()
        .inspect(|(name, f)| {
            let v = check_triangle_triplets(f, 20_000, 10.0, 3);
            assert!(v.no_violation_found, "{name} failed the triplet check");
        })
        .collect()
}

#[test]
fn difference_bounded_by_value_at_difference() {
    for (name, f) in validated_gallery() {
        let mut rng = common::rng(11);
        for _ in 0..PAIRS {
            let s = random_args(f.arity(), &mut rng);
            let t = random_args(f.arity(), &mut rng);
            let diff: Vec<f64> = s.iter().zip(&t).map(|(a, b)| (a - b).abs()).collect();
            let lhs = (f.eval_unchecked(&s) - f.eval_unchecked(&t)).abs();
            assert!(lhs <= f.eval_unchecked(&diff) + TOL, "{name} at {s:?}, {t:?}");
        }
    }
}

#[test]
fn doubling_bound() {
    for (name, f) in validated_gallery() {
        let mut rng = common::rng(12);
        for _ in 0..PAIRS {
            let t = random_args(f.arity(), &mut rng);
            let s: Vec<f64> = t.iter().map(|&v| rng.random_range(0.0..=2.0) * v).collect();
            assert!(f.eval_unchecked(&s) <= 2.0 * f.eval_unchecked(&t) + TOL, "{name} at {s:?}, {t:?}");
        }
    }
}

#[test]
fn subadditivity() {
    for (name, f) in validated_gallery() {
        let mut rng = common::rng(13);
        for _ in 0..PAIRS {
            let s = random_args(f.arity(), &mut rng);
            let t = random_args(f.arity(), &mut rng);
            let sum: Vec<f64> = s.iter().zip(&t).map(|(a, b)| a + b).collect();
            assert!(f.eval_unchecked(&sum) <= f.eval_unchecked(&s) + f.eval_unchecked(&t) + TOL, "{name} at {s:?}, {t:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// φ(s) = s^p has φ and log∘φ∘exp convex for p ≥ 1.
    #[test]
    fn mulholland_power_is_metric_preserving(p in 1.0f64..6.0, seed in any::<u64>()) {
        let f = make_mulholland(Phi::Power { p }).unwrap();
        let v = check_triangle_triplets(&f, 5_000, 10.0, seed);
        prop_assert!(v.no_violation_found, "{:?}", v.counterexample);
    }

    #[test]
    fn verdicts_respect_the_chain(which in 0usize..8, last in 2u64..24) {
        let names = ["gn1", "gn2", "gn3", "fn1", "fn2", "fn3", "const:fp:2", "const:notisotone"];
        let (family, limit) = builtins::family(names[which]).unwrap();
        let cfg = ClassifyConfig { n_list: vec![1, last / 2 + 1, last + 1], h: 1.0 / 16.0, ..Default::default() };
        let v = classify_sequence(&*family, &limit, &cfg).unwrap();
        for k in 1..5 {
            prop_assert!(!v.holds(k) || v.holds(k + 1), "({}) holds but ({}) fails", k, k + 1);
        }
    }
}

#[test]
fn mulholland_convexity_is_detected() {
    for phi in [Phi::Sinh, Phi::QuadLinear, Phi::Expm1] {
        assert_eq!(phi.convexity(), (true, true), "{phi:?}");
    }
}

#[test]
fn petrik_survives_without_log_convexity() {
    let f = builtins::petrik();
    assert!(check_triangle_triplets(&f, 100_000, 10.0, 5).no_violation_found);
    assert!(!Phi::Petrik.convexity().1);
}

#[test]
fn notisotone_is_metric_preserving_but_not_isotone() {
    let f = builtins::notisotone();
    assert!(check_triangle_triplets(&f, 100_000, 10.0, 6).no_violation_found);
    let rep = defect_table(&f, 4.0, 1.0 / 16.0, 8.0).unwrap();
    assert!(rep.sup_defect > 0.5);
    let axis: Vec<f64> = (0..=128).map(|k| k as f64 / 16.0).collect();
    for w in axis.windows(2) {
        assert!(f.eval2(w[0], 0.0) <= f.eval2(w[1], 0.0));
        assert!(f.eval2(0.0, w[0]) <= f.eval2(0.0, w[1]));
    }
}

#[test]
fn square_is_rejected_with_a_witness() {
    let v = check_triangle_triplets(&builtins::square(), 10_000, 10.0, 1);
    let w = v.counterexample.expect("s² violates the triangle inequality");
    assert!(w.values[0] > w.values[1] + w.values[2]);
}
