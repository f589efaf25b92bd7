mod common;

use mmlab::space::{mm_isomorphic, pushforward_values, SpaceRecord};
use mmlab::{validate_space, FiniteMMSpace};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn permuted(x: &FiniteMMSpace, perm: &[usize], jitter: f64, rng: &mut impl Rng) -> FiniteMMSpace {
    let n = x.len();
    // Pull point perm[i] of x to slot i; one common scale keeps the
    // triangle inequality and moves distances by at most `jitter`.
    let scale = 1.0 + rng.random_range(-jitter..=jitter) / x.diameter().max(1.0);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = x.d(perm[i], perm[j]) * scale;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let w: Vec<f64> = perm.iter().map(|&p| x.weight()[p]).collect();
    FiniteMMSpace::new(d, w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_idempotent(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        let once = validate_space(x.to_record()).unwrap();
        let twice = validate_space(once.to_record()).unwrap();
        prop_assert_eq!(&once, &x);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn zero_weights_are_dropped_once(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        let mut rec = x.to_record();
        let zero = rng.random_range(0..n);
        let w0 = rec.weight[zero];
        rec.weight[zero] = 0.0;
        let k = (zero + 1) % n;
        rec.weight[k] += w0;
        let once = validate_space(rec).unwrap();
        prop_assert_eq!(once.len(), n - 1);
        prop_assert_eq!(validate_space(once.to_record()).unwrap(), once);
    }

    #[test]
    fn pushforward_keeps_total_mass(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = common::rng(seed);
        let x = common::random_graph_space(n.min(12), &mut rng);
        // Few distinct values so that atoms merge.
        let f: Vec<f64> = (0..x.len()).map(|_| f64::from(rng.random_range(0..4u8))).collect();
        let d = pushforward_values(&x, &f).unwrap();
        let total: f64 = x.weight().iter().sum();
        prop_assert!((d.total_mass() - total).abs() <= 1e-12);
    }

    #[test]
    fn json_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        let back = FiniteMMSpace::from_json(&x.to_json()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn isomorphism_is_an_equivalence(seed in any::<u64>(), n in 1usize..6) {
        let tol = 1e-6;
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        prop_assert!(mm_isomorphic(&x, &x, 0.0).unwrap().is_some());

        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        let y = permuted(&x, &p, tol / 10.0, &mut rng);
        let xy = mm_isomorphic(&x, &y, tol).unwrap();
        let yx = mm_isomorphic(&y, &x, tol).unwrap();
        prop_assert_eq!(xy.is_some(), yx.is_some());
        prop_assert!(xy.is_some());

        let mut q: Vec<usize> = (0..n).collect();
        q.shuffle(&mut rng);
        let z = permuted(&y, &q, tol / 10.0, &mut rng);
        prop_assert!(mm_isomorphic(&y, &z, tol).unwrap().is_some());
        prop_assert!(mm_isomorphic(&x, &z, 2.0 * tol).unwrap().is_some());
    }

    #[test]
    fn non_isomorphic_spaces_are_told_apart(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        let scaled = FiniteMMSpace::new(x.dist().map(|d| 1.5 * d).rows(), x.weight().to_vec()).unwrap();
        prop_assert!(mm_isomorphic(&x, &scaled, 1e-9).unwrap().is_none());
    }
}

#[test]
fn coordinate_records_derive_distances() {
    let rec = SpaceRecord {
        weight: vec![0.5, 0.5],
        coords: Some(vec![vec![0.0, 0.0], vec![3.0, 4.0]]),
        ..Default::default()
    };
    let x = validate_space(rec).unwrap();
    assert_eq!(x.d(0, 1), 5.0);
}
