mod common;

use mmlab::distances::{
    box_distance, concentration_certificate, ky_fan, lip_up_to_eps, mcshane_repair, plan_is_valid, prokhorov,
    prokhorov_bruteforce, BoxMode, CertConfig,
};
use mmlab::space::{lipschitz_violation, DistMatrix};
use mmlab::FiniteMMSpace;
use proptest::prelude::*;
use rand::Rng;

fn dyadic_space(n: usize, rng: &mut impl Rng) -> FiniteMMSpace {
    let mut rng2 = common::rng(rng.random());
    let x = common::random_space(n, &mut rng2);
    // Weights k/8 summing to one, each at least 1/8.
    let mut units = vec![1usize; n];
    for _ in n..8 {
        units[rng.random_range(0..n)] += 1;
    }
    x.with_weights(units.iter().map(|&k| k as f64 / 8.0).collect()).unwrap()
}

/// Pushforwards of the same measure under f and g, as measures on the
/// line carried by the union of their values.
fn line_measures(w: &[f64], f: &[f64], g: &[f64]) -> (DistMatrix, Vec<f64>, Vec<f64>) {
    let pts: Vec<f64> = f.iter().chain(g).copied().collect();
    let d = DistMatrix::from_fn(pts.len(), |i, j| (pts[i] - pts[j]).abs());
    let n = f.len();
    let mut mu = vec![0.0; 2 * n];
    let mut nu = vec![0.0; 2 * n];
    mu[..n].copy_from_slice(w);
    nu[n..].copy_from_slice(w);
    (d, mu, nu)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_value_equals_subset_enumeration(seed in any::<u64>(), n in 1usize..6, lambda in 0.2f64..3.0) {
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        let mu = common::random_measure(n, &mut rng);
        let nu = common::random_measure(n, &mut rng);
        let p = prokhorov(x.dist(), &mu, &nu, lambda).unwrap();
        let b = prokhorov_bruteforce(x.dist(), &mu, &nu, lambda).unwrap();
        prop_assert!((p.value - b).abs() <= 1e-6, "{} vs {}", p.value, b);
        prop_assert!(plan_is_valid(x.dist(), &mu, &nu, &p.plan));
    }

    #[test]
    fn prokhorov_of_pushforwards_is_below_ky_fan(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = f.iter().map(|&v| v + rng.random_range(-0.5..0.5) * f64::from(rng.random_bool(0.6))).collect();
        let ky = ky_fan(&x, &f, &g).unwrap();
        prop_assert!((ky - common::ky_fan_oracle(x.weight(), &f, &g)).abs() <= 1e-12);
        let (d, mu, nu) = line_measures(x.weight(), &f, &g);
        let prok = prokhorov(&d, &mu, &nu, 1.0).unwrap().value;
        prop_assert!(prok <= ky + 1e-9, "prok {} > ky {}", prok, ky);
    }

    #[test]
    fn box_distance_is_symmetric(seed in any::<u64>(), nx in 1usize..4, ny in 1usize..4) {
        let mut rng = common::rng(seed);
        let x = dyadic_space(nx, &mut rng);
        let y = dyadic_space(ny, &mut rng);
        let xy = box_distance(&x, &y, BoxMode::ExactTiny).unwrap().value();
        let yx = box_distance(&y, &x, BoxMode::ExactTiny).unwrap().value();
        prop_assert!((xy - yx).abs() <= 1e-12);
    }

    #[test]
    fn box_is_at_most_twice_prokhorov(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = common::rng(seed);
        let x = dyadic_space(n, &mut rng);
        let mu = x.weight().to_vec();
        let nu = dyadic_space(n, &mut rng).weight().to_vec();
        let y = x.with_weights(nu.clone()).unwrap();
        let bx = box_distance(&x, &y, BoxMode::ExactTiny).unwrap().value();
        let prok = prokhorov(x.dist(), &mu, &nu, 1.0).unwrap().value;
        prop_assert!(bx <= 2.0 * prok + 1e-9, "□ {} vs prok {}", bx, prok);
    }

    #[test]
    fn mcshane_repair_is_close_in_ky_fan(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let x = common::random_space(n, &mut rng);
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        // f as a map onto its own values.
        let target = DistMatrix::from_fn(n, |i, j| (f[i] - f[j]).abs());
        let identity: Vec<usize> = (0..n).collect();
        let grid: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let found = lip_up_to_eps(&x, &target, &identity, &grid).unwrap();
        if let Some(eps) = found.epsilon {
            let repaired = mcshane_repair(&x, &f, &found.domain);
            prop_assert!(lipschitz_violation(x.dist(), &repaired, 1.0 + 1e-12).is_none());
            prop_assert!(ky_fan(&x, &f, &repaired).unwrap() <= eps + 1e-9);
        }
    }
}

#[test]
fn certificates_are_reproducible() {
    let mut rng = common::rng(4);
    let x = common::random_space(6, &mut rng);
    let y = FiniteMMSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
    let map: Vec<usize> = (0..6).map(|i| i % 2).collect();
    let cfg = CertConfig { seed: 9, ..Default::default() };
    let a = concentration_certificate(&x, &y, &map, &cfg).unwrap();
    let b = concentration_certificate(&x, &y, &map, &cfg).unwrap();
    assert_eq!(a, b);
}
