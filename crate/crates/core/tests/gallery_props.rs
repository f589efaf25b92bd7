mod common;

use mmlab::distances::ky_fan_weighted;
use mmlab::experiments::SPHERE_BUDGET;
use mmlab::gallery::{build_counterexample_1dim, glued_interval_sphere, sample_sphere, SphereMetric};
use mmlab::invariants::{levy_mean, observable_diameter, OdMode};
use mmlab::mpf::builtins;
use mmlab::RealDistribution;
use rand::Rng;

fn sphere_od(n: usize, seed: u64) -> f64 {
    let s = sample_sphere(n, 1.0, 2000, SphereMetric::Chordal, seed).unwrap();
    observable_diameter(&s.space, 0.1, OdMode::HeuristicLb, SPHERE_BUDGET, seed).unwrap().value
}

#[test]
fn sphere_od_decreases_with_dimension() {
    for seed in [1, 2] {
        let (a, b, c) = (sphere_od(2, seed), sphere_od(8, seed), sphere_od(32, seed));
        assert!(c < b && b < a, "seed {seed}: {a} {b} {c}");
    }
}

#[test]
fn transformed_cross_distances_stay_above_the_limit_distance() {
    let h1 = builtins::h1();
    for seed in [3, 4] {
        let c = build_counterexample_1dim(&|_| h1.clone(), 2.0, 3.0, 20, 300, seed).unwrap();
        let d_y = c.y_lim.d(0, 1);
        let min = c.cross_distances().into_iter().map(|d| h1.eval1(d)).fold(f64::INFINITY, f64::min);
        assert!(min >= d_y - 0.05, "{min} vs {d_y}");
    }
}

/// Mean Ky Fan distance, over observables d(a, ·) with random anchors a,
/// between the observable on the sphere part and its Lévy mean there.
fn sphere_part_spread(n: usize, seed: u64) -> f64 {
    let g = glued_interval_sphere(n, 600, seed).unwrap();
    let m = g.interval_atoms;
    let total = g.x_n.len();
    let w = vec![1.0 / (total - m) as f64; total - m];
    let mut rng = common::rng(seed);
    let trials = 20;
    (0..trials)
        .map(|_| {
            let a = rng.random_range(0..total);
            let f: Vec<f64> = (m..total).map(|i| g.x_n.d(a, i)).collect();
            let dist = RealDistribution::new(f.iter().copied().zip(w.iter().copied()).collect()).unwrap();
            let lm = levy_mean(&dist).lm;
            ky_fan_weighted(&w, &f, &vec![lm; f.len()])
        })
        .sum::<f64>()
        / trials as f64
}

#[test]
fn glued_sphere_part_concentrates() {
    let (a, b, c) = (sphere_part_spread(2, 5), sphere_part_spread(8, 5), sphere_part_spread(32, 5));
    assert!(c < b && b < a, "{a} {b} {c}");
}
