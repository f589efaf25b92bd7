//! Test-side oracles and instance generators, written without reference to
//! the library's own search code.

#![allow(dead_code)]

use mmlab::FiniteMMSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Euclidean points in [0, 3]².
pub fn random_points_space(n: usize, rng: &mut ChaCha8Rng) -> FiniteMMSpace {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0))).collect();
    let dist = pts
        .iter()
        .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
        .collect();
    FiniteMMSpace::new(dist, random_probability(n, rng)).expect("planar points give a metric")
}

/// Random metric on n points by shortest paths over random edge lengths.
pub fn random_graph_space(n: usize, rng: &mut ChaCha8Rng) -> FiniteMMSpace {
    let mut d = vec![vec![0.0; n]; n];
    for (i, j) in (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))) {
        let v = rng.random_range(0.2..2.5);
        d[i][j] = v;
        d[j][i] = v;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    FiniteMMSpace::new(d, random_probability(n, rng)).expect("shortest paths give a metric")
}

pub fn random_space(n: usize, rng: &mut ChaCha8Rng) -> FiniteMMSpace {
    if rng.random_bool(0.5) {
        random_points_space(n, rng)
    } else {
        random_graph_space(n, rng)
    }
}

/// Strictly positive probability vector.
pub fn random_probability(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Probability vector that may vanish on some points.
pub fn random_measure(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..1.0) }).collect();
        let total: f64 = raw.iter().sum();
        if total > 1e-3 {
            return raw.into_iter().map(|w| w / total).collect();
        }
    }
}

/// Width of the shortest closed interval carrying mass ≥ alpha.
pub fn partial_diameter(values: &[f64], weights: &[f64], alpha: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for i in 0..atoms.len() {
        let mut mass = 0.0;
        for j in i..atoms.len() {
            mass += atoms[j].1;
            if mass >= alpha - 1e-12 {
                best = best.min(atoms[j].0 - atoms[i].0);
                break;
            }
        }
    }
    best
}

/// Observable diameter by brute force over grid-valued functions g with
/// g(x_0) = 0 and |g(x) − g(y)| ≤ d(x, y) + δ, each replaced by its
/// McShane envelope min_a g(a) + d(a, ·), which is 1-Lipschitz. Rounding
/// an optimal f down to the grid and taking the envelope moves every value
/// down by less than 2δ, so the result is within 2δ below the true value.
pub fn od_mcshane_grid(x: &FiniteMMSpace, kappa: f64, delta: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return 0.0;
    }
    let w = x.weight();
    let mut g = vec![0.0; n];
    let mut best = 0.0f64;
    fn rec(k: usize, g: &mut Vec<f64>, x: &FiniteMMSpace, w: &[f64], kappa: f64, delta: f64, best: &mut f64) {
        let n = x.len();
        if k == n {
            let h: Vec<f64> =
                (0..n).map(|i| (0..n).map(|a| g[a] + x.d(a, i)).fold(f64::INFINITY, f64::min)).collect();
            *best = best.max(partial_diameter(&h, w, 1.0 - kappa));
            return;
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (j, &gj) in g.iter().enumerate().take(k) {
            lo = lo.max(gj - x.d(j, k) - delta);
            hi = hi.min(gj + x.d(j, k) + delta);
        }
        let mut m = (lo / delta - 1e-9).ceil() as i64;
        while m as f64 * delta <= hi + 1e-12 {
            g[k] = m as f64 * delta;
            rec(k + 1, g, x, w, kappa, delta, best);
            m += 1;
        }
    }
    rec(1, &mut g, x, w, kappa, delta, &mut best);
    best
}

/// Ky Fan metric by definition: smallest ε with m(|f − g| > ε) ≤ ε,
/// searched over {0}, the values |f − g| and the tail masses at them.
pub fn ky_fan_oracle(weights: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let diffs: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - b).abs()).collect();
    let tail = |e: f64| diffs.iter().zip(weights).filter(|(d, _)| **d > e).map(|(_, w)| w).sum::<f64>();
    let mut cands: Vec<f64> = vec![0.0];
    cands.extend(diffs.iter().copied());
    cands.extend(diffs.iter().map(|&d| tail(d)));
    cands.sort_by(f64::total_cmp);
    cands.into_iter().find(|&e| tail(e) <= e + 1e-12).unwrap_or(1.0)
}
