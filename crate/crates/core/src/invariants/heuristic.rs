//! Lower bounds on OD and LR by searching a family of 1-Lipschitz
//! observables, followed by a short single-point local search.

use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{levy_radius_of, pd_values, Budget};
use crate::rng::{substream, Rng};
use crate::space::FiniteMMSpace;

enum Observable {
    Distance(usize),
    Axis(usize),
    Projection(Vec<f64>),
    /// min_i (c_i + d(·, a_i))
    Kuratowski(Vec<(usize, f64)>),
}

impl Observable {
    fn values(&self, x: &FiniteMMSpace) -> Vec<f64> {
        let n = x.len();
        match self {
            Observable::Distance(a) => x.dist().row(*a).to_vec(),
            Observable::Axis(k) => {
                let c = x.coords().expect("axis observable needs coordinates");
                c.points.iter().map(|p| p[*k]).collect()
            }
            Observable::Projection(u) => {
                let c = x.coords().expect("projection observable needs coordinates");
                c.points.iter().map(|p| p.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
            }
            Observable::Kuratowski(anchors) => (0..n)
                .map(|i| anchors.iter().map(|&(a, c)| c + x.d(a, i)).fold(f64::INFINITY, f64::min))
                .collect(),
        }
    }
}

fn family(x: &FiniteMMSpace, budget: Budget, rng: &mut Rng) -> Vec<Observable> {
    let n = x.len();
    let total = budget.functions.max(1);
    let mut out = Vec::with_capacity(total + n);
    let anchors = n.min(total.div_ceil(2));
    let stride = n as f64 / anchors as f64;
    out.extend((0..anchors).map(|k| Observable::Distance((k as f64 * stride) as usize)));
    // Coordinate projections are 1-Lipschitz for chordal and geodesic
    // distances alike.
    if let Some(c) = x.coords() {
        let dim = c.dim();
        out.extend((0..dim).map(Observable::Axis));
        let rest = total.saturating_sub(out.len()) / 2;
        for _ in 0..rest {
            let mut u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            u.iter_mut().for_each(|v| *v /= norm);
            out.push(Observable::Projection(u));
        }
    }
    let diam = x.diameter();
    while out.len() < total {
        let k = rng.random_range(1..=3usize).min(n);
        let idx = sample(rng, n, k);
        out.push(Observable::Kuratowski(
            idx.iter().map(|a| (a, rng.random::<f64>() * 0.5 * diam)).collect(),
        ));
    }
    out
}

/// Maximizes `score` over the observable family, then improves the best
/// one by single-point moves that keep it 1-Lipschitz and never lower the
/// score. Returns (score, values, observables evaluated).
fn search(
    x: &FiniteMMSpace,
    budget: Budget,
    seed: u64,
    score: impl Fn(&[f64]) -> f64 + Sync,
) -> (f64, Vec<f64>, usize) {
    let n = x.len();
    if n <= 1 {
        return (0.0, vec![0.0; n], 0);
    }
    let obs = family(x, budget, &mut substream(seed, 0));
    let (best_idx, mut best) = obs
        .par_iter()
        .enumerate()
        .map(|(k, o)| (k, score(&o.values(x))))
        .reduce(|| (usize::MAX, f64::NEG_INFINITY), |a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        });
    let mut f = obs[best_idx].values(x);
    let mut rng = substream(seed, 1);
    for _ in 0..budget.local_steps {
        let i = rng.random_range(0..n);
        let row = x.dist().row(i);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..n {
            if j != i {
                lo = lo.max(f[j] - row[j]);
                hi = hi.min(f[j] + row[j]);
            }
        }
        if !(lo <= hi) {
            continue;
        }
        let old = f[i];
        let cand = match rng.random_range(0..3u8) {
            0 => lo,
            1 => hi,
            _ => lo + rng.random::<f64>() * (hi - lo),
        };
        f[i] = cand;
        let v = score(&f);
        if v >= best {
            best = v;
        } else {
            f[i] = old;
        }
    }
    (best.max(0.0), f, obs.len())
}

pub fn od_heuristic(x: &FiniteMMSpace, kappa: f64, budget: Budget, seed: u64) -> (f64, Vec<f64>, usize) {
    let w = x.weight();
    search(x, budget, seed, |f| pd_values(f, w, 1.0 - kappa))
}

pub fn levy_radius_heuristic(x: &FiniteMMSpace, kappa: f64, budget: Budget, seed: u64) -> (f64, Vec<f64>) {
    let w = x.weight();
    let (v, f, _) = search(x, budget, seed, |f| levy_radius_of(f, w, kappa));
    (v, f)
}

/// Values of `count` observables from the search family, for sweeps that
/// need 1-Lipschitz test functions rather than an optimum.
pub(crate) fn sample_observables(x: &FiniteMMSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let budget = Budget { functions: count, local_steps: 0 };
    family(x, budget, &mut substream(seed, 0)).iter().map(|o| o.values(x)).collect()
}
