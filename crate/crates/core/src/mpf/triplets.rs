//! Sampling falsifier for metric preservation: F maps every N-tuple of
//! triangle triplets to a triangle triplet and vanishes only at the origin.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MPFDescriptor;
use crate::rng::substream;

const BLOCK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletWitness {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// (F(a), F(b), F(c)); F(a) exceeds F(b) + F(c).
    pub values: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletVerdict {
    /// True when no violation was found. This is a failed falsification,
    /// not a proof.
    pub no_violation_found: bool,
    pub checked: usize,
    pub counterexample: Option<TripletWitness>,
    /// First point of a sampled shell where F vanished (or F(0) ≠ 0).
    pub zero_set_witness: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug)]
pub struct TripletConfig {
    pub samples: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Relative slack on F(a) ≤ F(b) + F(c).
    pub rel_tol: f64,
}

impl Default for TripletConfig {
    fn default() -> Self {
        TripletConfig { samples: 100_000, horizon: 10.0, seed: 0, rel_tol: 1e-9 }
    }
}

pub fn check_triangle_triplets(f: &MPFDescriptor, samples: usize, horizon: f64, seed: u64) -> TripletVerdict {
    check_triangle_triplets_with(f, TripletConfig { samples, horizon, seed, ..Default::default() })
}

pub fn check_triangle_triplets_with(f: &MPFDescriptor, cfg: TripletConfig) -> TripletVerdict {
    let zero_set_witness = zero_set_check(f);
    let fixed = deterministic_cases(f.arity(), cfg.horizon);
    let mut checked = 0;
    for (a, b, c) in &fixed {
        checked += 1;
        if let Some(w) = violation(f, a, b, c, cfg.rel_tol) {
            return TripletVerdict { no_violation_found: false, checked, counterexample: Some(w), zero_set_witness };
        }
    }
    let blocks = cfg.samples.div_ceil(BLOCK);
    let found = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = substream(cfg.seed, blk as u64);
            let count = BLOCK.min(cfg.samples - blk * BLOCK);
            for k in 0..count {
                let (a, b, c) = random_case(&mut rng, f.arity(), cfg.horizon);
                if let Some(w) = violation(f, &a, &b, &c, cfg.rel_tol) {
                    return Some((k, w));
                }
            }
            None
        })
        .collect::<Vec<_>>();
    for (blk, hit) in found.into_iter().enumerate() {
        if let Some((k, w)) = hit {
            return TripletVerdict {
                no_violation_found: false,
                checked: checked + blk * BLOCK + k + 1,
                counterexample: Some(w),
                zero_set_witness,
            };
        }
    }
    TripletVerdict {
        no_violation_found: zero_set_witness.is_none(),
        checked: checked + cfg.samples,
        counterexample: None,
        zero_set_witness,
    }
}

/// Tests all three rotations of the triplet.
fn violation(f: &MPFDescriptor, a: &[f64], b: &[f64], c: &[f64], rel_tol: f64) -> Option<TripletWitness> {
    let (fa, fb, fc) = (f.eval_unchecked(a), f.eval_unchecked(b), f.eval_unchecked(c));
    let slack = rel_tol * (1.0 + fa.max(fb).max(fc));
    let rot = [(a, b, c, fa, fb, fc), (b, c, a, fb, fc, fa), (c, a, b, fc, fa, fb)];
    for (x, y, z, fx, fy, fz) in rot {
        if !(fx <= fy + fz + slack) {
            return Some(TripletWitness { a: x.to_vec(), b: y.to_vec(), c: z.to_vec(), values: [fx, fy, fz] });
        }
    }
    None
}

fn grid_values(horizon: f64) -> Vec<f64> {
    let mut v = vec![0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0];
    v.extend([horizon / 3.0, horizon / 2.0, horizon]);
    v.retain(|&x| x <= horizon);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Degenerate triplets (x+y, x, y), equilateral and isoceles-with-zero
/// cases on a small grid, shared by every coordinate or mixed
/// round-robin when N > 1.
fn deterministic_cases(arity: usize, horizon: f64) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let g = grid_values(horizon);
    let mut base: Vec<[f64; 3]> = Vec::new();
    for &x in &g {
        base.push([x, x, x]);
        base.push([x, x, 0.0]);
        for &y in &g {
            if x + y <= 2.0 * horizon {
                base.push([x + y, x, y]);
            }
        }
    }
    let m = base.len();
    let mut out = Vec::new();
    for (k, t) in base.iter().enumerate() {
        let mut a = Vec::with_capacity(arity);
        let mut b = Vec::with_capacity(arity);
        let mut c = Vec::with_capacity(arity);
        for i in 0..arity {
            let u = if i == 0 { t } else { &base[(k * 7 + i * 13) % m] };
            a.push(u[0]);
            b.push(u[1]);
            c.push(u[2]);
        }
        out.push((a, b, c));
        if arity > 1 {
            for i in 0..arity {
                let mut a = vec![0.0; arity];
                let mut b = vec![0.0; arity];
                let mut c = vec![0.0; arity];
                a[i] = t[0];
                b[i] = t[1];
                c[i] = t[2];
                out.push((a, b, c));
            }
        }
    }
    out
}

/// Per coordinate: a uniform triangle triplet in [0,h]³ by rejection,
/// or with probability ¼ a degenerate one (c = a + b or c = |a − b|).
fn random_case(rng: &mut crate::rng::Rng, arity: usize, h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut a = Vec::with_capacity(arity);
    let mut b = Vec::with_capacity(arity);
    let mut c = Vec::with_capacity(arity);
    for _ in 0..arity {
        let t = loop {
            let x: f64 = rng.random::<f64>() * h;
            let y: f64 = rng.random::<f64>() * h;
            let mode: u8 = rng.random_range(0..8);
            let z = match mode {
                0 => x + y,
                1 => (x - y).abs(),
                _ => rng.random::<f64>() * h,
            };
            if z <= x + y && x <= y + z && y <= x + z {
                let order: u8 = rng.random_range(0..3);
                break match order {
                    0 => [x, y, z],
                    1 => [z, x, y],
                    _ => [y, z, x],
                };
            }
        };
        a.push(t[0]);
        b.push(t[1]);
        c.push(t[2]);
    }
    (a, b, c)
}

/// F(0) = 0 and F > 0 on shells of radii 1e-6, 1e-3, 1, 10 (directions:
/// coordinate axes, the diagonal and a few fixed mixtures).
fn zero_set_check(f: &MPFDescriptor) -> Option<Vec<f64>> {
    let n = f.arity();
    let origin = vec![0.0; n];
    if f.eval_unchecked(&origin).abs() > 1e-12 {
        return Some(origin);
    }
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    dirs.push(vec![1.0 / (n as f64).sqrt(); n]);
    for k in 1..=4 {
        let v: Vec<f64> = (0..n).map(|i| ((i + k) % 3) as f64 + 0.5).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        dirs.push(v.into_iter().map(|x| x / norm).collect());
    }
    for r in [1e-6, 1e-3, 1.0, 10.0] {
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|v| v * r).collect();
            if !(f.eval_unchecked(&x) > 0.0) {
                return Some(x);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::builtins::*;
    use super::*;

    #[test]
    fn square_is_rejected_with_checkable_witness() {
        let v = check_triangle_triplets(&square(), 1000, 10.0, 1);
        assert!(!v.no_violation_found);
        let w = v.counterexample.unwrap();
        let [fa, fb, fc] = w.values;
        assert_eq!(fa, w.a[0] * w.a[0]);
        assert_eq!(fb, w.b[0] * w.b[0]);
        assert_eq!(fc, w.c[0] * w.c[0]);
        assert!(fa > fb + fc);
        assert!(w.a[0] <= w.b[0] + w.c[0] && w.b[0] <= w.a[0] + w.c[0] && w.c[0] <= w.a[0] + w.b[0]);
    }

    #[test]
    fn lp_survive() {
        for p in [1.0, 2.0, f64::INFINITY] {
            let v = check_triangle_triplets(&lp(p, 2), 20_000, 10.0, 3);
            assert!(v.no_violation_found, "p = {p}: {:?}", v.counterexample);
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let f = notisotone();
        let a = check_triangle_triplets(&f, 10_000, 5.0, 9);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| check_triangle_triplets(&f, 10_000, 5.0, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn clamp_without_zero_is_flagged() {
        let f = MPFDescriptor::unary(super::super::Expr::Const { c: 1.0 }).unwrap();
        let v = check_triangle_triplets(&f, 10, 1.0, 0);
        assert!(v.zero_set_witness.is_some());
    }
}
