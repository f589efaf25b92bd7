//! Box distance: exact over equal-mass chunk parameters for tiny spaces
//! with rational weights, bounds otherwise.

use serde::{Deserialize, Serialize};

use super::maps::epsilon_mm_iso_search;
use super::prokhorov::prokhorov;
use super::DistanceError;
use crate::space::{DistMatrix, FiniteMMSpace};

/// Largest common refinement for exact mode (8! chunk bijections).
pub const BOX_MAX_CHUNKS: usize = 8;
const RATIONAL_TOL: f64 = 1e-9;
/// Merged atom count above which the bound mode skips its lower bound.
const LOWER_MAX_ATOMS: usize = 600;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoxMode {
    ExactTiny,
    /// Upper bound 3ε from an ε-mm-isomorphism search, lower bound from
    /// the pairwise-distance distributions.
    Bound { iterations: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    /// Number of equal-mass chunks in exact mode.
    pub chunks: Option<usize>,
}

impl BoxEstimate {
    pub fn value(&self) -> f64 {
        self.upper
    }
}

pub fn box_distance(x: &FiniteMMSpace, y: &FiniteMMSpace, mode: BoxMode) -> Result<BoxEstimate, DistanceError> {
    match mode {
        BoxMode::ExactTiny => box_exact(x, y),
        BoxMode::Bound { iterations, seed } => {
            let iso = epsilon_mm_iso_search(x, y, iterations, seed)?;
            let upper = (3.0 * iso.epsilon).min(1.0);
            let lower = distance_profile_bound(x, y)?.min(upper);
            Ok(BoxEstimate { lower, upper, exact: false, chunks: None })
        }
    }
}

fn denominator(w: f64) -> Result<usize, DistanceError> {
    (1..=BOX_MAX_CHUNKS)
        .find(|&q| (w * q as f64 - (w * q as f64).round()).abs() <= RATIONAL_TOL)
        .ok_or(DistanceError::NotRational(w))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Chunk labels: point i repeated w_i·k times, in point order.
fn chunks(x: &FiniteMMSpace, k: usize) -> Vec<usize> {
    x.weight()
        .iter()
        .enumerate()
        .flat_map(|(i, &w)| std::iter::repeat_n(i, (w * k as f64).round() as usize))
        .collect()
}

fn box_exact(x: &FiniteMMSpace, y: &FiniteMMSpace) -> Result<BoxEstimate, DistanceError> {
    let mut k = 1;
    for &w in x.weight().iter().chain(y.weight()) {
        let q = denominator(w)?;
        k = k / gcd(k, q) * q;
        if k > BOX_MAX_CHUNKS {
            return Err(DistanceError::CapExceeded(k));
        }
    }
    let cx = chunks(x, k);
    let mut cy = chunks(y, k);
    if cx.len() != k || cy.len() != k {
        return Err(DistanceError::Other("weights do not split into equal chunks".into()));
    }
    let full = 1usize << k;
    let mut maxdisc = vec![0.0f64; full];
    let mut disc = vec![0.0f64; k * k];
    let mut best = 1.0f64;
    loop {
        for a in 0..k {
            for b in 0..k {
                disc[a * k + b] = (x.d(cx[a], cx[b]) - y.d(cy[a], cy[b])).abs();
            }
        }
        for s in 1..full {
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            let mut m = maxdisc[rest];
            let mut r = rest;
            while r != 0 {
                let c = r.trailing_zeros() as usize;
                m = m.max(disc[low * k + c]);
                r &= r - 1;
            }
            maxdisc[s] = m;
            let v = m.max(1.0 - s.count_ones() as f64 / k as f64);
            if v < best {
                best = v;
            }
        }
        if !next_permutation(&mut cy) {
            break;
        }
    }
    Ok(BoxEstimate { lower: best, upper: best, exact: true, chunks: Some(k) })
}

/// Lexicographic successor; enumerates each multiset permutation once.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Parameters agreeing on distances up to ε off mass ε couple the
/// distance distributions (d_X)_*(m⊗m) and (d_Y)_*(m⊗m) with
/// |difference| ≤ ε off mass 2ε, so their Prokhorov distance is ≤ 2□.
fn distance_profile_bound(x: &FiniteMMSpace, y: &FiniteMMSpace) -> Result<f64, DistanceError> {
    let profile = |s: &FiniteMMSpace| -> Vec<(f64, f64)> {
        let w = s.weight();
        let mut v = Vec::with_capacity(s.len() * s.len());
        for i in 0..s.len() {
            for j in 0..s.len() {
                v.push((s.d(i, j), w[i] * w[j]));
            }
        }
        v
    };
    let (px, py) = (profile(x), profile(y));
    let mut pos: Vec<f64> = px.iter().chain(&py).map(|a| a.0).collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    if pos.len() > LOWER_MAX_ATOMS {
        return Ok(0.0);
    }
    let place = |atoms: &[(f64, f64)]| {
        let mut m = vec![0.0; pos.len()];
        for &(p, w) in atoms {
            let k = pos.partition_point(|&q| q < p);
            m[k] += w;
        }
        let total: f64 = m.iter().sum();
        m.iter_mut().for_each(|v| *v /= total);
        m
    };
    let (mu, nu) = (place(&px), place(&py));
    let d = DistMatrix::from_fn(pos.len(), |i, j| (pos[i] - pos[j]).abs());
    Ok(0.5 * prokhorov(&d, &mu, &nu, 1.0)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(d: f64, w0: f64) -> FiniteMMSpace {
        FiniteMMSpace::new(vec![vec![0.0, d], vec![d, 0.0]], vec![w0, 1.0 - w0]).unwrap()
    }

    #[test]
    fn identical_spaces() {
        let x = two(1.0, 0.5);
        assert_eq!(box_distance(&x, &x, BoxMode::ExactTiny).unwrap().value(), 0.0);
    }

    #[test]
    fn one_point_vs_two_point() {
        let b = box_distance(&FiniteMMSpace::one_point(), &two(1.0, 0.5), BoxMode::ExactTiny).unwrap();
        assert_eq!(b.value(), 0.5);
        assert_eq!(b.chunks, Some(2));
    }

    #[test]
    fn two_point_distance_change() {
        let b = box_distance(&two(1.0, 0.5), &two(1.25, 0.5), BoxMode::ExactTiny).unwrap();
        assert_eq!(b.value(), 0.25);
    }

    #[test]
    fn bounds_bracket_exact() {
        let (x, y) = (two(1.0, 0.25), two(2.0, 0.5));
        let e = box_distance(&x, &y, BoxMode::ExactTiny).unwrap().value();
        let b = box_distance(&x, &y, BoxMode::Bound { iterations: 200, seed: 1 }).unwrap();
        assert!(b.lower <= e + 1e-12 && e <= b.upper + 1e-12, "{b:?} vs {e}");
    }

    #[test]
    fn irrational_weights_rejected() {
        let x = two(1.0, 1.0 / std::f64::consts::PI);
        assert!(matches!(box_distance(&x, &x, BoxMode::ExactTiny), Err(DistanceError::NotRational(_))));
    }
}
