//! Finite-n evidence that a map p: X_n → Y enforces ε-concentration.
//!
//! Three numbers are reported: the Prokhorov distance between p_*m and
//! m_Y, the additive Lipschitz error of p (which bounds the distance from
//! p*Lip_1(Y) into Lip_1(X_n)), and, over sampled observables f on X_n,
//! the Ky Fan distance from f to the nearest g∘p with g ∈ Lip_1(Y).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::maps::{lip_up_to_eps, pushforward_weights};
use super::prokhorov::prokhorov;
use super::{ky_fan_weighted, DistanceError};
use crate::invariants::sample_observables;
use crate::space::{DistMatrix, FiniteMMSpace};

/// Largest target for which Lip_1(Y) is searched.
pub const CERT_MAX_TARGET: usize = 6;
const BISECT_ITERS: usize = 60;
const DESCENT_SWEEPS: usize = 4;
const DESCENT_CANDIDATES: usize = 48;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertConfig {
    pub observables: usize,
    pub eps_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for CertConfig {
    fn default() -> Self {
        CertConfig { observables: 200, eps_grid: (0..=200).map(|k| k as f64 * 0.005).collect(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCertificate {
    pub map: Vec<usize>,
    pub epsilon_prok: f64,
    pub epsilon_lip: f64,
    pub lip_domain: Vec<usize>,
    pub epsilon_haus: f64,
    /// Sampled observable attaining epsilon_haus.
    pub haus_witness: Vec<f64>,
    /// The nearest pulled-back function found for the witness.
    pub haus_target: Vec<f64>,
    /// True when every minimization over Lip_1(Y) was exact.
    pub haus_exact: bool,
    pub lip_exact: bool,
    pub epsilon: f64,
}

pub fn concentration_certificate(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    map: &[usize],
    cfg: &CertConfig,
) -> Result<ConcentrationCertificate, DistanceError> {
    if y.len() > CERT_MAX_TARGET {
        return Err(DistanceError::TargetTooLarge(y.len()));
    }
    if map.len() != x.len() {
        return Err(DistanceError::HostMismatch { expected: x.len(), got: map.len() });
    }
    let push = pushforward_weights(x.weight(), map, y.len())?;
    let epsilon_prok = prokhorov(y.dist(), &push, y.weight(), 1.0)?.value;
    let mut grid = cfg.eps_grid.clone();
    grid.push(1.0);
    let lip = lip_up_to_eps(x, y.dist(), map, &grid)?;
    let epsilon_lip = lip.epsilon.unwrap_or(1.0);
    let obs = sample_observables(x, cfg.observables, cfg.seed);
    let w = x.weight();
    let results: Vec<(f64, Vec<f64>, bool)> =
        obs.par_iter().map(|f| nearest_pullback(w, f, map, y.dist())).collect();
    let (k, worst) = results
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, r)| if r.0 > acc.1 { (k, r.0) } else { acc });
    let haus_exact = results.iter().all(|r| r.2);
    let (epsilon_haus, haus_witness, haus_target) = if results.is_empty() {
        (0.0, Vec::new(), Vec::new())
    } else {
        (worst.max(0.0), obs[k].clone(), map.iter().map(|&t| results[k].1[t]).collect())
    };
    Ok(ConcentrationCertificate {
        map: map.to_vec(),
        epsilon_prok,
        epsilon_lip,
        lip_domain: lip.domain,
        epsilon_haus,
        haus_witness,
        haus_target,
        haus_exact,
        lip_exact: lip.exact,
        epsilon: epsilon_prok.max(epsilon_lip).max(epsilon_haus),
    })
}

/// min over g ∈ Lip_1(Y) of ky(f, g∘p); returns (value, g, exact).
pub(crate) fn nearest_pullback(w: &[f64], f: &[f64], map: &[usize], y: &DistMatrix) -> (f64, Vec<f64>, bool) {
    let fibers: Vec<Fiber> = (0..y.n()).map(|t| Fiber::new(w, f, map, t)).collect();
    match y.n() {
        0 => (0.0, Vec::new(), true),
        1 => {
            let (v, c) = fibers[0].best_constant();
            (v, vec![c], true)
        }
        2 => {
            let d = y.get(0, 1);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut g = two_point_feasible(&fibers[0], &fibers[1], d, hi).expect("ε = 1 is feasible");
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                match two_point_feasible(&fibers[0], &fibers[1], d, mid) {
                    Some(c) => {
                        hi = mid;
                        g = c;
                    }
                    None => lo = mid,
                }
            }
            let v = ky_fan_weighted(w, f, &map.iter().map(|&t| g[t]).collect::<Vec<_>>());
            (v, g.to_vec(), true)
        }
        _ => descent(w, f, map, y, &fibers),
    }
}

/// Values of f on one fiber, sorted, with prefix masses.
struct Fiber {
    vals: Vec<f64>,
    prefix: Vec<f64>,
}

impl Fiber {
    fn new(w: &[f64], f: &[f64], map: &[usize], t: usize) -> Self {
        let mut atoms: Vec<(f64, f64)> = (0..f.len()).filter(|&i| map[i] == t).map(|i| (f[i], w[i])).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(atoms.len() + 1);
        prefix.push(0.0);
        for a in &atoms {
            prefix.push(prefix.last().unwrap() + a.1);
        }
        Fiber { vals: atoms.into_iter().map(|a| a.0).collect(), prefix }
    }

    /// Mass in [lo, hi].
    fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let a = self.vals.partition_point(|&v| v < lo);
        let b = self.vals.partition_point(|&v| v <= hi);
        if b > a {
            self.prefix[b] - self.prefix[a]
        } else {
            0.0
        }
    }

    /// Exact min over constants c of ky(f, c) on a single fiber carrying
    /// all mass: min over windows of max(width/2, 1 − mass).
    fn best_constant(&self) -> (f64, f64) {
        let n = self.vals.len();
        let mut best = (1.0f64, self.vals.first().copied().unwrap_or(0.0));
        let value = |i: usize, j: usize| {
            let width = self.vals[j] - self.vals[i];
            (0.5 * width).max(1.0 - (self.prefix[j + 1] - self.prefix[i]))
        };
        for i in 0..n {
            // First j where width/2 ≥ 1 − mass; the optimum is there or one before.
            let (mut lo, mut hi) = (i, n - 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if 0.5 * (self.vals[mid] - self.vals[i]) >= 1.0 - (self.prefix[mid + 1] - self.prefix[i]) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            for j in [lo.saturating_sub(1).max(i), lo] {
                let v = value(i, j);
                if v < best.0 {
                    best = (v, 0.5 * (self.vals[i] + self.vals[j]));
                }
            }
        }
        best
    }
}

/// Centres (c_0, c_1) with |c_0 − c_1| ≤ d whose ε-windows cover mass
/// ≥ 1 − ε, if any. Works with left window edges l_t = c_t − ε so data
/// points enter unrounded. Optimal windows can be slid right until l_0
/// meets a point of fiber 0, or l_0 sits at distance d from an aligned
/// edge of fiber 1; for a fixed l_0 the best l_1 is an aligned edge in
/// range or the right end of the range.
fn two_point_feasible(f0: &Fiber, f1: &Fiber, d: f64, eps: f64) -> Option<[f64; 2]> {
    let need = 1.0 - eps - 1e-15;
    let w = 2.0 * eps;
    let a1: Vec<f64> = f1.vals.iter().map(|&g| f1.mass_in(g, g + w)).collect();
    let table = SparseMax::new(&a1);
    let best1 = |lo: f64, hi: f64| -> (f64, f64) {
        let mut best = (f1.mass_in(hi, hi + w), hi);
        let a = f1.vals.partition_point(|&g| g < lo);
        let b = f1.vals.partition_point(|&g| g <= hi);
        if b > a {
            let (v, k) = table.query(a, b);
            if v > best.0 {
                best = (v, f1.vals[k]);
            }
        }
        best
    };
    // Fiber 0 uncovered: only fiber 1 matters.
    if let Some(k) = (0..a1.len()).max_by(|&p, &q| a1[p].total_cmp(&a1[q])) {
        if a1[k] >= need {
            return Some([f1.vals[k] + eps; 2]);
        }
    }
    let cands = f0.vals.iter().copied().chain(f1.vals.iter().map(|&g| g + d));
    for l0 in cands {
        // Absorbs the rounding of g + d − d.
        let slack = 1e-12 * (1.0 + l0.abs() + d);
        let m0 = f0.mass_in(l0, l0 + w);
        let (m1, l1) = best1(l0 - d - slack, l0 + d);
        if m0 + m1 >= need {
            return Some([l0 + eps, l1 + eps]);
        }
    }
    None
}

/// Range maximum with its index over a fixed array.
struct SparseMax {
    levels: Vec<Vec<usize>>,
    vals: Vec<f64>,
}

impl SparseMax {
    fn new(vals: &[f64]) -> Self {
        let n = vals.len();
        let mut levels = vec![(0..n).collect::<Vec<usize>>()];
        let mut span = 1;
        while 2 * span <= n {
            let prev = levels.last().unwrap();
            let next: Vec<usize> = (0..=n - 2 * span)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + span]);
                    if vals[b] > vals[a] {
                        b
                    } else {
                        a
                    }
                })
                .collect();
            levels.push(next);
            span *= 2;
        }
        SparseMax { levels, vals: vals.to_vec() }
    }

    /// Max over [a, b).
    fn query(&self, a: usize, b: usize) -> (f64, usize) {
        let len = b - a;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let (p, q) = (self.levels[k][a], self.levels[k][b - (1 << k)]);
        let i = if self.vals[q] > self.vals[p] { q } else { p };
        (self.vals[i], i)
    }
}

/// Coordinate descent over g ∈ Lip_1(Y) for 3 ≤ |Y| ≤ 6, starting from
/// the McShane hull of the fiber Lévy means.
fn descent(w: &[f64], f: &[f64], map: &[usize], y: &DistMatrix, fibers: &[Fiber]) -> (f64, Vec<f64>, bool) {
    let ny = y.n();
    let mid: Vec<f64> = fibers
        .iter()
        .map(|fb| if fb.vals.is_empty() { 0.0 } else { fb.vals[fb.vals.len() / 2] })
        .collect();
    let mut g: Vec<f64> = (0..ny).map(|t| (0..ny).map(|s| mid[s] + y.get(s, t)).fold(f64::INFINITY, f64::min)).collect();
    let eval = |g: &[f64]| ky_fan_weighted(w, f, &map.iter().map(|&t| g[t]).collect::<Vec<_>>());
    let mut best = eval(&g);
    for _ in 0..DESCENT_SWEEPS {
        for t in 0..ny {
            let lo = (0..ny).filter(|&s| s != t).map(|s| g[s] - y.get(s, t)).fold(f64::NEG_INFINITY, f64::max);
            let hi = (0..ny).filter(|&s| s != t).map(|s| g[s] + y.get(s, t)).fold(f64::INFINITY, f64::min);
            let fb = &fibers[t];
            let mut cands: Vec<f64> = (0..=DESCENT_CANDIDATES)
                .filter_map(|k| fb.vals.get(k * fb.vals.len().saturating_sub(1) / DESCENT_CANDIDATES).copied())
                .collect();
            cands.extend([lo, hi]);
            for c in cands {
                let c = c.clamp(lo, hi);
                if !c.is_finite() {
                    continue;
                }
                let old = g[t];
                g[t] = c;
                let v = eval(&g);
                if v < best {
                    best = v;
                } else {
                    g[t] = old;
                }
            }
        }
    }
    (best, g, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(d: f64) -> FiniteMMSpace {
        FiniteMMSpace::uniform(vec![vec![0.0, d], vec![d, 0.0]]).unwrap()
    }

    /// Reference: scan constants on a fine grid.
    fn grid_constant(w: &[f64], f: &[f64]) -> f64 {
        let (lo, hi) = (f.iter().copied().fold(f64::INFINITY, f64::min), f.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        (0..=4000)
            .map(|k| lo + (hi - lo) * k as f64 / 4000.0)
            .map(|c| ky_fan_weighted(w, f, &vec![c; f.len()]))
            .fold(1.0, f64::min)
    }

    #[test]
    fn constant_target_matches_grid() {
        let w = [0.1, 0.2, 0.3, 0.15, 0.25];
        let f = [0.0, 0.3, 0.35, 0.9, 2.0];
        let (v, c, exact) = nearest_pullback(&w, &f, &[0; 5], &FiniteMMSpace::one_point().dist().clone());
        assert!(exact);
        assert!((ky_fan_weighted(&w, &f, &[c[0]; 5]) - v).abs() < 1e-12);
        assert!(v <= grid_constant(&w, &f) + 1e-12);
        assert!(v >= grid_constant(&w, &f) - 1e-3);
    }

    #[test]
    fn identity_certificate_is_zero() {
        let x = two(1.0);
        let c = concentration_certificate(&x, &x, &[0, 1], &CertConfig::default()).unwrap();
        assert_eq!(c.epsilon_prok, 0.0);
        assert_eq!(c.epsilon_lip, 0.0);
        assert!(c.epsilon_haus < 1e-9, "{c:?}");
    }

    #[test]
    fn collapse_to_point_has_half_gap() {
        let x = two(2.0);
        let c = concentration_certificate(&x, &FiniteMMSpace::one_point(), &[0, 0], &CertConfig::default()).unwrap();
        assert_eq!(c.epsilon_prok, 0.0);
        assert_eq!(c.epsilon_lip, 0.0);
        assert!((c.epsilon_haus - 0.5).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn two_point_target_matches_grid_search() {
        let w = [0.2, 0.2, 0.1, 0.3, 0.2];
        let f = [0.0, 0.4, 1.0, 2.2, 2.5];
        let map = [0, 0, 0, 1, 1];
        let y = two(1.5);
        let (v, g, _) = nearest_pullback(&w, &f, &map, y.dist());
        assert!((g[0] - g[1]).abs() <= 1.5 + 1e-9);
        let mut best = 1.0f64;
        for a in 0..=300 {
            for b in 0..=300 {
                let (c0, c1) = (a as f64 * 0.01 - 0.5, b as f64 * 0.01);
                if (c0 - c1).abs() <= 1.5 {
                    let h: Vec<f64> = map.iter().map(|&t| if t == 0 { c0 } else { c1 }).collect();
                    best = best.min(ky_fan_weighted(&w, &f, &h));
                }
            }
        }
        assert!(v <= best + 1e-9 && v >= best - 0.02, "{v} vs {best}");
    }
}
