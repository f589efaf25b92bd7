//! Partial and observable diameters, Lévy mean and radius, concentration
//! function and κ-distance.

pub mod battery;
mod exact;
mod heuristic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{FiniteMMSpace, LipFunction, RealDistribution, SpaceError};

pub use exact::{levy_radius_exact, od_exact};
pub use heuristic::{levy_radius_heuristic, od_heuristic};
pub(crate) use heuristic::sample_observables;

/// Largest space handled by the exact observable-diameter search.
pub const EXACT_MAX_POINTS: usize = 6;
/// Largest space handled by exact subset enumeration.
pub const SUBSET_MAX_POINTS: usize = 16;
const MASS_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("alpha = {0} is outside (0, 1]")]
    BadAlpha(f64),
    #[error("kappa = {0} is outside (0, 1)")]
    BadKappa(f64),
    #[error("exact mode supports at most {max} points, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Shortest closed interval carrying mass ≥ alpha, by a sliding window
/// over the sorted atoms.
pub fn partial_diameter(dist: &RealDistribution, alpha: f64) -> Result<f64, InvariantError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(InvariantError::BadAlpha(alpha));
    }
    Ok(pd_sorted(dist.atoms(), alpha))
}

pub(crate) fn pd_sorted(atoms: &[(f64, f64)], alpha: f64) -> f64 {
    let target = alpha - MASS_SLACK;
    let mut best = f64::INFINITY;
    let mut j = 0;
    let mut mass = 0.0;
    for i in 0..atoms.len() {
        while j < atoms.len() && mass < target {
            mass += atoms[j].1;
            j += 1;
        }
        if mass < target {
            break;
        }
        best = best.min(atoms[j - 1].0 - atoms[i].0);
        mass -= atoms[i].1;
    }
    if best.is_finite() {
        best
    } else {
        atoms.last().map_or(0.0, |l| l.0 - atoms[0].0)
    }
}

/// PD of the pushforward of raw values under the given weights.
pub fn pd_values(values: &[f64], weights: &[f64], alpha: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    pd_sorted(&atoms, alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianInterval {
    pub lo: f64,
    pub hi: f64,
    pub lm: f64,
}

/// Median interval [m̲, m̄] from the two one-sided ½ conditions, and the
/// Lévy mean (m̲ + m̄)/2.
pub fn levy_mean(dist: &RealDistribution) -> MedianInterval {
    levy_mean_sorted(dist.atoms())
}

pub(crate) fn levy_mean_sorted(atoms: &[(f64, f64)]) -> MedianInterval {
    let half = 0.5 - MASS_SLACK;
    let mut cum = 0.0;
    let mut lo = atoms[atoms.len() - 1].0;
    for &(x, m) in atoms {
        cum += m;
        if cum >= half {
            lo = x;
            break;
        }
    }
    let mut cum = 0.0;
    let mut hi = atoms[0].0;
    for &(x, m) in atoms.iter().rev() {
        cum += m;
        if cum >= half {
            hi = x;
            break;
        }
    }
    MedianInterval { lo, hi, lm: 0.5 * (lo + hi) }
}

/// Smallest ε with m(|f − lm(f)| > ε) ≤ κ.
pub fn levy_radius_of(values: &[f64], weights: &[f64], kappa: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lm = levy_mean_sorted(&atoms).lm;
    let mut dev: Vec<(f64, f64)> = atoms.iter().map(|&(x, m)| ((x - lm).abs(), m)).collect();
    dev.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut cum = 0.0;
    for &(d, m) in &dev {
        cum += m;
        if cum > kappa + MASS_SLACK {
            return d;
        }
    }
    0.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdMode {
    ExactTiny,
    HeuristicLb,
}

/// Search effort for the heuristic lower bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Kuratowski and projection observables tried.
    pub functions: usize,
    /// Single-value moves of the local search.
    pub local_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { functions: 2000, local_steps: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ODEstimate {
    pub kappa: f64,
    pub value: f64,
    pub mode: OdMode,
    pub witness: LipFunction,
    pub budget: Budget,
    /// Orderings (exact) or observables (heuristic) examined.
    pub evaluated: usize,
}

fn check_kappa(kappa: f64) -> Result<(), InvariantError> {
    if kappa > 0.0 && kappa < 1.0 {
        Ok(())
    } else {
        Err(InvariantError::BadKappa(kappa))
    }
}

/// OD(X; −κ) = sup over 1-Lipschitz f of PD(f_* m; 1 − κ).
pub fn observable_diameter(
    x: &FiniteMMSpace,
    kappa: f64,
    mode: OdMode,
    budget: Budget,
    seed: u64,
) -> Result<ODEstimate, InvariantError> {
    check_kappa(kappa)?;
    match mode {
        OdMode::ExactTiny => {
            if x.len() > EXACT_MAX_POINTS {
                return Err(InvariantError::TooLarge { n: x.len(), max: EXACT_MAX_POINTS });
            }
            let (value, values, evaluated) = od_exact(x, kappa)?;
            Ok(ODEstimate { kappa, value, mode, witness: LipFunction::lip1(x, values)?, budget, evaluated })
        }
        OdMode::HeuristicLb => {
            let (value, values, evaluated) = od_heuristic(x, kappa, budget, seed);
            Ok(ODEstimate { kappa, value, mode, witness: LipFunction::lip1(x, values)?, budget, evaluated })
        }
    }
}

/// Exact for tiny spaces, heuristic lower bound otherwise.
pub fn od_auto(x: &FiniteMMSpace, kappa: f64, budget: Budget, seed: u64) -> Result<ODEstimate, InvariantError> {
    let mode = if x.len() <= EXACT_MAX_POINTS { OdMode::ExactTiny } else { OdMode::HeuristicLb };
    observable_diameter(x, kappa, mode, budget, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyRadius {
    pub kappa: f64,
    pub value: f64,
    pub mode: OdMode,
    pub witness: Vec<f64>,
}

/// LR(X; −κ); exact for tiny spaces, lower bound otherwise.
pub fn levy_radius(x: &FiniteMMSpace, kappa: f64, budget: Budget, seed: u64) -> Result<LevyRadius, InvariantError> {
    check_kappa(kappa)?;
    if x.len() <= EXACT_MAX_POINTS {
        let (value, witness) = levy_radius_exact(x, kappa)?;
        Ok(LevyRadius { kappa, value, mode: OdMode::ExactTiny, witness })
    } else {
        let (value, witness) = levy_radius_heuristic(x, kappa, budget, seed);
        Ok(LevyRadius { kappa, value, mode: OdMode::HeuristicLb, witness })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcEstimate {
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

/// α_X(r) = sup over m(A) ≥ ½ of 1 − m(U_r(A)), U_r open.
pub fn concentration_function(x: &FiniteMMSpace, r: f64) -> ConcEstimate {
    let n = x.len();
    let w = x.weight();
    if n <= SUBSET_MAX_POINTS {
        let near: Vec<u32> = (0..n)
            .map(|i| (0..n).filter(|&j| x.d(i, j) < r).fold(0u32, |m, j| m | (1 << j)))
            .collect();
        let mut mass = vec![0.0f64; 1 << n];
        let mut best = 0.0f64;
        for a in 1u32..(1 << n) {
            let low = a.trailing_zeros() as usize;
            mass[a as usize] = mass[(a & (a - 1)) as usize] + w[low];
            if mass[a as usize] < 0.5 - MASS_SLACK {
                continue;
            }
            let covered: f64 = (0..n).filter(|&i| near[i] & a != 0).map(|i| w[i]).sum();
            best = best.max(1.0 - covered);
        }
        let v = best.max(0.0);
        return ConcEstimate { r, lower: v, upper: v, exact: true };
    }
    // Lower bound: half-mass balls around each centre.
    let mut lower = 0.0f64;
    for c in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x.d(c, a).total_cmp(&x.d(c, b)));
        let mut m = 0.0;
        let mut set = Vec::new();
        for &i in &order {
            set.push(i);
            m += w[i];
            if m >= 0.5 - MASS_SLACK {
                break;
            }
        }
        let covered: f64 = (0..n).filter(|&i| set.iter().any(|&a| x.d(i, a) < r)).map(|i| w[i]).sum();
        lower = lower.max(1.0 - covered);
    }
    let min_ball = (0..n)
        .map(|c| (0..n).filter(|&i| x.d(c, i) < r).map(|i| w[i]).sum::<f64>())
        .fold(1.0f64, f64::min);
    let upper = (1.0 - min_ball).min(0.5).max(lower);
    ConcEstimate { r, lower: lower.max(0.0), upper, exact: false }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaDistance {
    pub kappa: f64,
    pub value: f64,
    pub b1: Vec<usize>,
    pub b2: Vec<usize>,
    pub exact: bool,
}

/// d_+(A_1, A_2; +κ): the largest d(B_1, B_2) over B_i ⊂ A_i with
/// m(B_i) ≥ κ; 0 when either A_i has mass below κ.
pub fn kappa_distance(x: &FiniteMMSpace, a1: &[usize], a2: &[usize], kappa: f64) -> KappaDistance {
    let w = x.weight();
    let mass = |s: &[usize]| s.iter().map(|&i| w[i]).sum::<f64>();
    let zero = KappaDistance { kappa, value: 0.0, b1: vec![], b2: vec![], exact: true };
    if mass(a1) < kappa - MASS_SLACK || mass(a2) < kappa - MASS_SLACK {
        return zero;
    }
    // Best B_2 given the distances of A_2's points to B_1.
    let best_b2 = |dmin: &[f64]| -> (f64, Vec<usize>) {
        let mut order: Vec<usize> = (0..a2.len()).collect();
        order.sort_by(|&p, &q| dmin[q].total_cmp(&dmin[p]));
        let mut m = 0.0;
        let mut b2 = Vec::new();
        for &k in &order {
            b2.push(a2[k]);
            m += w[a2[k]];
            if m >= kappa - MASS_SLACK {
                return (dmin[k], b2);
            }
        }
        (0.0, b2)
    };
    if a1.len() <= SUBSET_MAX_POINTS {
        let n1 = a1.len();
        let mut dmin = vec![f64::INFINITY; (1 << n1) * a2.len()];
        let mut m1 = vec![0.0f64; 1 << n1];
        let mut best = (-1.0f64, 0u32, Vec::new());
        for s in 1u32..(1 << n1) {
            let low = s.trailing_zeros() as usize;
            let prev = (s & (s - 1)) as usize;
            m1[s as usize] = m1[prev] + w[a1[low]];
            for (k, &y) in a2.iter().enumerate() {
                dmin[s as usize * a2.len() + k] = dmin[prev * a2.len() + k].min(x.d(a1[low], y));
            }
            if m1[s as usize] < kappa - MASS_SLACK {
                continue;
            }
            let (v, b2) = best_b2(&dmin[s as usize * a2.len()..(s as usize + 1) * a2.len()]);
            if v > best.0 {
                best = (v, s, b2);
            }
        }
        let b1 = (0..n1).filter(|&k| best.1 & (1 << k) != 0).map(|k| a1[k]).collect();
        return KappaDistance { kappa, value: best.0.max(0.0), b1, b2: best.2, exact: true };
    }
    // Greedy: B_1 = κ-mass of A_1 nearest to a centre in A_1.
    let mut best = (-1.0f64, Vec::new(), Vec::new());
    let step = (a1.len() / 64).max(1);
    for &c in a1.iter().step_by(step) {
        let mut order = a1.to_vec();
        order.sort_by(|&p, &q| x.d(c, p).total_cmp(&x.d(c, q)));
        let mut m = 0.0;
        let mut b1 = Vec::new();
        for &i in &order {
            b1.push(i);
            m += w[i];
            if m >= kappa - MASS_SLACK {
                break;
            }
        }
        let dmin: Vec<f64> = a2.iter().map(|&y| b1.iter().map(|&b| x.d(b, y)).fold(f64::INFINITY, f64::min)).collect();
        let (v, b2) = best_b2(&dmin);
        if v > best.0 {
            best = (v, b1, b2);
        }
    }
    KappaDistance { kappa, value: best.0.max(0.0), b1: best.1, b2: best.2, exact: false }
}
