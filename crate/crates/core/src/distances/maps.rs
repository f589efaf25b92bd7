//! Point maps between finite spaces: ε-mm-isomorphism search, additive
//! Lipschitz errors with nonexceptional domains, and McShane repair.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::flow::FlowNet;
use super::prokhorov::prokhorov;
use super::DistanceError;
use crate::rng::substream;
use crate::space::{DistMatrix, FiniteMMSpace};

/// Largest source handled by exhaustive domain enumeration.
pub const LIP_EXACT_MAX_POINTS: usize = 16;
const ISO_EXACT_DOMAIN: usize = 12;
const EXHAUSTIVE_MAPS: usize = 4096;
const VIOLATION_TOL: f64 = 1e-12;

pub fn pushforward_weights(weights: &[f64], map: &[usize], target: usize) -> Result<Vec<f64>, DistanceError> {
    let mut out = vec![0.0; target];
    for (&w, &y) in weights.iter().zip(map) {
        *out.get_mut(y).ok_or(DistanceError::BadMap(y))? += w;
    }
    Ok(out)
}

fn check_map(x: &FiniteMMSpace, map: &[usize], target: usize) -> Result<(), DistanceError> {
    if map.len() != x.len() {
        return Err(DistanceError::HostMismatch { expected: x.len(), got: map.len() });
    }
    match map.iter().find(|&&y| y >= target) {
        Some(&y) => Err(DistanceError::BadMap(y)),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmIso {
    pub epsilon: f64,
    pub map: Vec<usize>,
    pub domain: Vec<usize>,
    pub prok: f64,
    pub discrepancy: f64,
    pub deficit: f64,
}

/// Best domain for a fixed map: minimizes max(1 − m(X_0), discrepancy).
fn iso_domain(x: &FiniteMMSpace, y: &FiniteMMSpace, map: &[usize]) -> (Vec<usize>, f64, f64) {
    let n = x.len();
    let w = x.weight();
    let disc = |i: usize, j: usize| (x.d(i, j) - y.d(map[i], map[j])).abs();
    if n <= ISO_EXACT_DOMAIN {
        let full = 1usize << n;
        let mut md = vec![0.0f64; full];
        let mut mass = vec![0.0f64; full];
        let mut best = (1.0f64, 0usize);
        for s in 1..full {
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            mass[s] = mass[rest] + w[low];
            let mut m = md[rest];
            let mut r = rest;
            while r != 0 {
                m = m.max(disc(low, r.trailing_zeros() as usize));
                r &= r - 1;
            }
            md[s] = m;
            let v = m.max(1.0 - mass[s]);
            if v < best.0 {
                best = (v, s);
            }
        }
        let dom: Vec<usize> = (0..n).filter(|&i| best.1 & (1 << i) != 0).collect();
        let s = best.1;
        return (dom, md[s], (1.0 - mass[s]).max(0.0));
    }
    // Greedy: drop the point with the largest total discrepancy.
    let mut alive = vec![true; n];
    let mut mass = 1.0;
    let score = |alive: &[bool]| {
        let mut m = 0.0f64;
        for i in (0..n).filter(|&i| alive[i]) {
            for j in (i + 1..n).filter(|&j| alive[j]) {
                m = m.max(disc(i, j));
            }
        }
        m
    };
    let mut best = (score(&alive).max(0.0), alive.clone(), 0.0);
    for _ in 1..n {
        let worst = (0..n)
            .filter(|&i| alive[i])
            .max_by(|&a, &b| {
                let sa: f64 = (0..n).filter(|&j| alive[j]).map(|j| disc(a, j)).sum();
                let sb: f64 = (0..n).filter(|&j| alive[j]).map(|j| disc(b, j)).sum();
                sa.total_cmp(&sb).then(b.cmp(&a))
            })
            .expect("nonempty");
        alive[worst] = false;
        mass -= w[worst];
        let m = score(&alive);
        let v = m.max(1.0 - mass);
        if v < best.0.max(best.2) {
            best = (m, alive.clone(), (1.0 - mass).max(0.0));
        }
    }
    let dom = (0..n).filter(|&i| best.1[i]).collect();
    (dom, best.0, best.2)
}

fn evaluate(x: &FiniteMMSpace, y: &FiniteMMSpace, map: &[usize]) -> Result<MmIso, DistanceError> {
    let push = pushforward_weights(x.weight(), map, y.len())?;
    let prok = prokhorov(y.dist(), &push, y.weight(), 1.0)?.value;
    let (domain, discrepancy, deficit) = iso_domain(x, y, map);
    Ok(MmIso { epsilon: prok.max(discrepancy).max(deficit), map: map.to_vec(), domain, prok, discrepancy, deficit })
}

/// Searches maps X → Y minimizing the ε of the ε-mm-isomorphism
/// conditions. Exhaustive when |Y|^|X| is small, otherwise a greedy
/// mass-matching start improved by random single-point reassignments.
pub fn epsilon_mm_iso_search(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    iterations: usize,
    seed: u64,
) -> Result<MmIso, DistanceError> {
    let (nx, ny) = (x.len(), y.len());
    let total = (ny as f64).powi(nx as i32);
    if total <= EXHAUSTIVE_MAPS as f64 {
        let mut best: Option<MmIso> = None;
        let mut map = vec![0usize; nx];
        for code in 0..total as usize {
            let mut c = code;
            for m in map.iter_mut() {
                *m = c % ny;
                c /= ny;
            }
            let e = evaluate(x, y, &map)?;
            if best.as_ref().is_none_or(|b| e.epsilon < b.epsilon) {
                best = Some(e);
            }
        }
        return Ok(best.expect("at least one map"));
    }
    // Greedy: heaviest source points to the target with most unused mass.
    let mut order: Vec<usize> = (0..nx).collect();
    order.sort_by(|&a, &b| x.weight()[b].total_cmp(&x.weight()[a]).then(a.cmp(&b)));
    let mut remaining = y.weight().to_vec();
    let mut map = vec![0usize; nx];
    for &i in &order {
        let t = (0..ny).max_by(|&a, &b| remaining[a].total_cmp(&remaining[b]).then(b.cmp(&a))).expect("target");
        map[i] = t;
        remaining[t] -= x.weight()[i];
    }
    let mut best = evaluate(x, y, &map)?;
    let mut rng = substream(seed, 0);
    for _ in 0..iterations {
        let i = rng.random_range(0..nx);
        let t = rng.random_range(0..ny);
        if best.map[i] == t {
            continue;
        }
        let mut cand = best.map.clone();
        cand[i] = t;
        let e = evaluate(x, y, &cand)?;
        if e.epsilon <= best.epsilon {
            best = e;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipUpTo {
    /// Smallest grid value admitting a domain; None if none does.
    pub epsilon: Option<f64>,
    pub domain: Vec<usize>,
    /// False when the domain came from greedy removal.
    pub exact: bool,
}

/// A domain of mass ≥ 1 − ε on which d_Y(p x, p x') ≤ d_X(x, x') + ε,
/// if one is found. The flag tells whether the search was exact.
pub fn lip_up_to_at(
    x: &FiniteMMSpace,
    y: &DistMatrix,
    map: &[usize],
    eps: f64,
) -> Result<(Option<Vec<usize>>, bool), DistanceError> {
    check_map(x, map, y.n())?;
    let n = x.len();
    let w = x.weight();
    let conflict = |i: usize, j: usize| y.get(map[i], map[j]) > x.d(i, j) + eps + VIOLATION_TOL;
    let need = 1.0 - eps - VIOLATION_TOL;
    let mut image: Vec<usize> = map.to_vec();
    image.sort_unstable();
    image.dedup();
    let (domain, exact) = if image.len() <= 1 {
        ((0..n).collect::<Vec<_>>(), true)
    } else if n <= LIP_EXACT_MAX_POINTS {
        let conf: Vec<u32> =
            (0..n).map(|i| (0..n).filter(|&j| j != i && conflict(i, j)).fold(0u32, |m, j| m | (1 << j))).collect();
        let full = 1usize << n;
        let mut ok = vec![true; full];
        let mut mass = vec![0.0f64; full];
        let mut best = (0.0f64, 0usize);
        for s in 1..full {
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            ok[s] = ok[rest] && (conf[low] as usize & rest) == 0;
            mass[s] = mass[rest] + w[low];
            if ok[s] && mass[s] > best.0 {
                best = (mass[s], s);
            }
        }
        ((0..n).filter(|&i| best.1 & (1 << i) != 0).collect(), true)
    } else if image.len() == 2 {
        (bipartite_domain(x, map, image[0], &conflict), true)
    } else {
        (greedy_domain(x, &conflict), false)
    };
    let mass: f64 = domain.iter().map(|&i| w[i]).sum();
    Ok((if mass >= need { Some(domain) } else { None }, exact))
}

/// Conflicts only join points with different images, so the conflict
/// graph is bipartite and a heaviest independent set is the complement
/// of a minimum vertex cover, read off a minimum cut.
fn bipartite_domain(x: &FiniteMMSpace, map: &[usize], left: usize, conflict: &impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let n = x.len();
    let w = x.weight();
    let (s, t) = (n, n + 1);
    let mut g = FlowNet::new(n + 2);
    let lefts: Vec<usize> = (0..n).filter(|&i| map[i] == left).collect();
    let rights: Vec<usize> = (0..n).filter(|&i| map[i] != left).collect();
    let mut any = false;
    for &i in &lefts {
        for &j in &rights {
            if conflict(i, j) {
                g.add_edge(i, j, f64::INFINITY);
                any = true;
            }
        }
    }
    if !any {
        return (0..n).collect();
    }
    for &i in &lefts {
        g.add_edge(s, i, w[i]);
    }
    for &j in &rights {
        g.add_edge(j, t, w[j]);
    }
    g.max_flow(s, t);
    let reach = g.reachable(s);
    (0..n).filter(|&i| if map[i] == left { reach[i] } else { !reach[i] }).collect()
}

/// Removes the point with most remaining conflicts until none are left.
fn greedy_domain(x: &FiniteMMSpace, conflict: &impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let n = x.len();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i && conflict(i, j)).collect()).collect();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; n];
    while let Some(v) = (0..n).filter(|&i| alive[i] && deg[i] > 0).max_by(|&a, &b| deg[a].cmp(&deg[b]).then(b.cmp(&a))) {
        alive[v] = false;
        for &u in &adj[v] {
            if alive[u] {
                deg[u] -= 1;
            }
        }
    }
    (0..n).filter(|&i| alive[i]).collect()
}

/// Smallest value of a grid at which p is 1-Lipschitz up to that value.
pub fn lip_up_to_eps(x: &FiniteMMSpace, y: &DistMatrix, map: &[usize], grid: &[f64]) -> Result<LipUpTo, DistanceError> {
    check_map(x, map, y.n())?;
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let (mut lo, mut hi) = (0usize, grid.len());
    let mut found: Option<(f64, Vec<usize>, bool)> = None;
    let mut all_exact = true;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (dom, exact) = lip_up_to_at(x, y, map, grid[mid])?;
        all_exact &= exact;
        match dom {
            Some(d) => {
                found = Some((grid[mid], d, exact));
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok(match found {
        Some((e, domain, _)) => LipUpTo { epsilon: Some(e), domain, exact: all_exact },
        None => LipUpTo { epsilon: None, domain: Vec::new(), exact: all_exact },
    })
}

/// f̃(x) = min over the domain of f(a) + d(a, x): 1-Lipschitz, and within
/// ε of f on a domain where f is 1-Lipschitz up to ε.
pub fn mcshane_repair(x: &FiniteMMSpace, f: &[f64], domain: &[usize]) -> Vec<f64> {
    (0..x.len())
        .map(|i| domain.iter().map(|&a| f[a] + x.d(a, i)).fold(f64::INFINITY, f64::min))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(d: f64) -> FiniteMMSpace {
        FiniteMMSpace::uniform(vec![vec![0.0, d], vec![d, 0.0]]).unwrap()
    }

    #[test]
    fn iso_examples() {
        let x = two(1.0);
        let e = epsilon_mm_iso_search(&x, &x, 10, 0).unwrap();
        assert_eq!(e.epsilon, 0.0);
        let e = epsilon_mm_iso_search(&x, &two(1.2), 10, 0).unwrap();
        assert!((e.epsilon - 0.2).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn lip_examples() {
        let x = two(1.0);
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        assert_eq!(lip_up_to_eps(&x, x.dist(), &[0, 1], &grid).unwrap().epsilon, Some(0.0));
        let one = FiniteMMSpace::one_point();
        assert_eq!(lip_up_to_eps(&x, one.dist(), &[0, 0], &grid).unwrap().epsilon, Some(0.0));
        // Stretching by 3 needs ε = ½: one point must go.
        let far = two(3.0);
        let r = lip_up_to_eps(&x, far.dist(), &[0, 1], &grid).unwrap();
        assert_eq!(r.epsilon, Some(0.5));
    }

    #[test]
    fn bipartite_matches_enumeration() {
        // 20 points on a line mapped to two targets 2 apart; compare the
        // min-cut domain with a brute-force check at several ε.
        let n = 20;
        let pos: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 2.0 + i as f64 * 0.05).collect();
        let d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (pos[i] - pos[j]).abs()).collect()).collect();
        let x = FiniteMMSpace::uniform(d).unwrap();
        let y = two(2.0);
        let map: Vec<usize> = (0..n).map(|i| usize::from(pos[i] > 0.3)).collect();
        for eps in [0.0, 0.2, 0.5, 0.9] {
            let (dom, exact) = lip_up_to_at(&x, y.dist(), &map, eps).unwrap();
            assert!(exact);
            if let Some(dom) = dom {
                for &i in &dom {
                    for &j in &dom {
                        assert!(y.d(map[i], map[j]) <= x.d(i, j) + eps + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn repair_is_close_in_ky_fan() {
        let x = FiniteMMSpace::uniform(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        let f = [0.0, 1.2, 5.0];
        let g = mcshane_repair(&x, &f, &[0, 1]);
        assert!(crate::space::lipschitz_violation(x.dist(), &g, 1.0).is_none());
        assert!(super::super::ky_fan_weighted(x.weight(), &f, &g) <= 1.0 / 3.0 + 1e-12);
    }
}
