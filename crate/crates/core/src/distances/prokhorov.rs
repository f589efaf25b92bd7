//! λ-Prokhorov distance between two measures on one finite metric space.
//!
//! With open neighbourhoods, the condition at ε holds iff the bipartite
//! flow over edges d < ε reaches 1 − λε. That flow is a step function
//! which on (D_k, D_{k+1}] equals F_k, the flow over d ≤ D_k, where D_k
//! are the distinct distances. The infimum is therefore
//! min_k max(D_k, (1 − F_k)/λ), found by bisection over k.

use serde::{Deserialize, Serialize};

use super::flow::FlowNet;
use super::DistanceError;
use crate::space::DistMatrix;

/// Feasibility slack for plans and the brute-force check.
pub const PLAN_TOL: f64 = 1e-12;
/// Slack between the deficiency and the plan's missing mass.
const MASS_TOL: f64 = 1e-9;
/// Largest carrier for the subset-enumeration oracle.
pub const BRUTE_MAX_POINTS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubtransportPlan {
    pub matrix: Vec<Vec<f64>>,
    pub radius: f64,
    pub deficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prokhorov {
    pub lambda: f64,
    pub value: f64,
    pub plan: SubtransportPlan,
}

fn check_measures(d: &DistMatrix, mu: &[f64], nu: &[f64], lambda: f64) -> Result<(), DistanceError> {
    if mu.len() != d.n() || nu.len() != d.n() {
        return Err(DistanceError::HostMismatch { expected: d.n(), got: mu.len().max(nu.len()) });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(DistanceError::BadLambda(lambda));
    }
    for m in [mu, nu] {
        let total: f64 = m.iter().sum();
        if m.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(DistanceError::BadMeasure(total));
        }
    }
    Ok(())
}

/// Distinct pairwise distances in increasing order, 0 included.
pub(crate) fn distinct_distances(d: &DistMatrix) -> Vec<f64> {
    let n = d.n();
    let mut v: Vec<f64> = vec![0.0];
    for i in 0..n {
        v.extend((i + 1..n).map(|j| d.get(i, j)));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Max flow over edges with d ≤ r, and the flow matrix.
fn closed_flow(d: &DistMatrix, mu: &[f64], nu: &[f64], r: f64) -> (f64, Vec<Vec<f64>>) {
    let n = d.n();
    let (s, t) = (2 * n, 2 * n + 1);
    let mut g = FlowNet::new(2 * n + 2);
    let mut edges = Vec::new();
    for i in 0..n {
        if mu[i] > 0.0 {
            g.add_edge(s, i, mu[i]);
        }
        if nu[i] > 0.0 {
            g.add_edge(n + i, t, nu[i]);
        }
    }
    for i in (0..n).filter(|&i| mu[i] > 0.0) {
        for j in (0..n).filter(|&j| nu[j] > 0.0) {
            if d.get(i, j) <= r {
                edges.push((i, j, g.add_edge(i, n + j, f64::INFINITY)));
            }
        }
    }
    let total = g.max_flow(s, t);
    let mut m = vec![vec![0.0; n]; n];
    for (i, j, e) in edges {
        m[i][j] = g.flow_on(e);
    }
    (total, m)
}

pub fn prokhorov(d: &DistMatrix, mu: &[f64], nu: &[f64], lambda: f64) -> Result<Prokhorov, DistanceError> {
    check_measures(d, mu, nu, lambda)?;
    let dk = distinct_distances(d);
    let score = |k: usize| -> (f64, f64, Vec<Vec<f64>>) {
        let (f, m) = closed_flow(d, mu, nu, dk[k]);
        let def = (1.0 - f).max(0.0);
        (dk[k].max(def / lambda), def, m)
    };
    // First k where D_k ≥ (1 − F_k)/λ; the minimum is there or just before.
    let (mut lo, mut hi) = (0usize, dk.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (f, _) = closed_flow(d, mu, nu, dk[mid]);
        if dk[mid] >= (1.0 - f).max(0.0) / lambda {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut best = score(lo);
    if lo > 0 {
        let prev = score(lo - 1);
        if prev.0 < best.0 {
            best = prev;
        }
    }
    let (value, deficiency, matrix) = best;
    Ok(Prokhorov { lambda, value, plan: SubtransportPlan { matrix, radius: value, deficiency } })
}

/// Checks the plan invariants against the measures: marginals dominated,
/// support within the radius, and deficiency equal to the missing mass.
pub fn plan_is_valid(d: &DistMatrix, mu: &[f64], nu: &[f64], plan: &SubtransportPlan) -> bool {
    let n = d.n();
    let mass: f64 = plan.matrix.iter().flatten().sum();
    let mass_ok = (1.0 - mass - plan.deficiency).abs() <= MASS_TOL;
    let rows_ok = (0..n).all(|i| plan.matrix[i].iter().sum::<f64>() <= mu[i] + PLAN_TOL);
    let cols_ok = (0..n).all(|j| (0..n).map(|i| plan.matrix[i][j]).sum::<f64>() <= nu[j] + PLAN_TOL);
    let supp_ok = (0..n)
        .all(|i| (0..n).all(|j| plan.matrix[i][j] >= 0.0 && (plan.matrix[i][j] == 0.0 || d.get(i, j) <= plan.radius + PLAN_TOL)));
    mass_ok && rows_ok && cols_ok && supp_ok
}

/// Definition-direct value by subset enumeration. For each A the defect
/// ν(A) − μ(U_ε(A)) is a left-continuous step function of ε, so the
/// infimum is a distance D_k or a gap solution (ν(A) − μ(N_{D_k}(A)))/λ,
/// N_r being the closed r-neighbourhood that U_ε equals just above D_k.
pub fn prokhorov_bruteforce(d: &DistMatrix, mu: &[f64], nu: &[f64], lambda: f64) -> Result<f64, DistanceError> {
    check_measures(d, mu, nu, lambda)?;
    let n = d.n();
    if n > BRUTE_MAX_POINTS {
        return Err(DistanceError::TooLarge { n, max: BRUTE_MAX_POINTS });
    }
    let dk = distinct_distances(d);
    // defect[k][A] for closed radius D_k.
    let defects: Vec<Vec<f64>> = dk
        .iter()
        .map(|&r| {
            (0u32..(1 << n))
                .map(|a| {
                    let nu_a: f64 = (0..n).filter(|&i| a & (1 << i) != 0).map(|i| nu[i]).sum();
                    let mu_u: f64 = (0..n)
                        .filter(|&x| (0..n).any(|i| a & (1 << i) != 0 && d.get(x, i) <= r))
                        .map(|x| mu[x])
                        .sum();
                    nu_a - mu_u
                })
                .collect()
        })
        .collect();
    let mut cands: Vec<f64> = dk.clone();
    for row in &defects {
        cands.extend(row.iter().filter(|&&v| v > 0.0).map(|&v| v / lambda));
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    // Condition just above c: closed radius = largest D_k ≤ c.
    for c in cands {
        let k = dk.partition_point(|&r| r <= c) - 1;
        if defects[k].iter().all(|&v| v <= lambda * c + PLAN_TOL) {
            return Ok(c);
        }
    }
    Ok(1.0 / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(dd: f64) -> DistMatrix {
        DistMatrix::from_rows(&[vec![0.0, dd], vec![dd, 0.0]]).unwrap()
    }

    #[test]
    fn spec_examples() {
        let d = two(1.0);
        let p = prokhorov(&d, &[1.0, 0.0], &[0.5, 0.5], 1.0).unwrap();
        assert_eq!(p.value, 0.5);
        assert!(plan_is_valid(&d, &[1.0, 0.0], &[0.5, 0.5], &p.plan));
        assert_eq!(prokhorov(&d, &[1.0, 0.0], &[0.5, 0.5], 2.0).unwrap().value, 0.25);
        assert_eq!(prokhorov(&d, &[0.3, 0.7], &[0.3, 0.7], 1.0).unwrap().value, 0.0);
        assert_eq!(prokhorov_bruteforce(&d, &[1.0, 0.0], &[0.5, 0.5], 1.0).unwrap(), 0.5);
        assert_eq!(prokhorov_bruteforce(&d, &[1.0, 0.0], &[0.5, 0.5], 2.0).unwrap(), 0.25);
    }

    #[test]
    fn plan_carries_the_transported_mass() {
        let d = DistMatrix::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]]).unwrap();
        let (mu, nu) = ([0.2, 0.3, 0.5], [0.5, 0.25, 0.25]);
        let p = prokhorov(&d, &mu, &nu, 1.0).unwrap();
        assert!((p.value - 0.3).abs() < 1e-12);
        for (i, want) in [0.2, 0.25, 0.25].into_iter().enumerate() {
            assert!((p.plan.matrix[i][i] - want).abs() < 1e-12, "{:?}", p.plan.matrix);
        }
        assert!(plan_is_valid(&d, &mu, &nu, &p.plan));
        let empty = SubtransportPlan { matrix: vec![vec![0.0; 3]; 3], ..p.plan };
        assert!(!plan_is_valid(&d, &mu, &nu, &empty));
    }

    #[test]
    fn small_distance_caps_value() {
        // Moving all mass a distance 0.1 costs 0.1.
        let d = two(0.1);
        let p = prokhorov(&d, &[1.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
        assert_eq!(p.value, 0.1);
        assert_eq!(prokhorov_bruteforce(&d, &[1.0, 0.0], &[0.0, 1.0], 1.0).unwrap(), 0.1);
    }
}
