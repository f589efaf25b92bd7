//! Exact observable diameter and Lévy radius for tiny spaces.
//!
//! Every 1-Lipschitz f induces an ordering σ of the points by value. For a
//! fixed ordering the gaps P_k = f(σ_k) − f(σ_0) form a polytope, the
//! partial diameter is a minimum of linear forms over the minimal
//! (1 − κ)-mass windows, and the supremum over that polytope is a linear
//! program. Orderings and their reversals give the same values, so only
//! σ_0 < σ_{n−1} is enumerated.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};

use super::{levy_radius_of, pd_values, InvariantError, MASS_SLACK};
use crate::space::FiniteMMSpace;

/// (value, witness values, orderings solved).
pub fn od_exact(x: &FiniteMMSpace, kappa: f64) -> Result<(f64, Vec<f64>, usize), InvariantError> {
    let n = x.len();
    let w = x.weight();
    let alpha = 1.0 - kappa;
    // Seed with distance-to-point observables.
    let mut best = (0.0f64, vec![0.0; n]);
    for a in 0..n {
        let f: Vec<f64> = (0..n).map(|i| x.d(a, i)).collect();
        let v = pd_values(&f, w, alpha);
        if v > best.0 {
            best = (v, f);
        }
    }
    let mut solved = 0;
    for sigma in orderings(n) {
        let ws: Vec<f64> = sigma.iter().map(|&i| w[i]).collect();
        let windows = minimal_windows(&ws, alpha);
        if windows.iter().any(|&(a, b)| a == b) {
            continue;
        }
        let ub = windows.iter().map(|&(a, b)| x.d(sigma[a], sigma[b])).fold(f64::INFINITY, f64::min);
        if ub <= best.0 {
            continue;
        }
        let (mut p, vars) = ordering_polytope(x, &sigma);
        let t = p.add_var(1.0, (0.0, ub));
        for &(a, b) in &windows {
            let mut e = Terms::new(n);
            e.gap(b, -1.0);
            e.gap(a, 1.0);
            p.add_constraint(e.with_t(&vars, t), ComparisonOp::Le, 0.0);
        }
        solved += 1;
        let sol = p.solve().map_err(|e| InvariantError::Lp(e.to_string()))?;
        if sol.objective() <= best.0 {
            continue;
        }
        let f = witness(x, &sigma, &vars, |v| *sol.var_value(v));
        let v = pd_values(&f, w, alpha);
        if v > best.0 {
            best = (v, f);
        }
    }
    Ok((best.0, best.1, solved))
}

/// LR(X; −κ) with a witness. For each ordering the Lévy mean is linear in
/// the gaps; max(P_j − lm, lm − P_i) per window is split into its two
/// sides, giving 2^W linear programs.
pub fn levy_radius_exact(x: &FiniteMMSpace, kappa: f64) -> Result<(f64, Vec<f64>), InvariantError> {
    let n = x.len();
    let w = x.weight();
    let alpha = 1.0 - kappa;
    let mut best = (0.0f64, vec![0.0; n]);
    for a in 0..n {
        let f: Vec<f64> = (0..n).map(|i| x.d(a, i)).collect();
        let v = levy_radius_of(&f, w, kappa);
        if v > best.0 {
            best = (v, f);
        }
    }
    for sigma in orderings(n) {
        let ws: Vec<f64> = sigma.iter().map(|&i| w[i]).collect();
        let windows = minimal_windows(&ws, alpha);
        if windows.iter().any(|&(a, b)| a == b) {
            continue;
        }
        let (a_med, b_med) = median_indices(&ws);
        // Per window: upper bounds on the right side P_j − lm and the left
        // side lm − P_i.
        let sides: Vec<(f64, f64)> = windows
            .iter()
            .map(|&(i, j)| {
                let right = if j >= a_med { x.d(sigma[a_med], sigma[j]) } else { 0.0 };
                let left = if i <= b_med { x.d(sigma[i], sigma[b_med]) } else { 0.0 };
                (right, left)
            })
            .collect();
        let ub = sides.iter().map(|&(r, l)| r.max(l)).fold(f64::INFINITY, f64::min);
        if ub <= best.0 {
            continue;
        }
        let wn = windows.len();
        for mask in 0u32..(1 << wn) {
            // Bit set: bound t by the right side.
            let mask_ub = (0..wn)
                .map(|k| if mask & (1 << k) != 0 { sides[k].0 } else { sides[k].1 })
                .fold(f64::INFINITY, f64::min);
            if mask_ub <= best.0 {
                continue;
            }
            let (mut p, vars) = ordering_polytope(x, &sigma);
            let t = p.add_var(1.0, (0.0, mask_ub));
            for (k, &(i, j)) in windows.iter().enumerate() {
                let mut e = Terms::new(n);
                // t ≤ P_j − (P_a + P_b)/2  or  t ≤ (P_a + P_b)/2 − P_i
                let s = if mask & (1 << k) != 0 { 1.0 } else { -1.0 };
                e.gap(if s > 0.0 { j } else { i }, -s);
                e.gap(a_med, 0.5 * s);
                e.gap(b_med, 0.5 * s);
                p.add_constraint(e.with_t(&vars, t), ComparisonOp::Le, 0.0);
            }
            let sol = p.solve().map_err(|e| InvariantError::Lp(e.to_string()))?;
            if sol.objective() <= best.0 {
                continue;
            }
            let f = witness(x, &sigma, &vars, |v| *sol.var_value(v));
            let v = levy_radius_of(&f, w, kappa);
            if v > best.0 {
                best = (v, f);
            }
        }
    }
    Ok(best)
}

/// Permutations of 0..n with σ_0 < σ_{n−1} (all of them when n ≤ 1).
fn orderings(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut first = true;
    std::iter::from_fn(move || loop {
        if first {
            first = false;
        } else if !next_permutation(&mut perm) {
            return None;
        }
        if n <= 1 || perm[0] < perm[n - 1] {
            return Some(perm.clone());
        }
    })
}

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

/// For each start a, the shortest window [a, b] of mass ≥ α.
pub(crate) fn minimal_windows(ws: &[f64], alpha: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..ws.len() {
        let mut m = 0.0;
        for (b, &wb) in ws.iter().enumerate().skip(a) {
            m += wb;
            if m >= alpha - MASS_SLACK {
                out.push((a, b));
                break;
            }
        }
    }
    out
}

/// Positions of the lower and upper medians in a sorted order.
pub(crate) fn median_indices(ws: &[f64]) -> (usize, usize) {
    let half = 0.5 - MASS_SLACK;
    let mut cum = 0.0;
    let mut a = ws.len() - 1;
    for (k, &m) in ws.iter().enumerate() {
        cum += m;
        if cum >= half {
            a = k;
            break;
        }
    }
    let mut cum = 0.0;
    let mut b = 0;
    for (k, &m) in ws.iter().enumerate().rev() {
        cum += m;
        if cum >= half {
            b = k;
            break;
        }
    }
    (a, b)
}

/// Gaps P_1..P_{n−1} (P_0 = 0) with monotonicity and 1-Lipschitz rows.
fn ordering_polytope(x: &FiniteMMSpace, sigma: &[usize]) -> (Problem, Vec<Variable>) {
    let n = sigma.len();
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<Variable> = (1..n).map(|k| p.add_var(0.0, (0.0, x.d(sigma[0], sigma[k])))).collect();
    for k in 2..n {
        p.add_constraint([(vars[k - 1], 1.0), (vars[k - 2], -1.0)], ComparisonOp::Ge, 0.0);
    }
    for i in 1..n {
        for j in (i + 1)..n {
            p.add_constraint([(vars[j - 1], 1.0), (vars[i - 1], -1.0)], ComparisonOp::Le, x.d(sigma[i], sigma[j]));
        }
    }
    (p, vars)
}

/// Coefficients per gap index; the LP backend rejects repeated variables.
struct Terms(Vec<f64>);

impl Terms {
    fn new(n: usize) -> Self {
        Terms(vec![0.0; n])
    }

    fn gap(&mut self, k: usize, coef: f64) {
        self.0[k] += coef;
    }

    fn with_t(&self, vars: &[Variable], t: Variable) -> LinearExpr {
        let mut e = LinearExpr::empty();
        e.add(t, 1.0);
        for (k, &c) in self.0.iter().enumerate().skip(1) {
            if c != 0.0 {
                e.add(vars[k - 1], c);
            }
        }
        e
    }
}

/// Values of the LP solution on the original points, scaled down if
/// round-off left it slightly above 1-Lipschitz.
fn witness(x: &FiniteMMSpace, sigma: &[usize], vars: &[Variable], val: impl Fn(Variable) -> f64) -> Vec<f64> {
    let n = sigma.len();
    let mut f = vec![0.0; n];
    for k in 1..n {
        f[sigma[k]] = val(vars[k - 1]).max(0.0);
    }
    let mut ratio = 1.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = x.d(i, j);
            let g = (f[i] - f[j]).abs();
            if g > d {
                ratio = ratio.max(if d > 0.0 { g / d } else { f64::INFINITY });
            }
        }
    }
    if ratio.is_infinite() {
        return vec![0.0; n];
    }
    if ratio > 1.0 {
        f.iter_mut().for_each(|v| *v /= ratio);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orderings_cover_half_the_permutations() {
        assert_eq!(orderings(4).count(), 12);
        assert_eq!(orderings(1).count(), 1);
    }

    #[test]
    fn windows_and_medians() {
        assert_eq!(minimal_windows(&[0.25; 4], 0.5), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(median_indices(&[0.25; 4]), (1, 2));
        assert_eq!(median_indices(&[0.2, 0.6, 0.2]), (1, 1));
    }

    #[test]
    fn path_of_three_points() {
        // Path 0 - 1 - 2 with unit steps, uniform weights.
        let x = FiniteMMSpace::uniform(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let (v, f, _) = od_exact(&x, 0.1).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v} {f:?}");
        let (v, _, _) = od_exact(&x, 0.4).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let (r, _) = levy_radius_exact(&x, 0.1).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }
}
