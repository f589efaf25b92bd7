//! Isotone defect tables I(x) = F(x) − inf_{y ≥ x} F(y) and the
//! five-condition classification of function sequences.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Expr, MPFDescriptor, MpfError};
use crate::optim::box_golden_min_iters;

const MAX_CELLS: usize = 40_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub arity: usize,
    /// Table covers [0, d_bound]^N.
    pub d_bound: f64,
    pub h: f64,
    /// Infima are taken over [x, probe_bound]^N.
    pub probe_bound: f64,
    /// Grid coordinates along each axis of the table.
    pub axis: Vec<f64>,
    /// Row-major over `axis`^N, first coordinate slowest.
    pub table: Vec<f64>,
    pub sup_defect: f64,
    pub argmax: Vec<f64>,
}

impl DefectReport {
    fn index_of(&self, x: &[f64]) -> Option<usize> {
        let m = self.axis.len();
        let mut idx = 0;
        for &v in x {
            let k = self.axis.partition_point(|&a| a < v - 1e-9);
            if k >= m || (self.axis[k] - v).abs() > 1e-9 {
                return None;
            }
            idx = idx * m + k;
        }
        Some(idx)
    }

    /// Defect at an exact grid point.
    pub fn at(&self, x: &[f64]) -> Option<f64> {
        self.index_of(x).map(|i| self.table[i])
    }

    /// Largest defect over grid points with every coordinate ≤ bound.
    pub fn sup_within(&self, bound: f64) -> (f64, Vec<f64>) {
        let m = self.axis.len();
        let keep = self.axis.partition_point(|&a| a <= bound + 1e-12);
        let mut best = (0.0, vec![0.0; self.arity]);
        for (idx, &v) in self.table.iter().enumerate() {
            let coords = unravel(idx, m, self.arity);
            if coords.iter().all(|&c| c < keep) && v > best.0 {
                best = (v, coords.iter().map(|&c| self.axis[c]).collect());
            }
        }
        best
    }
}

fn unravel(mut idx: usize, m: usize, n: usize) -> Vec<usize> {
    let mut c = vec![0; n];
    for i in (0..n).rev() {
        c[i] = idx % m;
        idx /= m;
    }
    c
}

fn axis(bound: f64, h: f64) -> Vec<f64> {
    let k = (bound / h + 1e-9).floor() as usize;
    let mut a: Vec<f64> = (0..=k).map(|i| i as f64 * h).collect();
    if bound - a[k] > 1e-9 {
        a.push(bound);
    }
    a
}

/// Defect table of F on the grid {0, h, …, D}^N with infima over the grid
/// up to `probe`, each refined by golden-section descent around the grid
/// minimizer. Entries are clamped at 0.
pub fn defect_table(f: &MPFDescriptor, d: f64, h: f64, probe: f64) -> Result<DefectReport, MpfError> {
    if !(h > 0.0 && h <= d) || !(probe >= d) {
        return Err(MpfError::Invalid("defect table needs 0 < h ≤ D ≤ probe".into()));
    }
    if let Expr::SplitSum { parts } = f.expr() {
        if parts.len() > 1 {
            return split_defect_table(parts, d, h, probe);
        }
    }
    let n = f.arity();
    let full = axis(probe, h);
    let m = full.len();
    let cells = m.checked_pow(n as u32).filter(|&c| c <= MAX_CELLS).ok_or(MpfError::GridTooLarge(usize::MAX))?;
    let values: Vec<f64> = (0..cells)
        .into_par_iter()
        .with_min_len(4096)
        .map(|idx| {
            let x: Vec<f64> = unravel(idx, m, n).into_iter().map(|c| full[c]).collect();
            f.eval_unchecked(&x)
        })
        .collect();

    // Orthant suffix minimum, one axis at a time; ties keep the lower index.
    let mut best: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
    let mut stride = 1;
    for _ in 0..n {
        for idx in (0..cells).rev() {
            if (idx / stride) % m + 1 < m {
                let nb = best[idx + stride];
                if nb.0 < best[idx].0 {
                    best[idx] = nb;
                }
            }
        }
        stride *= m;
    }

    let keep = full.partition_point(|&a| a <= d + 1e-12);
    let tab_axis = full[..keep].to_vec();
    let table_cells = keep.pow(n as u32);
    let coords_of = |tidx: usize| -> Vec<usize> { unravel(tidx, keep, n) };
    let full_index = |c: &[usize]| c.iter().fold(0, |acc, &ci| acc * m + ci);

    let refine = |arg: &[usize], lower: &[usize], sweeps: usize, iters: usize| -> f64 {
        let start: Vec<f64> = arg.iter().map(|&c| full[c]).collect();
        let lo: Vec<f64> = arg.iter().zip(lower).map(|(&c, &l)| full[c.saturating_sub(1).max(l)]).collect();
        let hi: Vec<f64> = arg.iter().map(|&c| full[(c + 1).min(m - 1)]).collect();
        box_golden_min_iters(|x| f.eval_unchecked(x), &lo, &hi, &start, sweeps, iters).1
    };

    // Refined infima for argmins away from the querying cell's lower
    // corner are shared between cells.
    let mut shared: Vec<usize> = (0..table_cells)
        .map(|t| full_index(&coords_of(t)))
        .filter(|&fi| best[fi].1 != fi)
        .map(|fi| best[fi].1)
        .collect();
    shared.sort_unstable();
    shared.dedup();
    let cache: BTreeMap<usize, f64> = shared
        .par_iter()
        .map(|&a| {
            let ac = unravel(a, m, n);
            let lower: Vec<usize> = ac.iter().map(|&c| c.saturating_sub(1)).collect();
            (a, refine(&ac, &lower, 2, 40))
        })
        .collect();

    let table: Vec<f64> = (0..table_cells)
        .into_par_iter()
        .with_min_len(1024)
        .map(|t| {
            let c = coords_of(t);
            let fi = full_index(&c);
            let (grid_inf, arg) = best[fi];
            if arg == fi {
                // Cheap look into the cell above the corner for dips
                // between grid points.
                let refined = refine(&c, &c, 1, 16);
                return (values[fi] - grid_inf.min(refined)).max(0.0);
            }
            let ac = unravel(arg, m, n);
            let near = ac.iter().zip(&c).any(|(&a, &l)| a.saturating_sub(1) < l);
            let r = if near { refine(&ac, &c, 2, 40) } else { cache[&arg] };
            (values[fi] - grid_inf.min(r)).max(0.0)
        })
        .collect();

    let (mut sup, mut arg) = (0.0, 0);
    for (i, &v) in table.iter().enumerate() {
        if v > sup {
            sup = v;
            arg = i;
        }
    }
    Ok(DefectReport {
        arity: n,
        d_bound: d,
        h,
        probe_bound: probe,
        argmax: coords_of(arg).into_iter().map(|c| tab_axis[c]).collect(),
        axis: tab_axis,
        table,
        sup_defect: sup,
    })
}

/// F(x) = Σ f_i(x_i) has inf over the orthant above x equal to
/// Σ inf_{y_i ≥ x_i} f_i(y_i), so its defect is the sum of the
/// one-dimensional defects.
fn split_defect_table(parts: &[Expr], d: f64, h: f64, probe: f64) -> Result<DefectReport, MpfError> {
    let n = parts.len();
    let unary = parts
        .iter()
        .map(|p| defect_table(&MPFDescriptor::unary(p.clone())?, d, h, probe))
        .collect::<Result<Vec<_>, MpfError>>()?;
    let tab_axis = unary[0].axis.clone();
    let m = tab_axis.len();
    let cells = m.checked_pow(n as u32).filter(|&c| c <= MAX_CELLS).ok_or(MpfError::GridTooLarge(usize::MAX))?;
    let table: Vec<f64> = (0..cells)
        .into_par_iter()
        .with_min_len(4096)
        .map(|idx| unravel(idx, m, n).iter().zip(&unary).map(|(&c, u)| u.table[c]).sum())
        .collect();
    // The sum is largest where every part is.
    let argmax = unary.iter().map(|u| u.argmax[0]).collect();
    let sup_defect = unary.iter().map(|u| u.sup_defect).sum();
    Ok(DefectReport { arity: n, d_bound: d, h, probe_bound: probe, axis: tab_axis, table, sup_defect, argmax })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    IsotoneAll,
    SupDefectVanishes,
    BoundedSupDefectVanishes,
    PointwiseDefectVanishes,
    LimitIsotone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub holds: bool,
    /// (n, measured value, location) per tested n; n = 0 for the limit.
    pub evidence: Vec<(u64, f64, Vec<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceVerdict {
    /// Conditions (1)…(5) in order.
    pub conditions: Vec<ConditionResult>,
    /// Threshold below which a last-index value counts as vanished.
    pub tau: f64,
    /// (n, sup |F_n − F| on the grid of [0, max D]^N).
    pub uniform_gap: Vec<(u64, f64)>,
    pub converges_to_limit: bool,
}

impl SequenceVerdict {
    pub fn holds(&self, k: usize) -> bool {
        self.conditions[k - 1].holds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    pub d_list: Vec<f64>,
    pub n_list: Vec<u64>,
    pub h: f64,
    pub probe: f64,
    /// Vanishing threshold; default max(1e-6, n_last^{-1/2}).
    pub tau: Option<f64>,
    /// A sup defect at most this counts as isotone.
    pub isotone_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            d_list: vec![4.0, 8.0],
            n_list: vec![1, 2, 4, 8, 16],
            h: 1.0 / 64.0,
            probe: 8.0,
            tau: None,
            isotone_tol: 1e-9,
        }
    }
}

/// Tests the five conditions on a finite index list. Limits are judged by
/// the value at the last index against `tau`; every finite-grid sup over a
/// larger domain dominates the one over a smaller domain, so the chain
/// (1)⇒(2)⇒(3)⇒(4) holds by construction and (4)⇒(5) is checked.
pub fn classify_sequence(
    family: &(dyn Fn(u64) -> MPFDescriptor + Sync),
    limit: &MPFDescriptor,
    cfg: &ClassifyConfig,
) -> Result<SequenceVerdict, MpfError> {
    if cfg.n_list.is_empty() || cfg.d_list.is_empty() || cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MpfError::Invalid("n_list must be nonempty and ascending; d_list nonempty".into()));
    }
    let d_max = cfg.d_list.iter().copied().fold(0.0, f64::max);
    if !(cfg.probe >= d_max) {
        return Err(MpfError::Invalid("probe must be at least max(D)".into()));
    }
    let n_last = *cfg.n_list.last().unwrap();
    let tau = cfg.tau.unwrap_or_else(|| (1.0 / (n_last as f64).sqrt()).max(1e-6));
    let arity = limit.arity();

    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    let mut c3 = Vec::new();
    let mut c4 = Vec::new();
    let mut gaps = Vec::new();
    for &n in &cfg.n_list {
        let fnn = family(n);
        if fnn.arity() != arity {
            return Err(MpfError::InconsistentArity);
        }
        let d2 = d_max.max(n as f64 + 8.0);
        let rep = defect_table(&fnn, d2, cfg.h, cfg.probe.max(d2))?;
        c1.push((n, rep.sup_defect, rep.argmax.clone()));
        c2.push((n, rep.sup_defect, rep.argmax.clone()));
        let (v3, x3) = cfg
            .d_list
            .iter()
            .map(|&d| rep.sup_within(d))
            .fold((0.0, vec![0.0; arity]), |acc, v| if v.0 > acc.0 { v } else { acc });
        c3.push((n, v3, x3.clone()));
        c4.push((n, v3, x3));
        gaps.push((n, uniform_gap(&fnn, limit, d_max, cfg.h)));
    }
    let lim = defect_table(limit, d_max, cfg.h, cfg.probe.max(d_max))?;
    let c5 = vec![(0, lim.sup_defect, lim.argmax.clone())];

    let last = |e: &Vec<(u64, f64, Vec<f64>)>| e.last().unwrap().1;
    let holds1 = c1.iter().all(|e| e.1 <= cfg.isotone_tol);
    let holds2 = last(&c2) <= tau;
    let holds3 = last(&c3) <= tau;
    let holds4 = holds3;
    let holds5 = lim.sup_defect <= cfg.isotone_tol;
    let verdict = SequenceVerdict {
        conditions: vec![
            ConditionResult { condition: Condition::IsotoneAll, holds: holds1, evidence: c1 },
            ConditionResult { condition: Condition::SupDefectVanishes, holds: holds2, evidence: c2 },
            ConditionResult { condition: Condition::BoundedSupDefectVanishes, holds: holds3, evidence: c3 },
            ConditionResult { condition: Condition::PointwiseDefectVanishes, holds: holds4, evidence: c4 },
            ConditionResult { condition: Condition::LimitIsotone, holds: holds5, evidence: c5 },
        ],
        tau,
        converges_to_limit: gaps.last().unwrap().1 <= tau,
        uniform_gap: gaps,
    };
    for k in 1..5 {
        if verdict.holds(k) && !verdict.holds(k + 1) {
            return Err(MpfError::ChainViolated(format!("condition ({k}) holds but ({}) fails", k + 1)));
        }
    }
    Ok(verdict)
}

fn uniform_gap(f: &MPFDescriptor, g: &MPFDescriptor, d: f64, h: f64) -> f64 {
    let ax = axis(d, h);
    let m = ax.len();
    let n = f.arity();
    let cells = m.pow(n as u32);
    (0..cells)
        .into_par_iter()
        .with_min_len(4096)
        .map(|idx| {
            let x: Vec<f64> = unravel(idx, m, n).into_iter().map(|c| ax[c]).collect();
            (f.eval_unchecked(&x) - g.eval_unchecked(&x)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::builtins::*;
    use super::super::{combine, CombineKind};
    use super::*;

    #[test]
    fn isotone_has_zero_table() {
        let r = defect_table(&lp(2.0, 2), 3.0, 0.25, 4.0).unwrap();
        assert!(r.table.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn split_sum_family_has_unit_defect_at_two_zero() {
        let r = defect_table(&g_n(3, 5), 4.0, 1.0 / 16.0, 9.0).unwrap();
        assert!((r.at(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_sum_table_matches_generic_path() {
        let f = f_n2(3);
        let split = g_n(2, 3);
        // The same function written as identity ∘ l_1 ∘ (f, f) takes the
        // generic two-dimensional path.
        let generic = combine(CombineKind::Compose, &[identity(), lp(1.0, 2), f.clone(), f]).unwrap();
        let a = defect_table(&split, 4.0, 0.125, 8.0).unwrap();
        let b = defect_table(&generic, 4.0, 0.125, 8.0).unwrap();
        assert_eq!(a.axis, b.axis);
        assert!(a.table.iter().zip(&b.table).all(|(x, y)| (x - y).abs() < 1e-9));
        assert!((a.sup_defect - b.sup_defect).abs() < 1e-9);
    }

    #[test]
    fn unary_family_has_quarter_defect_at_two() {
        let r = defect_table(&f_n1(4), 3.0, 1.0 / 64.0, 3.0).unwrap();
        assert!((r.at(&[2.0]).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn refinement_finds_off_grid_dip() {
        // A narrow valley at 1/3, between grid points of step 1/4.
        let t = MPFDescriptor::unary(super::super::Expr::Table {
            xs: vec![0.0, 0.3, 1.0 / 3.0, 0.36, 2.0],
            ys: vec![0.0, 1.0, 0.5, 1.0, 1.0],
            interp: super::super::Interp::Linear,
        })
        .unwrap();
        let r = defect_table(&t, 1.0, 0.25, 2.0).unwrap();
        assert!(r.at(&[0.25]).unwrap() > 0.3);
    }
}
