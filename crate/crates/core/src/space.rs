//! Finite metric measure spaces: a dense distance matrix plus a probability
//! vector, 1-Lipschitz observables and their pushforward distributions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for metric inequalities.
pub const METRIC_TOL: f64 = 1e-9;
/// Absolute tolerance for total mass.
pub const MASS_TOL: f64 = 1e-12;
/// Positions closer than this are merged in a pushforward.
pub const POSITION_TOL: f64 = 1e-12;
/// Default cap on the number of points of a materialized space.
pub const DEFAULT_CAP: usize = 4096;
/// Largest space accepted by the exhaustive isomorphism test.
pub const ISO_MAX_POINTS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("weight {0} is negative")]
    NegativeWeight(usize),
    #[error("weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("malformed space: {0}")]
    Shape(String),
    #[error("entry ({0},{1}) is not a finite nonnegative number")]
    BadEntry(usize, usize),
    #[error("matrix is not symmetric at ({0},{1})")]
    Asymmetric(usize, usize),
    #[error("diagonal entry {0} is nonzero")]
    NonzeroDiagonal(usize),
    #[error("space has {0} points, above the cap of {1}")]
    CapExceeded(usize, usize),
    #[error("function has {got} values but the host space has {expected} points")]
    HostMismatch { expected: usize, got: usize },
    #[error("function is not {lip}-Lipschitz at points ({i},{j})")]
    NotLipschitz { i: usize, j: usize, lip: f64 },
    #[error("exhaustive search supports at most {ISO_MAX_POINTS} points, got {0}")]
    TooLarge(usize),
    #[error("json: {0}")]
    Json(String),
}

/// Symmetric n×n matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DistMatrix { n, data }
    }

    /// Row-parallel version of [`DistMatrix::from_fn`]; f must be symmetric.
    pub fn from_fn_par(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                if j != i {
                    *v = f(i.min(j), i.max(j));
                }
            }
        });
        DistMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SpaceError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(SpaceError::Shape(format!("row {i} has length {} (expected {n})", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(DistMatrix { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        DistMatrix::from_fn_par(self.n, |i, j| f(self.get(i, j)))
    }

    pub fn submatrix(&self, keep: &[usize]) -> Self {
        DistMatrix::from_fn(keep.len(), |a, b| self.get(keep[a], keep[b]))
    }

    /// Checks entries, symmetry, zero diagonal and the triangle inequality.
    pub fn check_metric(&self) -> Result<(), SpaceError> {
        self.check_entries()?;
        self.check_triangle()
    }

    fn check_entries(&self) -> Result<(), SpaceError> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(SpaceError::NonzeroDiagonal(i));
            }
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(SpaceError::BadEntry(i, j));
                }
                if v != self.get(j, i) {
                    return Err(SpaceError::Asymmetric(i, j));
                }
            }
        }
        Ok(())
    }

    /// For every pair (i,j) the rows differ by at most d(i,j) in sup-norm,
    /// which is the triangle inequality over all third points at once.
    fn check_triangle(&self) -> Result<(), SpaceError> {
        let n = self.n;
        for i in 0..n {
            let ri = self.row(i);
            for j in (i + 1)..n {
                let rj = self.row(j);
                if max_abs_diff(ri, rj) > self.get(i, j) + METRIC_TOL {
                    for k in 0..n {
                        let (a, b) = (ri[k], rj[k]);
                        if a > self.get(i, j) + b + METRIC_TOL {
                            return Err(SpaceError::TriangleViolation { i, j, k });
                        }
                        if b > self.get(i, j) + a + METRIC_TOL {
                            return Err(SpaceError::TriangleViolation { i: j, j: i, k });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let d = (a[4 * c + l] - b[4 * c + l]).abs();
            if d > acc[l] {
                acc[l] = d;
            }
        }
    }
    let mut m = acc[0].max(acc[1]).max(acc[2].max(acc[3]));
    for k in 4 * chunks..a.len() {
        m = m.max((a[k] - b[k]).abs());
    }
    m
}

/// How coordinates, when present, generate distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordMetric {
    Euclidean,
    GeodesicSphere,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coords {
    pub points: Vec<Vec<f64>>,
    pub metric: CoordMetric,
    pub radius: f64,
}

impl Coords {
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let e = euclid(&self.points[i], &self.points[j]);
        match self.metric {
            CoordMetric::Euclidean => e,
            CoordMetric::GeodesicSphere => chordal_to_geodesic(e, self.radius),
        }
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn chordal_to_geodesic(chord: f64, r: f64) -> f64 {
    2.0 * r * (chord / (2.0 * r)).clamp(-1.0, 1.0).asin()
}

/// The on-disk record; either `dist` or `coords` must be present.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SpaceRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
    pub weight: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<CoordMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

/// Points, distances and a strictly positive probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMMSpace {
    labels: Vec<String>,
    dist: DistMatrix,
    weight: Vec<f64>,
    coords: Option<Coords>,
}

impl FiniteMMSpace {
    /// Validates a raw matrix and weight vector with default labels.
    pub fn new(dist: Vec<Vec<f64>>, weight: Vec<f64>) -> Result<Self, SpaceError> {
        validate_space(SpaceRecord { dist: Some(dist), weight, ..Default::default() })
    }

    pub fn uniform(dist: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        let n = dist.len();
        Self::new(dist, vec![1.0 / n as f64; n])
    }

    /// Builds from an already-metric matrix, checking everything but the
    /// cubic triangle sweep. Used for distances induced by coordinates.
    pub(crate) fn trusted(
        labels: Vec<String>,
        dist: DistMatrix,
        weight: Vec<f64>,
        coords: Option<Coords>,
    ) -> Result<Self, SpaceError> {
        check_weights(&weight)?;
        dist.check_entries()?;
        let s = FiniteMMSpace { labels, dist, weight, coords };
        Ok(s.drop_null())
    }

    /// Builds and fully validates, triangle sweep included.
    pub fn checked(labels: Vec<String>, dist: DistMatrix, weight: Vec<f64>) -> Result<Self, SpaceError> {
        if labels.len() != dist.n() || weight.len() != dist.n() {
            return Err(SpaceError::Shape("labels, matrix and weights disagree in size".into()));
        }
        check_weights(&weight)?;
        dist.check_metric()?;
        Ok(FiniteMMSpace { labels, dist, weight, coords: None }.drop_null())
    }

    fn drop_null(self) -> Self {
        if self.weight.iter().all(|&w| w > 0.0) {
            return self;
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.weight[i] > 0.0).collect();
        FiniteMMSpace {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            dist: self.dist.submatrix(&keep),
            weight: keep.iter().map(|&i| self.weight[i]).collect(),
            coords: self.coords.map(|c| Coords {
                points: keep.iter().map(|&i| c.points[i].clone()).collect(),
                ..c
            }),
        }
    }

    pub fn one_point() -> Self {
        FiniteMMSpace {
            labels: vec!["x0".into()],
            dist: DistMatrix { n: 1, data: vec![0.0] },
            weight: vec![1.0],
            coords: None,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn dist(&self) -> &DistMatrix {
        &self.dist
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> Option<&Coords> {
        self.coords.as_ref()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.diameter()
    }

    /// Same carrier, new measure (zero weights dropped).
    pub fn with_weights(&self, weight: Vec<f64>) -> Result<Self, SpaceError> {
        if weight.len() != self.len() {
            return Err(SpaceError::HostMismatch { expected: self.len(), got: weight.len() });
        }
        check_weights(&weight)?;
        Ok(FiniteMMSpace { weight, ..self.clone() }.drop_null())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, SpaceError> {
        if labels.len() != self.len() {
            return Err(SpaceError::Shape("label count differs from point count".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Attaches coordinates that must reproduce the stored distances.
    pub fn attach_coords(mut self, coords: Coords) -> Result<Self, SpaceError> {
        if coords.points.len() != self.len() {
            return Err(SpaceError::HostMismatch { expected: self.len(), got: coords.points.len() });
        }
        let n = self.len();
        let probe = n.min(64);
        for i in 0..probe {
            for j in 0..n {
                let (a, b) = (coords.distance(i, j), self.d(i, j));
                if (a - b).abs() > METRIC_TOL * (1.0 + b) {
                    return Err(SpaceError::BadEntry(i, j));
                }
            }
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// Restriction to a subset of points with the given (renormalized) mass.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self, SpaceError> {
        let total: f64 = keep.iter().map(|&i| self.weight[i]).sum();
        if total <= 0.0 {
            return Err(SpaceError::NotNormalized(total));
        }
        let weight: Vec<f64> = keep.iter().map(|&i| self.weight[i] / total).collect();
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let coords = self.coords.as_ref().map(|c| Coords {
            points: keep.iter().map(|&i| c.points[i].clone()).collect(),
            ..c.clone()
        });
        Ok(FiniteMMSpace { labels, dist: self.dist.submatrix(keep), weight, coords })
    }

    pub fn to_record(&self) -> SpaceRecord {
        SpaceRecord {
            labels: Some(self.labels.clone()),
            dist: Some(self.dist.rows()),
            weight: self.weight.clone(),
            coords: self.coords.as_ref().map(|c| c.points.clone()),
            metric: self.coords.as_ref().map(|c| c.metric),
            radius: self.coords.as_ref().map(|c| c.radius),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("space serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SpaceError> {
        let rec: SpaceRecord = serde_json::from_str(s).map_err(|e| SpaceError::Json(e.to_string()))?;
        validate_space(rec)
    }
}

fn check_weights(w: &[f64]) -> Result<(), SpaceError> {
    if w.is_empty() {
        return Err(SpaceError::Shape("empty space".into()));
    }
    if let Some(i) = w.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(SpaceError::NegativeWeight(i));
    }
    let sum = neumaier_sum(w.iter().copied());
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(SpaceError::NotNormalized(sum));
    }
    Ok(())
}

/// Compensated summation, so that many tiny weights still total 1 to 1e-12.
pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Validates a raw record. Zero-weight points are dropped.
pub fn validate_space(rec: SpaceRecord) -> Result<FiniteMMSpace, SpaceError> {
    validate_space_capped(rec, DEFAULT_CAP)
}

pub fn validate_space_capped(rec: SpaceRecord, cap: usize) -> Result<FiniteMMSpace, SpaceError> {
    let n = rec.weight.len();
    if n > cap {
        return Err(SpaceError::CapExceeded(n, cap));
    }
    let labels = match rec.labels {
        Some(l) if l.len() == n => l,
        Some(l) => return Err(SpaceError::Shape(format!("{} labels for {n} weights", l.len()))),
        None => (0..n).map(|i| format!("x{i}")).collect(),
    };
    let coords = match rec.coords {
        Some(points) => {
            if points.len() != n {
                return Err(SpaceError::Shape(format!("{} coordinate rows for {n} weights", points.len())));
            }
            let dim = points.first().map_or(0, Vec::len);
            if points.iter().any(|p| p.len() != dim || p.iter().any(|x| !x.is_finite())) {
                return Err(SpaceError::Shape("ragged or non-finite coordinates".into()));
            }
            let metric = rec.metric.unwrap_or(CoordMetric::Euclidean);
            let radius = match metric {
                CoordMetric::Euclidean => rec.radius.unwrap_or(1.0),
                CoordMetric::GeodesicSphere => rec
                    .radius
                    .or_else(|| points.first().map(|p| euclid(p, &vec![0.0; dim])))
                    .unwrap_or(1.0),
            };
            if !(radius > 0.0) {
                return Err(SpaceError::Shape("sphere radius must be positive".into()));
            }
            Some(Coords { points, metric, radius })
        }
        None => None,
    };
    match (rec.dist, coords) {
        (Some(rows), coords) => {
            if rows.len() != n {
                return Err(SpaceError::Shape(format!("{} rows for {n} weights", rows.len())));
            }
            let dist = DistMatrix::from_rows(&rows)?;
            check_weights(&rec.weight)?;
            dist.check_metric()?;
            Ok(FiniteMMSpace { labels, dist, weight: rec.weight, coords }.drop_null())
        }
        (None, Some(c)) => {
            let dist = DistMatrix::from_fn_par(n, |i, j| c.distance(i, j));
            FiniteMMSpace::trusted(labels, dist, rec.weight, Some(c))
        }
        (None, None) => Err(SpaceError::Shape("record needs `dist` or `coords`".into())),
    }
}

/// Real values on the points of a host space with a Lipschitz certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipFunction {
    values: Vec<f64>,
    lip_const: f64,
}

impl LipFunction {
    pub fn new(space: &FiniteMMSpace, values: Vec<f64>, lip_const: f64) -> Result<Self, SpaceError> {
        if values.len() != space.len() {
            return Err(SpaceError::HostMismatch { expected: space.len(), got: values.len() });
        }
        if let Some((i, j)) = lipschitz_violation(space.dist(), &values, lip_const) {
            return Err(SpaceError::NotLipschitz { i, j, lip: lip_const });
        }
        Ok(LipFunction { values, lip_const })
    }

    /// 1-Lipschitz certificate.
    pub fn lip1(space: &FiniteMMSpace, values: Vec<f64>) -> Result<Self, SpaceError> {
        Self::new(space, values, 1.0)
    }

    pub fn constant(space: &FiniteMMSpace, c: f64) -> Self {
        LipFunction { values: vec![c; space.len()], lip_const: 0.0 }
    }

    /// x ↦ d(x, a).
    pub fn distance_to(space: &FiniteMMSpace, a: usize) -> Self {
        LipFunction { values: space.dist().row(a).to_vec(), lip_const: 1.0 }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lip_const(&self) -> f64 {
        self.lip_const
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// First pair violating |f(i)−f(j)| ≤ L·d(i,j) + tol, if any.
pub fn lipschitz_violation(d: &DistMatrix, f: &[f64], lip: f64) -> Option<(usize, usize)> {
    let n = d.n();
    for i in 0..n {
        let row = d.row(i);
        for j in (i + 1)..n {
            if (f[i] - f[j]).abs() > lip * row[j] + METRIC_TOL {
                return Some((i, j));
            }
        }
    }
    None
}

/// Weighted real atoms, sorted ascending with equal positions merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealDistribution {
    atoms: Vec<(f64, f64)>,
}

impl RealDistribution {
    /// Sorts and merges; rejects negative mass or a total away from 1.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self, SpaceError> {
        if let Some(i) = atoms.iter().position(|a| !(a.1 >= 0.0) || !a.0.is_finite()) {
            return Err(SpaceError::NegativeWeight(i));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SpaceError::NotNormalized(total));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(RealDistribution { atoms: merge_sorted(atoms) })
    }

    pub fn dirac(x: f64) -> Self {
        RealDistribution { atoms: vec![(x, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0].0
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0
    }
}

fn merge_sorted(atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, m) in atoms {
        if m == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if x - last.0 <= POSITION_TOL => last.1 += m,
            _ => out.push((x, m)),
        }
    }
    out
}

/// f_* m: the image measure of an observable.
pub fn pushforward(space: &FiniteMMSpace, f: &LipFunction) -> Result<RealDistribution, SpaceError> {
    pushforward_values(space, f.values())
}

pub fn pushforward_values(space: &FiniteMMSpace, values: &[f64]) -> Result<RealDistribution, SpaceError> {
    if values.len() != space.len() {
        return Err(SpaceError::HostMismatch { expected: space.len(), got: values.len() });
    }
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(space.weight().iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(RealDistribution { atoms: merge_sorted(atoms) })
}

/// Exhaustive search for a weight- and distance-preserving bijection.
/// Returns `perm` with `perm[i]` the image in `b` of point `i` of `a`.
pub fn mm_isomorphic(a: &FiniteMMSpace, b: &FiniteMMSpace, tol: f64) -> Result<Option<Vec<usize>>, SpaceError> {
    for s in [a, b] {
        if s.len() > ISO_MAX_POINTS {
            return Err(SpaceError::TooLarge(s.len()));
        }
    }
    if a.len() != b.len() {
        return Ok(None);
    }
    let n = a.len();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(a: &FiniteMMSpace, b: &FiniteMMSpace, tol: f64, k: usize, perm: &mut [usize], used: &mut [bool]) -> bool {
        let n = a.len();
        if k == n {
            return true;
        }
        for c in 0..n {
            if used[c] || (a.weight()[k] - b.weight()[c]).abs() > tol {
                continue;
            }
            if (0..k).any(|p| (a.d(p, k) - b.d(perm[p], c)).abs() > tol) {
                continue;
            }
            perm[k] = c;
            used[c] = true;
            if extend(a, b, tol, k + 1, perm, used) {
                return true;
            }
            used[c] = false;
        }
        false
    }
    Ok(extend(a, b, tol, 0, &mut perm, &mut used).then_some(perm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(d: f64, w0: f64) -> FiniteMMSpace {
        FiniteMMSpace::new(vec![vec![0.0, d], vec![d, 0.0]], vec![w0, 1.0 - w0]).unwrap()
    }

    #[test]
    fn smallest_space_is_valid() {
        let s = two(1.0, 0.5);
        assert_eq!(s.len(), 2);
        assert_eq!(s.d(0, 1), 1.0);
    }

    #[test]
    fn triangle_violation_is_named() {
        let d = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let err = FiniteMMSpace::uniform(d).unwrap_err();
        match err {
            SpaceError::TriangleViolation { i, j, k } => {
                let m = [[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]];
                assert!(m[i][k] > m[i][j] + m[j][k]);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn zero_weight_points_are_dropped() {
        let d = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let s = FiniteMMSpace::new(d, vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.labels(), &["x0".to_string(), "x1".to_string()]);
    }

    #[test]
    fn weight_errors() {
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(FiniteMMSpace::new(d.clone(), vec![1.5, -0.5]).unwrap_err(), SpaceError::NegativeWeight(1));
        assert!(matches!(FiniteMMSpace::new(d, vec![0.5, 0.4]).unwrap_err(), SpaceError::NotNormalized(_)));
    }

    #[test]
    fn pushforward_examples() {
        let s = two(2.0, 0.5);
        let f = LipFunction::lip1(&s, vec![0.0, 2.0]).unwrap();
        assert_eq!(pushforward(&s, &f).unwrap().atoms(), &[(0.0, 0.5), (2.0, 0.5)]);
        let c = LipFunction::constant(&s, 3.0);
        assert_eq!(pushforward(&s, &c).unwrap().atoms(), &[(3.0, 1.0)]);
        let four = FiniteMMSpace::uniform(vec![vec![0.0, 1.0, 1.0, 1.0], vec![1.0, 0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0, 1.0], vec![1.0, 1.0, 1.0, 0.0]]).unwrap();
        let g = LipFunction::lip1(&four, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(pushforward(&four, &g).unwrap().atoms(), &[(0.0, 0.5), (1.0, 0.5)]);
    }

    #[test]
    fn host_mismatch() {
        let s = two(1.0, 0.5);
        assert!(matches!(LipFunction::lip1(&s, vec![0.0]), Err(SpaceError::HostMismatch { .. })));
    }

    #[test]
    fn isomorphism_examples() {
        let a = FiniteMMSpace::new(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let b = FiniteMMSpace::new(
            vec![vec![0.0, 2.0, 1.5], vec![2.0, 0.0, 1.0], vec![1.5, 1.0, 0.0]],
            vec![0.5, 0.2, 0.3],
        )
        .unwrap();
        let perm = mm_isomorphic(&a, &b, 1e-9).unwrap().unwrap();
        assert_eq!(perm, vec![1, 2, 0]);
        assert!(mm_isomorphic(&two(1.0, 0.5), &two(2.0, 0.5), 1e-9).unwrap().is_none());
        assert!(mm_isomorphic(&two(1.0, 0.5), &two(1.0, 0.25), 1e-9).unwrap().is_none());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = FiniteMMSpace::new(
            vec![vec![0.0, 0.1 + 0.2, 1.0 / 3.0], vec![0.1 + 0.2, 0.0, 0.6], vec![1.0 / 3.0, 0.6, 0.0]],
            vec![0.1, 0.2, 0.7],
        )
        .unwrap();
        let back = FiniteMMSpace::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn coords_record_derives_distances() {
        let rec = SpaceRecord {
            coords: Some(vec![vec![0.0, 0.0], vec![3.0, 4.0]]),
            weight: vec![0.5, 0.5],
            ..Default::default()
        };
        let s = validate_space(rec).unwrap();
        assert_eq!(s.d(0, 1), 5.0);
    }
}
