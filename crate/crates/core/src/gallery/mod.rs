//! Constructors for sphere samples, two- and four-point spaces, the glued
//! interval-and-sphere space with its limit, and the collapse
//! counterexamples built from non-isotone function sequences.

mod counterexample;

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mpf::MpfError;
use crate::product::ProductError;
use crate::rng::substream;
use crate::space::{chordal_to_geodesic, euclid, CoordMetric, Coords, DistMatrix, FiniteMMSpace, SpaceError};

pub use counterexample::{
    build_counterexample_1dim, build_counterexample_2dim, limit_triplet, ClassStats, Counterexample1, Counterexample2,
    LimitTriplet, DIM_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("({0}, {1}, {2}) is not a triangle triplet of positive numbers")]
    NotTriangleTriplet(f64, f64, f64),
    #[error("defect witness fails: {0}")]
    WitnessInvalid(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Mpf(#[from] MpfError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereMetric {
    Chordal,
    Geodesic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereSample {
    /// Intrinsic dimension: points lie in R^{n+1}.
    pub n: usize,
    pub r: f64,
    pub count: usize,
    pub metric: SphereMetric,
    pub seed: u64,
    pub space: FiniteMMSpace,
}

/// One uniform point on S^n(r); point i always uses substream i.
fn sphere_point(n: usize, r: f64, seed: u64, i: u64) -> Vec<f64> {
    let mut rng = substream(seed, i);
    loop {
        let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| r * x / norm).collect();
        }
    }
}

pub fn sphere_points(n: usize, r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count as u64).into_par_iter().map(|i| sphere_point(n, r, seed, i)).collect()
}

/// i.i.d. uniform points on S^n(r) by normalized Gaussian vectors, with
/// uniform weights and chordal or geodesic distances.
pub fn sample_sphere(n: usize, r: f64, count: usize, metric: SphereMetric, seed: u64) -> Result<SphereSample, GalleryError> {
    if n < 1 || count < 2 || !(r > 0.0 && r.is_finite()) {
        return Err(GalleryError::BadParameter(format!("sphere needs n ≥ 1, N ≥ 2, r > 0 (got {n}, {count}, {r})")));
    }
    let space = sphere_space(sphere_points(n, r, count, seed), r, metric)?;
    Ok(SphereSample { n, r, count, metric, seed, space })
}

/// Uniform-weight space on given sphere points.
pub fn sphere_space(points: Vec<Vec<f64>>, r: f64, metric: SphereMetric) -> Result<FiniteMMSpace, GalleryError> {
    let count = points.len();
    let coords = Coords {
        points,
        metric: match metric {
            SphereMetric::Chordal => CoordMetric::Euclidean,
            SphereMetric::Geodesic => CoordMetric::GeodesicSphere,
        },
        radius: r,
    };
    let dist = DistMatrix::from_fn_par(count, |i, j| coords.distance(i, j));
    let labels = (0..count).map(|i| format!("s{i}")).collect();
    Ok(FiniteMMSpace::trusted(labels, dist, vec![1.0 / count as f64; count], Some(coords))?)
}

/// Two points at distance s with weights (w0, 1 − w0).
pub fn two_point(s: f64, w0: f64) -> Result<FiniteMMSpace, GalleryError> {
    if !(s > 0.0 && s.is_finite()) || !(w0 > 0.0 && w0 < 1.0) {
        return Err(GalleryError::BadParameter(format!("two_point needs s > 0 and 0 < w0 < 1 (got {s}, {w0})")));
    }
    Ok(FiniteMMSpace::new(vec![vec![0.0, s], vec![s, 0.0]], vec![w0, 1.0 - w0])?
        .with_labels(vec!["x0".into(), "x1".into()])?)
}

pub fn is_triangle_triplet(a: f64, b: f64, c: f64, tol: f64) -> bool {
    a <= b + c + tol && b <= a + c + tol && c <= a + b + tol
}

/// Z = {z00, z10, z01, z11} with weights ¼: flipping the first index
/// costs α, the second β, both γ.
pub fn four_point_z(alpha: f64, beta: f64, gamma: f64) -> Result<FiniteMMSpace, GalleryError> {
    let positive = [alpha, beta, gamma].iter().all(|&v| v > 0.0 && v.is_finite());
    if !positive || !is_triangle_triplet(alpha, beta, gamma, 0.0) {
        return Err(GalleryError::NotTriangleTriplet(alpha, beta, gamma));
    }
    // Index 2i + j for z_{ij}.
    let d = |p: usize, q: usize| match ((p >> 1) != (q >> 1), (p & 1) != (q & 1)) {
        (false, false) => 0.0,
        (true, false) => alpha,
        (false, true) => beta,
        (true, true) => gamma,
    };
    let dist = (0..4).map(|p| (0..4).map(|q| d(p, q)).collect()).collect();
    Ok(FiniteMMSpace::new(dist, vec![0.25; 4])?.with_labels(
        ["z00", "z01", "z10", "z11"].iter().map(|s| s.to_string()).collect(),
    )?)
}

/// The interval [0, π] glued at π to a point of S^n(1), and its limit.
#[derive(Clone, Debug, PartialEq)]
pub struct GluedSpace {
    pub x_n: FiniteMMSpace,
    pub x_limit: FiniteMMSpace,
    /// Interval atom k ↦ k, every sphere point ↦ the limit's last atom.
    pub p_map: Vec<usize>,
    pub interval_atoms: usize,
}

/// Interval discretized into ⌈N/4⌉ midpoint atoms.
pub fn glued_interval_sphere(n: usize, n_sphere: usize, seed: u64) -> Result<GluedSpace, GalleryError> {
    glued_interval_sphere_with(n, n_sphere, n_sphere.div_ceil(4), seed)
}

/// Interval midpoints (mass ½ in total) and N geodesic sphere samples
/// (mass ½ in total); an interval point u and a sphere point y are at
/// distance (π − u) + d_S(x̄, y), with x̄ the north pole. The limit keeps
/// the interval atoms and puts mass ½ at 3π/2.
pub fn glued_interval_sphere_with(n: usize, n_sphere: usize, interval_atoms: usize, seed: u64) -> Result<GluedSpace, GalleryError> {
    if n < 1 || n_sphere < 2 || interval_atoms < 1 {
        return Err(GalleryError::BadParameter("example needs n ≥ 1, N ≥ 2 and at least one interval atom".into()));
    }
    let m = interval_atoms;
    let u: Vec<f64> = (0..m).map(|k| PI * (k as f64 + 0.5) / m as f64).collect();
    let pts = sphere_points(n, 1.0, n_sphere, seed);
    let mut pole = vec![0.0; n + 1];
    pole[0] = 1.0;
    let to_pole: Vec<f64> = pts.iter().map(|p| chordal_to_geodesic(euclid(p, &pole), 1.0)).collect();
    let total = m + n_sphere;
    let dist = DistMatrix::from_fn_par(total, |i, j| match (i < m, j < m) {
        (true, true) => (u[i] - u[j]).abs(),
        (true, false) => (PI - u[i]) + to_pole[j - m],
        (false, true) => (PI - u[j]) + to_pole[i - m],
        (false, false) => chordal_to_geodesic(euclid(&pts[i - m], &pts[j - m]), 1.0),
    });
    let mut weight = vec![0.5 / m as f64; m];
    weight.extend(std::iter::repeat_n(0.5 / n_sphere as f64, n_sphere));
    let labels = (0..m).map(|k| format!("u{k}")).chain((0..n_sphere).map(|k| format!("s{k}"))).collect();
    let x_n = FiniteMMSpace::trusted(labels, dist, weight, None)?;
    let mut lim_pos = u.clone();
    lim_pos.push(1.5 * PI);
    let mut lim_w = vec![0.5 / m as f64; m];
    lim_w.push(0.5);
    let lim_d = lim_pos.iter().map(|&a| lim_pos.iter().map(|&b| (a - b).abs()).collect()).collect();
    let x_limit = FiniteMMSpace::new(lim_d, lim_w)?
        .with_labels((0..m).map(|k| format!("u{k}")).chain(["3pi/2".to_string()]).collect())?;
    let p_map = (0..total).map(|i| i.min(m)).collect();
    Ok(GluedSpace { x_n, x_limit, p_map, interval_atoms: m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_have_radius_and_consistent_metrics() {
        let c = sample_sphere(3, 2.0, 40, SphereMetric::Chordal, 5).unwrap();
        let g = sample_sphere(3, 2.0, 40, SphereMetric::Geodesic, 5).unwrap();
        for p in &c.space.coords().unwrap().points {
            assert!((euclid(p, &[0.0; 4]) - 2.0).abs() < 1e-9);
        }
        for i in 0..40 {
            for j in 0..40 {
                let (ch, ge) = (c.space.d(i, j), g.space.d(i, j));
                assert!((ch - 4.0 * (ge / 4.0).sin()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn circle_sample_is_bounded() {
        let c = sample_sphere(1, 1.0, 4, SphereMetric::Chordal, 9).unwrap();
        assert_eq!(c.space.len(), 4);
        assert!(c.space.diameter() <= 2.0 + 1e-12);
    }

    #[test]
    fn mean_square_chordal_distance() {
        let c = sample_sphere(32, 1.0, 2000, SphereMetric::Chordal, 7).unwrap();
        let n = c.space.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += c.space.d(i, j).powi(2);
            }
        }
        let mean = s / (n * (n - 1) / 2) as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn small_spaces() {
        let x = two_point(2.0, 0.5).unwrap();
        assert_eq!(x.d(0, 1), 2.0);
        assert_eq!(x.weight(), &[0.5, 0.5]);
        let z = four_point_z(1.0, 1.0, 1.0).unwrap();
        assert!((0..4).all(|p| (0..4).all(|q| z.d(p, q) == if p == q { 0.0 } else { 1.0 })));
        assert_eq!(four_point_z(3.0, 1.0, 1.0).unwrap_err(), GalleryError::NotTriangleTriplet(3.0, 1.0, 1.0));
        let z = four_point_z(1.0, 2.0, 2.5).unwrap();
        assert_eq!((z.d(0, 2), z.d(0, 1), z.d(0, 3)), (1.0, 2.0, 2.5));
    }

    #[test]
    fn glued_space_distances() {
        let g = glued_interval_sphere_with(4, 30, 6, 1).unwrap();
        let m = g.interval_atoms;
        let pole_dist = |j: usize| g.x_n.d(m - 1, j) - (PI - PI * (m as f64 - 0.5) / m as f64);
        for j in m..g.x_n.len() {
            for i in 0..m {
                let u = PI * (i as f64 + 0.5) / m as f64;
                assert!((g.x_n.d(i, j) - ((PI - u) + pole_dist(j))).abs() < 1e-12);
            }
        }
        assert_eq!(g.x_limit.len(), m + 1);
        assert_eq!(g.x_limit.weight()[m], 0.5);
        assert!(g.p_map[m..].iter().all(|&t| t == m));
    }
}
