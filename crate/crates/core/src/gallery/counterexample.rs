//! Spaces showing that a non-isotone defect changes the concentration
//! limit: two-point spaces thickened by high-dimensional spheres whose
//! cross-fiber distances are spread over [s, s_n].

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{four_point_z, is_triangle_triplet, sphere_points, two_point, GalleryError};
use crate::mpf::{check_triangle_triplets, MPFDescriptor};
use crate::optim::grid_then_golden;
use crate::product::metric_transform;
use crate::rng::substream;
use crate::space::{CoordMetric, Coords, DistMatrix, FiniteMMSpace};

/// Largest sphere dimension the builders will sample.
pub const DIM_CAP: usize = 256;
const MIN_GRID: usize = 1024;
const RECT_GRID: usize = 128;
/// Slack when checking grid minima against their closed-form bounds.
const GRID_TOL: f64 = 1e-9;
const STAT_PAIRS: usize = 20_000;

fn radius(s: f64, s_n: f64) -> f64 {
    (s_n * s_n - s * s).sqrt() / 2.0
}

fn check_pair(s: f64, s_n: f64, name: &str) -> Result<(), GalleryError> {
    if !(s > 0.0 && s_n > s && s_n.is_finite()) {
        return Err(GalleryError::BadParameter(format!("need 0 < {name} < {name}_n (got {s}, {s_n})")));
    }
    Ok(())
}

/// Sphere sample closed under a ↦ −a: the first half is i.i.d., the
/// second half its negation.
fn antipodal_sample(k: usize, r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let half = sphere_points(k, r, count / 2, seed);
    let neg: Vec<Vec<f64>> = half.iter().map(|p| p.iter().map(|x| -x).collect()).collect();
    half.into_iter().chain(neg).collect()
}

/// {x_0, x_1} ×_2 sample as a subset of R^{k+2}: fiber i sits at first
/// coordinate i·s. Point (i, a) has index i·N + a.
fn thickened(s: f64, sample: &[Vec<f64>], label: &str) -> Result<FiniteMMSpace, GalleryError> {
    let n = sample.len();
    let points: Vec<Vec<f64>> = (0..2)
        .flat_map(|i| sample.iter().map(move |a| std::iter::once(i as f64 * s).chain(a.iter().copied()).collect()))
        .collect();
    let coords = Coords { points, metric: CoordMetric::Euclidean, radius: 1.0 };
    let dist = DistMatrix::from_fn_par(2 * n, |p, q| coords.distance(p, q));
    let labels = (0..2 * n).map(|p| format!("{label}{}_{}", p / n, p % n)).collect();
    Ok(FiniteMMSpace::trusted(labels, dist, vec![0.5 / n as f64; 2 * n], Some(coords))?)
}

fn dimension(n: usize, r: f64, odd: bool) -> (usize, bool) {
    let base = n.max(r.powi(4).ceil() as usize);
    let want = if odd { 2 * base + 1 } else { base };
    let cap = if odd { DIM_CAP - 1 } else { DIM_CAP };
    (want.min(cap), want > cap)
}

/// Minimum of a unary F over [a, b] by grid and golden refinement.
fn min_on(f: &MPFDescriptor, a: f64, b: f64) -> f64 {
    grid_then_golden(|x| f.eval1(x[0]), &[a], &[b], MIN_GRID).1
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample1 {
    pub s: f64,
    pub s_n: f64,
    /// F_n(s) − F_n(s_n).
    pub eta: f64,
    pub r_n: f64,
    pub k_n: usize,
    /// True when max{n, ⌈r_n⁴⌉} exceeded [`DIM_CAP`].
    pub k_capped: bool,
    pub f_n: MPFDescriptor,
    /// Two points at distance s.
    pub x: FiniteMMSpace,
    /// x ×_2 S^{k_n}(r_n) sample, 2N points.
    pub x_n: FiniteMMSpace,
    /// (X_n, F_n ∘ d).
    pub transformed: FiniteMMSpace,
    /// Two points at distance min_{[s, s_n]} F_n.
    pub y_lim: FiniteMMSpace,
    /// (X, F_n ∘ d_X), the limit an isotone F would give.
    pub naive_limit: FiniteMMSpace,
    /// Fiber index of each point of X_n.
    pub p_map: Vec<usize>,
    /// T(x_0, a) = (x_1, −a) on point indices of fiber 0.
    pub antipode: Vec<usize>,
}

impl Counterexample1 {
    pub fn sphere_count(&self) -> usize {
        self.x_n.len() / 2
    }

    /// max over fiber 0 of |‖z − T z‖ − s_n|.
    pub fn antipodal_defect(&self) -> f64 {
        self.antipode.iter().enumerate().map(|(a, &b)| (self.x_n.d(a, b) - self.s_n).abs()).fold(0.0, f64::max)
    }

    /// Distances between the fibers, row-major over (fiber 0, fiber 1).
    pub fn cross_distances(&self) -> Vec<f64> {
        let n = self.sphere_count();
        (0..n).flat_map(|a| (n..2 * n).map(move |b| (a, b))).map(|(a, b)| self.x_n.d(a, b)).collect()
    }
}

/// Two points at distance s thickened by an antipodally symmetric sample
/// of S^{k_n}(r_n) with r_n = √(s_n² − s²)/2 and k_n = max{n, ⌈r_n⁴⌉},
/// so that every cross-fiber distance lies in [s, s_n] and ‖z − Tz‖ = s_n.
pub fn build_counterexample_1dim(
    family: &dyn Fn(u64) -> MPFDescriptor,
    s: f64,
    s_n: f64,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Counterexample1, GalleryError> {
    check_pair(s, s_n, "s")?;
    if count < 2 || !count.is_multiple_of(2) {
        return Err(GalleryError::BadParameter(format!("sphere sample size must be even and ≥ 2 (got {count})")));
    }
    let f_n = family(n as u64);
    if f_n.arity() != 1 {
        return Err(GalleryError::BadParameter("the one-dimensional construction needs a unary function".into()));
    }
    let eta = f_n.eval1(s) - f_n.eval1(s_n);
    if !(eta > GRID_TOL) {
        return Err(GalleryError::WitnessInvalid(format!("F_n(s) − F_n(s_n) = {eta} is not positive")));
    }
    let y_distance = min_on(&f_n, s, s_n);
    if !(y_distance > 0.0) {
        return Err(GalleryError::WitnessInvalid(format!("min of F_n on [s, s_n] is {y_distance}")));
    }
    let r_n = radius(s, s_n);
    let (k_n, k_capped) = dimension(n, r_n, false);
    let sample = antipodal_sample(k_n, r_n, count, seed);
    let x_n = thickened(s, &sample, "x")?;
    let transformed = metric_transform(&x_n, &f_n)?;
    let x = two_point(s, 0.5)?;
    let y_lim = two_point(y_distance, 0.5)?.with_labels(vec!["y0".into(), "y1".into()])?;
    let naive_limit = metric_transform(&x, &f_n)?;
    let p_map = (0..2 * count).map(|p| p / count).collect();
    let antipode = (0..count).map(|a| count + (a + count / 2) % count).collect();
    Ok(Counterexample1 { s, s_n, eta, r_n, k_n, k_capped, f_n, x, x_n, transformed, y_lim, naive_limit, p_map, antipode })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTriplet {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// F_n(s, t) − F_n(s_n, t_n).
    pub eta: f64,
    pub r_n: f64,
    pub rho_n: f64,
}

/// Minima of F_n over the three rectangles: α on [s, s_n] × [0, 2ρ_n],
/// β on [0, 2r_n] × [t, t_n], γ on [s, s_n] × [t, t_n].
pub fn limit_triplet(f: &MPFDescriptor, s: f64, t: f64, s_n: f64, t_n: f64) -> Result<LimitTriplet, GalleryError> {
    check_pair(s, s_n, "s")?;
    check_pair(t, t_n, "t")?;
    if f.arity() != 2 {
        return Err(GalleryError::BadParameter("the two-dimensional construction needs a binary function".into()));
    }
    let (r_n, rho_n) = (radius(s, s_n), radius(t, t_n));
    let g = |p: &[f64]| f.eval2(p[0], p[1]);
    let alpha = grid_then_golden(g, &[s, 0.0], &[s_n, 2.0 * rho_n], RECT_GRID).1;
    let beta = grid_then_golden(g, &[0.0, t], &[2.0 * r_n, t_n], RECT_GRID).1;
    let gamma = grid_then_golden(g, &[s, t], &[s_n, t_n], RECT_GRID).1;
    let eta = f.eval2(s, t) - f.eval2(s_n, t_n);
    Ok(LimitTriplet { alpha, beta, gamma, eta, r_n, rho_n })
}

/// Smallest sampled product distance in each class of fiber flips.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub pairs: usize,
    /// First fiber index flipped only.
    pub min_alpha: f64,
    /// Second only.
    pub min_beta: f64,
    /// Both.
    pub min_gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample2 {
    pub s: f64,
    pub t: f64,
    pub s_n: f64,
    pub t_n: f64,
    pub k_n: usize,
    pub l_n: usize,
    pub capped: bool,
    pub f_n: MPFDescriptor,
    pub triplet: LimitTriplet,
    pub x_n: FiniteMMSpace,
    pub y_n: FiniteMMSpace,
    pub z: FiniteMMSpace,
    pub stats: ClassStats,
}

/// Both factors thickened by odd-dimensional sphere samples; the limit Z
/// is the four-point space on the rectangle minima, which must form a
/// triangle triplet below F(s, 0), F(0, t) and F(s, t) − η.
#[allow(clippy::too_many_arguments)]
pub fn build_counterexample_2dim(
    family: &dyn Fn(u64) -> MPFDescriptor,
    s: f64,
    t: f64,
    s_n: f64,
    t_n: f64,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Counterexample2, GalleryError> {
    if count < 2 || !count.is_multiple_of(2) {
        return Err(GalleryError::BadParameter(format!("sphere sample size must be even and ≥ 2 (got {count})")));
    }
    let f_n = family(n as u64);
    let tri = limit_triplet(&f_n, s, t, s_n, t_n)?;
    if !(tri.eta > GRID_TOL) {
        return Err(GalleryError::WitnessInvalid(format!("F_n(s,t) − F_n(s_n,t_n) = {} is not positive", tri.eta)));
    }
    let (a, b, c) = (tri.alpha, tri.beta, tri.gamma);
    let bounds = a <= f_n.eval2(s, 0.0) + GRID_TOL
        && b <= f_n.eval2(0.0, t) + GRID_TOL
        && c <= f_n.eval2(s, t) - tri.eta + GRID_TOL;
    if !bounds || !is_triangle_triplet(a, b, c, GRID_TOL) {
        return Err(GalleryError::WitnessInvalid(format!("rectangle minima ({a}, {b}, {c}) violate their bounds")));
    }
    if check_triangle_triplets(&f_n, 10_000, 2.0 * s_n.max(t_n), seed).counterexample.is_some() {
        return Err(GalleryError::WitnessInvalid("F_n is not metric preserving".into()));
    }
    let (k_n, kc) = dimension(n, tri.r_n, true);
    let (l_n, lc) = dimension(n, tri.rho_n, true);
    let x_n = thickened(s, &antipodal_sample(k_n, tri.r_n, count, seed), "x")?;
    let y_n = thickened(t, &antipodal_sample(l_n, tri.rho_n, count, seed.wrapping_add(1)), "y")?;
    let z = four_point_z(a, b, c)?;
    let stats = class_stats(&x_n, &y_n, &f_n, count, seed);
    Ok(Counterexample2 { s, t, s_n, t_n, k_n, l_n, capped: kc || lc, f_n, triplet: tri, x_n, y_n, z, stats })
}

fn class_stats(x_n: &FiniteMMSpace, y_n: &FiniteMMSpace, f: &MPFDescriptor, count: usize, seed: u64) -> ClassStats {
    let mut rng = substream(seed, u64::MAX);
    let mut mins = [f64::INFINITY; 3];
    for class in 0..3 {
        let (flip_x, flip_y) = [(true, false), (false, true), (true, true)][class];
        for _ in 0..STAT_PAIRS {
            let (i, j) = (rng.random_range(0..2), rng.random_range(0..2));
            let pick = |rng: &mut crate::rng::Rng, fiber: usize| fiber * count + rng.random_range(0..count);
            let (x, x2) = (pick(&mut rng, i), pick(&mut rng, i ^ flip_x as usize));
            let (y, y2) = (pick(&mut rng, j), pick(&mut rng, j ^ flip_y as usize));
            mins[class] = mins[class].min(f.eval2(x_n.d(x, x2), y_n.d(y, y2)));
        }
    }
    ClassStats { pairs: STAT_PAIRS, min_alpha: mins[0], min_beta: mins[1], min_gamma: mins[2] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpf::builtins;

    #[test]
    fn h1_collapse_parameters() {
        let f = builtins::h1();
        let c = build_counterexample_1dim(&|_| f.clone(), 2.0, 3.0, 10, 200, 3).unwrap();
        assert_eq!(c.eta, 1.0);
        assert_eq!(c.r_n, 5f64.sqrt() / 2.0);
        assert_eq!(c.k_n, 10);
        assert_eq!(c.y_lim.d(0, 1), 1.0);
        assert_eq!(c.naive_limit.d(0, 1), 2.0);
        assert!(c.antipodal_defect() < 1e-9);
        assert!(c.cross_distances().iter().all(|&d| (2.0 - 1e-12..=3.0 + 1e-12).contains(&d)));
        assert_eq!(c.transformed.len(), 400);
    }

    #[test]
    fn isotone_function_is_rejected() {
        let f = builtins::identity();
        let e = build_counterexample_1dim(&|_| f.clone(), 2.0, 3.0, 4, 20, 1).unwrap_err();
        assert!(matches!(e, GalleryError::WitnessInvalid(_)));
    }

    #[test]
    fn isotone_triplet_sits_at_the_corner() {
        let f = builtins::lp(2.0, 2);
        let tri = limit_triplet(&f, 1.0, 2.0, 1.5, 2.5).unwrap();
        assert!((tri.alpha - 1.0).abs() < 1e-6);
        assert!((tri.beta - 2.0).abs() < 1e-6);
        assert!((tri.gamma - 5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn notisotone_square_minimum() {
        let tri = limit_triplet(&builtins::notisotone(), 2.0, 2.0, 3.0, 3.0).unwrap();
        assert!((tri.gamma - 1.0).abs() < 1e-9);
        assert!(tri.eta.abs() < 1e-12);
    }

    #[test]
    fn notisotone_bundle() {
        let c = build_counterexample_2dim(&|_| builtins::notisotone(), 1.5, 1.5, 3.0, 3.0, 4, 60, 2).unwrap();
        let t = c.triplet;
        assert!(is_triangle_triplet(t.alpha, t.beta, t.gamma, 1e-9));
        assert!((t.gamma - 1.0).abs() < 1e-9);
        assert!(c.k_n % 2 == 1 && c.l_n % 2 == 1);
        assert!(c.stats.min_alpha >= t.alpha - 1e-9);
        assert!(c.stats.min_beta >= t.beta - 1e-9);
        assert!(c.stats.min_gamma >= t.gamma - 1e-9);
    }
}
