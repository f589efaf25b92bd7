//! Product spaces (X_1 × ⋯ × X_N, F(d_1, …, d_N), ⊗ m_i) and metric
//! transforms (X, F ∘ d_X).

use thiserror::Error;

use crate::invariants::levy_mean;
use crate::mpf::{check_triangle_triplets, Expr, MPFDescriptor, TripletWitness};
use crate::space::{
    lipschitz_violation, pushforward_values, CoordMetric, Coords, DistMatrix, FiniteMMSpace, LipFunction, SpaceError,
    DEFAULT_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductError {
    #[error("product would have {0} points, above the cap of {1}")]
    CapExceeded(usize, usize),
    #[error("function arity {arity} does not match {factors} factors")]
    ArityMismatch { arity: usize, factors: usize },
    #[error("function failed the triangle-triplet check: {0:?}")]
    NotMetricPreserving(Box<TripletWitness>),
    #[error("function vanishes away from the origin at {0:?}")]
    ZeroSet(Vec<f64>),
    #[error("resulting distance is not a metric: {0}")]
    MetricViolation(SpaceError),
    #[error("input function is not 1-Lipschitz on the product at points ({0},{1})")]
    NotLipschitz(usize, usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Which factor a projected function lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

#[derive(Clone, Debug)]
pub struct ProductSpec<'a> {
    pub factors: Vec<&'a FiniteMMSpace>,
    pub f: MPFDescriptor,
    pub cap: usize,
    /// Samples for the triangle-triplet pre-check; 0 skips it.
    pub triplet_samples: usize,
    pub seed: u64,
}

impl<'a> ProductSpec<'a> {
    pub fn new(factors: Vec<&'a FiniteMMSpace>, f: MPFDescriptor) -> Self {
        ProductSpec { factors, f, cap: DEFAULT_CAP, triplet_samples: 2000, seed: 0 }
    }
}

/// Index of a tuple; the first factor varies slowest.
pub fn tuple_index(sizes: &[usize], tuple: &[usize]) -> usize {
    sizes.iter().zip(tuple).fold(0, |acc, (&n, &i)| acc * n + i)
}

pub fn tuple_of(sizes: &[usize], mut idx: usize) -> Vec<usize> {
    let mut t = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        t[k] = idx % sizes[k];
        idx /= sizes[k];
    }
    t
}

/// Streamed view of a product: distances and weights on demand.
pub struct ProductView<'a> {
    factors: Vec<&'a FiniteMMSpace>,
    sizes: Vec<usize>,
    f: MPFDescriptor,
}

impl<'a> ProductView<'a> {
    pub fn new(factors: Vec<&'a FiniteMMSpace>, f: MPFDescriptor) -> Result<Self, ProductError> {
        if f.arity() != factors.len() {
            return Err(ProductError::ArityMismatch { arity: f.arity(), factors: factors.len() });
        }
        let sizes = factors.iter().map(|s| s.len()).collect();
        Ok(ProductView { factors, sizes, f })
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weight(&self, i: usize) -> f64 {
        tuple_of(&self.sizes, i).iter().zip(&self.factors).map(|(&k, s)| s.weight()[k]).product()
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (tuple_of(&self.sizes, i), tuple_of(&self.sizes, j));
        let args: Vec<f64> = self.factors.iter().enumerate().map(|(k, s)| s.d(a[k], b[k])).collect();
        self.f.eval_unchecked(&args)
    }
}

/// Materialized product space, re-validated in full.
pub fn product(spec: &ProductSpec) -> Result<FiniteMMSpace, ProductError> {
    let f = &spec.f;
    if f.arity() != spec.factors.len() {
        return Err(ProductError::ArityMismatch { arity: f.arity(), factors: spec.factors.len() });
    }
    let sizes: Vec<usize> = spec.factors.iter().map(|s| s.len()).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).unwrap_or(usize::MAX);
    if total > spec.cap {
        return Err(ProductError::CapExceeded(total, spec.cap));
    }
    if spec.triplet_samples > 0 {
        let v = check_triangle_triplets(f, spec.triplet_samples, 10.0, spec.seed);
        if let Some(w) = v.counterexample {
            return Err(ProductError::NotMetricPreserving(Box::new(w)));
        }
        if let Some(z) = v.zero_set_witness {
            return Err(ProductError::ZeroSet(z));
        }
    }
    let tuples: Vec<Vec<usize>> = (0..total).map(|i| tuple_of(&sizes, i)).collect();
    let mut args = vec![0.0; sizes.len()];
    let dist = DistMatrix::from_fn(total, |i, j| {
        for (k, s) in spec.factors.iter().enumerate() {
            args[k] = s.d(tuples[i][k], tuples[j][k]);
        }
        f.eval_unchecked(&args)
    });
    let weight: Vec<f64> =
        tuples.iter().map(|t| t.iter().zip(&spec.factors).map(|(&k, s)| s.weight()[k]).product()).collect();
    let labels: Vec<String> = tuples
        .iter()
        .map(|t| t.iter().zip(&spec.factors).map(|(&k, s)| s.labels()[k].as_str()).collect::<Vec<_>>().join("⊗"))
        .collect();
    // Weights are products of factor weights; renormalize against rounding.
    let sum = crate::space::neumaier_sum(weight.iter().copied());
    let weight: Vec<f64> = weight.into_iter().map(|w| w / sum).collect();
    let mut space = FiniteMMSpace::checked(labels, dist, weight).map_err(|e| match e {
        e @ SpaceError::TriangleViolation { .. } => ProductError::MetricViolation(e),
        e => ProductError::Space(e),
    })?;
    if let Some(c) = euclidean_coords(spec, &tuples) {
        space = space.attach_coords(c)?;
    }
    Ok(space)
}

/// Concatenated coordinates when every factor is Euclidean and F = l_2.
fn euclidean_coords(spec: &ProductSpec, tuples: &[Vec<usize>]) -> Option<Coords> {
    if !matches!(spec.f.expr(), Expr::Lp { p } if *p == 2.0) {
        return None;
    }
    let cs: Vec<&Coords> = spec.factors.iter().map(|s| s.coords()).collect::<Option<_>>()?;
    if cs.iter().any(|c| c.metric != CoordMetric::Euclidean) {
        return None;
    }
    let points = tuples
        .iter()
        .map(|t| t.iter().zip(&cs).flat_map(|(&k, c)| c.points[k].iter().copied()).collect())
        .collect();
    Some(Coords { points, metric: CoordMetric::Euclidean, radius: 1.0 })
}

/// Above this size the cubic triangle sweep is replaced by the
/// triangle-triplet test of F.
pub const TRANSFORM_SWEEP_MAX: usize = 400;
const TRANSFORM_TRIPLETS: usize = 20_000;

/// (X, F ∘ d_X) for unary F, re-validated. Large spaces are accepted
/// when F passes the triangle-triplet test up to the diameter, since
/// then F ∘ d is a metric for every metric d.
pub fn metric_transform(x: &FiniteMMSpace, f: &MPFDescriptor) -> Result<FiniteMMSpace, ProductError> {
    if f.arity() != 1 {
        return Err(ProductError::ArityMismatch { arity: f.arity(), factors: 1 });
    }
    let dist = x.dist().map(|d| f.eval1(d));
    if x.len() > TRANSFORM_SWEEP_MAX {
        let v = check_triangle_triplets(f, TRANSFORM_TRIPLETS, x.diameter().max(1.0), 0);
        if let Some(w) = v.counterexample {
            return Err(ProductError::NotMetricPreserving(Box::new(w)));
        }
        if let Some(z) = v.zero_set_witness {
            return Err(ProductError::ZeroSet(z));
        }
        return Ok(FiniteMMSpace::trusted(x.labels().to_vec(), dist, x.weight().to_vec(), None)?);
    }
    FiniteMMSpace::checked(x.labels().to_vec(), dist, x.weight().to_vec()).map_err(|e| match e {
        e @ SpaceError::TriangleViolation { .. } => ProductError::MetricViolation(e),
        e => ProductError::Space(e),
    })
}

/// g(x) = lm(f(x, ·); m_Y) (or the symmetric h(y)) for f 1-Lipschitz on
/// the l_p product of `x` and `y`; product indices as in [`product`].
pub fn levy_projection(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    f: &[f64],
    p: f64,
    factor: Factor,
) -> Result<LipFunction, ProductError> {
    let (nx, ny) = (x.len(), y.len());
    if f.len() != nx * ny {
        return Err(SpaceError::HostMismatch { expected: nx * ny, got: f.len() }.into());
    }
    let lp = crate::mpf::builtins::lp(p, 2);
    let dist = DistMatrix::from_fn(nx * ny, |i, j| lp.eval2(x.d(i / ny, j / ny), y.d(i % ny, j % ny)));
    if let Some((i, j)) = lipschitz_violation(&dist, f, 1.0) {
        return Err(ProductError::NotLipschitz(i, j));
    }
    let values: Vec<f64> = match factor {
        Factor::First => (0..nx)
            .map(|a| {
                let fiber: Vec<f64> = (0..ny).map(|b| f[a * ny + b]).collect();
                levy_mean(&pushforward_values(y, &fiber).expect("fiber sized to Y")).lm
            })
            .collect(),
        Factor::Second => (0..ny)
            .map(|b| {
                let fiber: Vec<f64> = (0..nx).map(|a| f[a * ny + b]).collect();
                levy_mean(&pushforward_values(x, &fiber).expect("fiber sized to X")).lm
            })
            .collect(),
    };
    let host = match factor {
        Factor::First => x,
        Factor::Second => y,
    };
    Ok(LipFunction::lip1(host, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpf::builtins::*;

    fn two(d: f64) -> FiniteMMSpace {
        FiniteMMSpace::uniform(vec![vec![0.0, d], vec![d, 0.0]]).unwrap()
    }

    #[test]
    fn euclidean_product_of_two_points() {
        let (a, b) = (two(3.0), two(4.0));
        let p = product(&ProductSpec::new(vec![&a, &b], lp(2.0, 2))).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.d(0, 3), 5.0);
        assert_eq!(p.labels()[3], "x1⊗x1");
        assert!(p.weight().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn max_product_is_max() {
        let a = FiniteMMSpace::uniform(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]]).unwrap();
        let b = two(1.2);
        let p = product(&ProductSpec::new(vec![&a, &b], lp(f64::INFINITY, 2))).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(p.d(i, j), a.d(i / 2, j / 2).max(b.d(i % 2, j % 2)));
            }
        }
    }

    #[test]
    fn cyclic_three_factor_product() {
        let (a, b, c) = (two(1.0), two(2.0), two(3.0));
        let p = product(&ProductSpec::new(vec![&a, &b, &c], f_cyc())).unwrap();
        assert_eq!(p.d(0, 7), 5.0);
    }

    #[test]
    fn square_is_refused() {
        let (a, b) = (two(1.0), two(1.0));
        let sq = crate::mpf::combine(crate::mpf::CombineKind::AddFn, &[square(), square()]).unwrap();
        let e = product(&ProductSpec::new(vec![&a, &b], sq.clone())).unwrap_err();
        assert!(matches!(e, ProductError::NotMetricPreserving(_)));
        let three =
            FiniteMMSpace::uniform(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let mut spec = ProductSpec::new(vec![&three, &a], sq);
        spec.triplet_samples = 0;
        assert!(matches!(product(&spec).unwrap_err(), ProductError::MetricViolation(_)));
    }

    #[test]
    fn transforms() {
        let x = two(5.0);
        assert_eq!(metric_transform(&x, &identity()).unwrap(), x);
        assert_eq!(metric_transform(&x, &h1()).unwrap().d(0, 1), 1.0);
        assert_eq!(metric_transform(&x, &min2()).unwrap().d(0, 1), 2.0);
    }

    #[test]
    fn cap_is_enforced() {
        let a = two(1.0);
        let mut spec = ProductSpec::new(vec![&a, &a], lp(1.0, 2));
        spec.cap = 3;
        assert_eq!(product(&spec).unwrap_err(), ProductError::CapExceeded(4, 3));
    }

    #[test]
    fn levy_projection_examples() {
        let x = FiniteMMSpace::uniform(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let y = FiniteMMSpace::uniform(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        // f = l_1 distance to (x0, y0): fibers over x are {d_X(x,x0)+0, d_X(x,x0)+2}.
        let f: Vec<f64> = (0..4).map(|i| x.d(i / 2, 0) + y.d(i % 2, 0)).collect();
        let g = levy_projection(&x, &y, &f, 1.0, Factor::First).unwrap();
        assert_eq!(g.values(), &[1.0, 2.0]);
        let c = levy_projection(&x, &y, &[3.0; 4], 2.0, Factor::Second).unwrap();
        assert_eq!(c.values(), &[3.0, 3.0]);
        let ind: Vec<f64> = (0..4).map(|i| x.d(i / 2, 0)).collect();
        let g = levy_projection(&x, &y, &ind, 2.0, Factor::First).unwrap();
        assert_eq!(g.values(), &[0.0, 1.0]);
        assert!(levy_projection(&x, &y, &[0.0, 0.0, 0.0, 9.0], 2.0, Factor::First).is_err());
    }
}
