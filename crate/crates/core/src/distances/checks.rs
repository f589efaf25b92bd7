//! Product inequalities for the Prokhorov and box distances on tiny
//! instances.

use serde::{Deserialize, Serialize};

use super::boxdist::{box_distance, BoxMode};
use super::prokhorov::prokhorov;
use super::DistanceError;
use crate::mpf::MPFDescriptor;
use crate::product::{product, ProductSpec};
use crate::space::{DistMatrix, FiniteMMSpace};

/// Slack for the Prokhorov product inequality.
pub const LPROK_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LprokCheck {
    pub lhs: f64,
    pub prok_x: f64,
    pub prok_y: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// prok_λ(μ⊗ν, μ'⊗ν') on (X × Y, F(d_X, d_Y)) against
/// max{a + b, 2F(a, b)} with a = prok_λ(μ, μ'), b = prok_λ(ν, ν').
#[allow(clippy::too_many_arguments)]
pub fn lprok_product_check(
    x: &DistMatrix,
    mu: &[f64],
    mu2: &[f64],
    y: &DistMatrix,
    nu: &[f64],
    nu2: &[f64],
    f: &MPFDescriptor,
    lambda: f64,
) -> Result<LprokCheck, DistanceError> {
    let (nx, ny) = (x.n(), y.n());
    let d = DistMatrix::from_fn(nx * ny, |p, q| f.eval2(x.get(p / ny, q / ny), y.get(p % ny, q % ny)));
    let tensor = |a: &[f64], b: &[f64]| -> Vec<f64> { (0..nx * ny).map(|p| a[p / ny] * b[p % ny]).collect() };
    let lhs = prokhorov(&d, &tensor(mu, nu), &tensor(mu2, nu2), lambda)?.value;
    let prok_x = prokhorov(x, mu, mu2, lambda)?.value;
    let prok_y = prokhorov(y, nu, nu2, lambda)?.value;
    let rhs = (prok_x + prok_y).max(2.0 * f.eval2(prok_x, prok_y));
    Ok(LprokCheck { lhs, prok_x, prok_y, rhs, pass: lhs <= rhs + LPROK_TOL })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxProductCheck {
    pub lhs: f64,
    pub box_xy: f64,
    pub box_zw: f64,
    /// □(X,Y) + □(Z,W).
    pub rhs_sum: f64,
    /// max{□(X,Y) + □(Z,W), 2F(□(X,Y)/2, □(Z,W)/2)}.
    pub rhs_max: f64,
    pub pass_sum: bool,
    pub pass_max: bool,
}

/// Exact box distances of the F-products against both right-hand sides.
/// The sum form is a theorem for l_p products only.
pub fn box_product_check(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    z: &FiniteMMSpace,
    w: &FiniteMMSpace,
    f: &MPFDescriptor,
    tol: f64,
) -> Result<BoxProductCheck, DistanceError> {
    let build = |a: &FiniteMMSpace, b: &FiniteMMSpace| {
        let mut spec = ProductSpec::new(vec![a, b], f.clone());
        spec.triplet_samples = 0;
        product(&spec).map_err(|e| DistanceError::Other(e.to_string()))
    };
    let (xz, yw) = (build(x, z)?, build(y, w)?);
    let lhs = box_distance(&xz, &yw, BoxMode::ExactTiny)?.value();
    let box_xy = box_distance(x, y, BoxMode::ExactTiny)?.value();
    let box_zw = box_distance(z, w, BoxMode::ExactTiny)?.value();
    let rhs_sum = box_xy + box_zw;
    let rhs_max = rhs_sum.max(2.0 * f.eval2(0.5 * box_xy, 0.5 * box_zw));
    Ok(BoxProductCheck { lhs, box_xy, box_zw, rhs_sum, rhs_max, pass_sum: lhs <= rhs_sum + tol, pass_max: lhs <= rhs_max + tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpf::builtins::lp;

    #[test]
    fn equal_measures_give_zero() {
        let x = DistMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = lprok_product_check(&x, &[0.5, 0.5], &[0.5, 0.5], &x, &[0.2, 0.8], &[0.2, 0.8], &lp(2.0, 2), 1.0)
            .unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn identical_box_factors() {
        let x = FiniteMMSpace::uniform(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let z = FiniteMMSpace::uniform(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let r = box_product_check(&x, &x, &z, &z, &lp(2.0, 2), 1e-9).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass_sum && r.pass_max);
    }
}
