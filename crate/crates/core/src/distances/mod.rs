//! Prokhorov, Ky Fan and box distances, ε-mm-isomorphisms, additive
//! Lipschitz errors and concentration certificates.

mod boxdist;
mod certificate;
mod checks;
mod flow;
mod maps;
mod prokhorov;

use thiserror::Error;

use crate::space::{FiniteMMSpace, SpaceError};

pub use boxdist::{box_distance, BoxEstimate, BoxMode, BOX_MAX_CHUNKS};
pub use certificate::{concentration_certificate, CertConfig, ConcentrationCertificate, CERT_MAX_TARGET};
pub use checks::{box_product_check, lprok_product_check, BoxProductCheck, LprokCheck};
pub use maps::{
    epsilon_mm_iso_search, lip_up_to_at, lip_up_to_eps, mcshane_repair, pushforward_weights, LipUpTo, MmIso,
    LIP_EXACT_MAX_POINTS,
};
pub use prokhorov::{plan_is_valid, prokhorov, prokhorov_bruteforce, Prokhorov, SubtransportPlan, BRUTE_MAX_POINTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("measure or function has {got} entries but the carrier has {expected} points")]
    HostMismatch { expected: usize, got: usize },
    #[error("lambda = {0} must be positive and finite")]
    BadLambda(f64),
    #[error("measure is not a probability vector (total {0})")]
    BadMeasure(f64),
    #[error("exhaustive mode supports at most {max} points, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("weight {0} is not a multiple of 1/k for any k ≤ 8")]
    NotRational(f64),
    #[error("common refinement needs {0} chunks, above the cap of {BOX_MAX_CHUNKS}")]
    CapExceeded(usize),
    #[error("target space has {0} points; certificates need at most {CERT_MAX_TARGET}")]
    TargetTooLarge(usize),
    #[error("map sends a point to index {0}, outside the target")]
    BadMap(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("{0}")]
    Other(String),
}

/// ky(f, g) = inf{ε ≥ 0 : m(|f − g| > ε) ≤ ε} on a weighted carrier.
///
/// With distinct gaps u_1 > … > u_m and T_k the mass of the top k, every
/// max(u_{k+1}, T_k) is feasible and the infimum is the least of them.
pub fn ky_fan_weighted(weights: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let mut gaps: Vec<(f64, f64)> = f.iter().zip(g).map(|(a, b)| (a - b).abs()).zip(weights.iter().copied()).collect();
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = gaps.first().map_or(0.0, |g| g.0);
    let mut mass = 0.0;
    let mut k = 0;
    while k < gaps.len() {
        let u = gaps[k].0;
        while k < gaps.len() && gaps[k].0 == u {
            mass += gaps[k].1;
            k += 1;
        }
        let next = gaps.get(k).map_or(0.0, |g| g.0);
        best = best.min(next.max(mass));
    }
    best.min(1.0)
}

pub fn ky_fan(x: &FiniteMMSpace, f: &[f64], g: &[f64]) -> Result<f64, DistanceError> {
    for v in [f, g] {
        if v.len() != x.len() {
            return Err(DistanceError::HostMismatch { expected: x.len(), got: v.len() });
        }
    }
    Ok(ky_fan_weighted(x.weight(), f, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ky_fan_examples() {
        let w = [0.25; 4];
        assert_eq!(ky_fan_weighted(&w, &[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]), 0.0);
        assert_eq!(ky_fan_weighted(&w, &[0.0; 4], &[0.0, 0.0, 0.0, 0.5]), 0.25);
        assert_eq!(ky_fan_weighted(&w, &[0.0; 4], &[0.3; 4]), 0.3);
        assert_eq!(ky_fan_weighted(&w, &[0.0; 4], &[3.0; 4]), 1.0);
        let x = FiniteMMSpace::one_point();
        assert!(ky_fan(&x, &[0.0, 1.0], &[0.0]).is_err());
    }
}
