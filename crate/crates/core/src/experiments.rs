//! Experiment suites shared by the command line and the acceptance run.
//! Each suite is a pure function of its configuration and returns rows in
//! instance order together with its verdicts.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::{
    box_product_check, concentration_certificate, lip_up_to_eps, BoxProductCheck, CertConfig,
    ConcentrationCertificate, DistanceError,
};
use crate::gallery::{build_counterexample_1dim, sample_sphere, two_point, GalleryError, SphereMetric};
use crate::invariants::battery::{run_inequality_battery, BatteryConfig, BatteryError, BatteryReport, Lemma};
use crate::invariants::{observable_diameter, Budget, InvariantError, OdMode};
use crate::mpf::{builtins, classify_sequence, defect_table, ClassifyConfig, MpfError, SequenceVerdict};
use crate::rng::substream;
use crate::space::FiniteMMSpace;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("bad suite parameters: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Battery(#[from] BatteryError),
    #[error(transparent)]
    Mpf(#[from] MpfError),
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Nearest-rank quantile of unsorted data.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

// ---------------------------------------------------------------------
// Sphere decay

/// Observables for the sphere runs: Kuratowski and coordinate functions
/// only. Local moves tune f to the particular sample; at N = 2000 in
/// high dimension the sample is sparse enough that they measure the
/// sample rather than the sphere.
pub const SPHERE_BUDGET: Budget = Budget { functions: 2000, local_steps: 0 };
pub const SLOPE_RANGE: (f64, f64) = (-0.75, -0.30);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SphereDecayConfig {
    pub n_list: Vec<usize>,
    pub r: f64,
    pub count: usize,
    pub kappa: f64,
    pub metric: SphereMetric,
    pub seed: u64,
    pub budget: Budget,
}

impl Default for SphereDecayConfig {
    fn default() -> Self {
        SphereDecayConfig {
            n_list: vec![2, 4, 8, 16, 32],
            r: 1.0,
            count: 2000,
            kappa: 0.1,
            metric: SphereMetric::Chordal,
            seed: 7,
            budget: SPHERE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereDecayRow {
    pub n: usize,
    pub od: f64,
    pub evaluated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereDecay {
    pub rows: Vec<SphereDecayRow>,
    pub slope: f64,
    pub slope_in_range: bool,
}

pub fn sphere_od_decay(cfg: &SphereDecayConfig) -> Result<SphereDecay, ExperimentError> {
    sphere_od_decay_with(cfg, |n| Ok(sample_sphere(n, cfg.r, cfg.count, cfg.metric, cfg.seed)?.space))
}

/// As `sphere_od_decay` with a caller-supplied sampler, e.g. a cache.
pub fn sphere_od_decay_with(
    cfg: &SphereDecayConfig,
    sample: impl Fn(usize) -> Result<FiniteMMSpace, ExperimentError>,
) -> Result<SphereDecay, ExperimentError> {
    if cfg.n_list.len() < 2 || cfg.n_list.contains(&0) {
        return Err(ExperimentError::BadSpec("sphere decay needs at least two dimensions ≥ 1".into()));
    }
    let rows = cfg
        .n_list
        .iter()
        .map(|&n| {
            let space = sample(n)?;
            let e = observable_diameter(&space, cfg.kappa, OdMode::HeuristicLb, cfg.budget, cfg.seed)?;
            Ok(SphereDecayRow { n, od: e.value, evaluated: e.evaluated })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let slope = loglog_slope(&rows.iter().map(|r| (r.n as f64, r.od)).collect::<Vec<_>>());
    Ok(SphereDecay { rows, slope, slope_in_range: (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope) })
}

// ---------------------------------------------------------------------
// One-dimensional collapse

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollapseConfig {
    /// Builtin name of the (constant) function sequence.
    pub function: String,
    pub s: f64,
    pub s_n: f64,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub observables: usize,
    /// Grid of ε at which the naive limit must be rejected.
    pub naive_eps_max: f64,
    pub tol: f64,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        CollapseConfig {
            function: "h1".into(),
            s: 2.0,
            s_n: 3.0,
            n: 50,
            count: 1500,
            seed: 7,
            observables: 200,
            naive_eps_max: 0.5,
            tol: 1e-9,
        }
    }
}

pub const COLLAPSE_P5_MAX: f64 = 1.25;
pub const COLLAPSE_EPS_MAX: f64 = 0.3;
const NAIVE_STEP: f64 = 0.005;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Collapse {
    pub k_n: usize,
    pub k_capped: bool,
    pub y_distance: f64,
    pub naive_distance: f64,
    pub antipodal_defect: f64,
    pub cross_min: f64,
    pub cross_max: f64,
    pub transformed_min: f64,
    pub transformed_p5: f64,
    pub certificate: ConcentrationCertificate,
    /// Smallest ε on the grid [0, naive_eps_max] at which the map to the
    /// naive limit is 1-Lipschitz up to ε.
    pub naive_first_eps: Option<f64>,
    pub naive_exact: bool,
    pub pass_antipodal: bool,
    pub pass_cross_range: bool,
    pub pass_transformed: bool,
    pub pass_certificate: bool,
}

impl Collapse {
    pub fn all_pass(&self) -> bool {
        self.pass_antipodal && self.pass_cross_range && self.pass_transformed && self.pass_certificate
    }
}

pub fn collapse_1dim(cfg: &CollapseConfig) -> Result<Collapse, ExperimentError> {
    let f = builtins::parse(&cfg.function)?;
    let family = |_| f.clone();
    let c = build_counterexample_1dim(&family, cfg.s, cfg.s_n, cfg.n, cfg.count, cfg.seed)?;
    let cross = c.cross_distances();
    let (cross_min, cross_max) = cross.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let transformed: Vec<f64> = cross.par_iter().map(|&d| f.eval1(d)).collect();
    let transformed_min = transformed.iter().copied().fold(f64::INFINITY, f64::min);
    let transformed_p5 = quantile(&transformed, 0.05);
    let y_distance = c.y_lim.d(0, 1);
    let cert_cfg = CertConfig { observables: cfg.observables, seed: cfg.seed, ..Default::default() };
    let certificate = concentration_certificate(&c.transformed, &c.y_lim, &c.p_map, &cert_cfg)?;
    let steps = (cfg.naive_eps_max / NAIVE_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| (k as f64 * NAIVE_STEP).min(cfg.naive_eps_max)).collect();
    let naive = lip_up_to_eps(&c.transformed, c.naive_limit.dist(), &c.p_map, &grid)?;
    Ok(Collapse {
        k_n: c.k_n,
        k_capped: c.k_capped,
        y_distance,
        naive_distance: c.naive_limit.d(0, 1),
        antipodal_defect: c.antipodal_defect(),
        cross_min,
        cross_max,
        transformed_min,
        transformed_p5,
        pass_antipodal: c.antipodal_defect() <= cfg.tol,
        pass_cross_range: cross_min >= cfg.s - cfg.tol && cross_max <= cfg.s_n + cfg.tol,
        pass_transformed: transformed_min >= y_distance - cfg.tol && transformed_p5 <= COLLAPSE_P5_MAX,
        pass_certificate: certificate.epsilon <= COLLAPSE_EPS_MAX && naive.epsilon.is_none(),
        certificate,
        naive_first_eps: naive.epsilon,
        naive_exact: naive.exact,
    })
}

// ---------------------------------------------------------------------
// Box product bound

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoxConfig {
    pub trials: usize,
    pub seed: u64,
    /// Builtin name of the binary product function.
    pub function: String,
    /// Two-point distances are drawn from (0, max_distance].
    pub max_distance: f64,
    pub tol: f64,
}

impl Default for BoxConfig {
    fn default() -> Self {
        BoxConfig { trials: 50, seed: 7, function: "fp:2".into(), max_distance: 3.0, tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub trial: usize,
    /// Two-point distances of X, Y, Z, W.
    pub distances: [f64; 4],
    pub check: BoxProductCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSuite {
    pub rows: Vec<BoxRow>,
    pub failures: usize,
}

/// □(X ×_F Z, Y ×_F W) against □(X,Y) + □(Z,W) on two-point ½/½ spaces.
pub fn box_product_suite(cfg: &BoxConfig) -> Result<BoxSuite, ExperimentError> {
    let f = builtins::parse(&cfg.function)?;
    if f.arity() != 2 || !(cfg.max_distance > 0.0) {
        return Err(ExperimentError::BadSpec("box suite needs a binary function and a positive distance range".into()));
    }
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(cfg.seed, t as u64);
            let distances: [f64; 4] = std::array::from_fn(|_| cfg.max_distance * (1.0 - rng.random::<f64>()));
            let [x, y, z, w] = distances.map(|d| two_point(d, 0.5));
            let check = box_product_check(&x?, &y?, &z?, &w?, &f, cfg.tol)?;
            Ok(BoxRow { trial: t, distances, check })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let failures = rows.iter().filter(|r| !r.check.pass_sum).count();
    Ok(BoxSuite { rows, failures })
}

// ---------------------------------------------------------------------
// Classifier

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRow {
    pub family: String,
    pub verdict: SequenceVerdict,
    /// Defect at (2, 0) for each tested n.
    pub defect_at_2_0: Vec<(u64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierDemo {
    pub rows: Vec<ClassifierRow>,
    /// G^1: (2) holds, (1) fails.
    pub pass_g1: bool,
    /// G^2: (3) holds, (2) fails, sup defect ≥ 1 − tol at every n.
    pub pass_g2: bool,
    /// G^3: (5) holds, (4) fails, defect at (2,0) equal to 1 at every n.
    pub pass_g3: bool,
}

impl ClassifierDemo {
    pub fn all_pass(&self) -> bool {
        self.pass_g1 && self.pass_g2 && self.pass_g3
    }
}

pub fn classifier_demo(cfg: &ClassifyConfig, tol: f64) -> Result<ClassifierDemo, ExperimentError> {
    let rows = ["gn1", "gn2", "gn3"]
        .iter()
        .map(|&name| {
            let (family, limit) = builtins::family(name)?;
            let verdict = classify_sequence(&*family, &limit, cfg)?;
            let defect_at_2_0 = cfg
                .n_list
                .iter()
                .map(|&n| {
                    let rep = defect_table(&family(n), 2.0, cfg.h, cfg.probe.max(n as f64 + 8.0))?;
                    Ok((n, rep.at(&[2.0, 0.0]).unwrap_or(f64::NAN)))
                })
                .collect::<Result<Vec<_>, MpfError>>()?;
            Ok(ClassifierRow { family: name.to_string(), verdict, defect_at_2_0 })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let v = |i: usize| &rows[i].verdict;
    let pass_g1 = v(0).holds(2) && !v(0).holds(1);
    let pass_g2 = v(1).holds(3)
        && !v(1).holds(2)
        && v(1).conditions[1].evidence.iter().all(|e| e.1 >= 1.0 - tol);
    let pass_g3 = v(2).holds(5) && !v(2).holds(4) && rows[2].defect_at_2_0.iter().all(|e| (e.1 - 1.0).abs() <= tol);
    Ok(ClassifierDemo { rows, pass_g1, pass_g2, pass_g3 })
}

// ---------------------------------------------------------------------
// Lemma batteries

/// The batteries checked as theorems in the acceptance run.
pub const THEOREM_BATTERIES: [Lemma; 10] = [
    Lemma::Key1dim,
    Lemma::KeyLp,
    Lemma::KeyF,
    Lemma::Lo,
    Lemma::LmLem,
    Lemma::Lprok,
    Lemma::Box1,
    Lemma::BoxProk,
    Lemma::LevyOd,
    Lemma::ProkKy,
];

pub fn lemma_batteries(lemmas: &[Lemma], cfg: &BatteryConfig) -> Result<Vec<BatteryReport>, ExperimentError> {
    Ok(lemmas.iter().map(|&l| run_inequality_battery(l, cfg)).collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(-0.5))).collect();
        assert!((loglog_slope(&pts) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn nearest_rank_quantile() {
        let d: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&d, 0.05), 5.0);
        assert_eq!(quantile(&d, 0.0), 1.0);
        assert_eq!(quantile(&d, 1.0), 100.0);
    }

    #[test]
    fn box_suite_is_reproducible() {
        let cfg = BoxConfig { trials: 4, ..Default::default() };
        let a = box_product_suite(&cfg).unwrap();
        assert_eq!(a, box_product_suite(&cfg).unwrap());
        assert_eq!(a.failures, 0);
    }
}
