//! Randomized checks of the inequalities relating observable diameters,
//! concentration functions, Lévy means and the Prokhorov and box
//! distances. Every check is a theorem, so a single failure is a bug.
//!
//! Right-hand sides are always exact. Left-hand sides are exact when the
//! space has at most [`EXACT_MAX_POINTS`] points and a heuristic lower
//! bound otherwise, which keeps the check sound.

use rand::seq::IndexedRandom as _;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::{
    concentration_function, levy_mean, levy_radius, od_auto, od_exact, sample_observables, Budget, InvariantError,
    EXACT_MAX_POINTS,
};
use crate::distances::{
    box_distance, box_product_check, ky_fan_weighted, lprok_product_check, plan_is_valid, prokhorov, BoxMode,
    DistanceError,
};
use crate::mpf::builtins::{self, lp};
use crate::mpf::MPFDescriptor;
use crate::product::{metric_transform, product, ProductError, ProductSpec};
use crate::rng::{substream, Rng};
use crate::space::{pushforward_values, DistMatrix, FiniteMMSpace, SpaceError};

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BatteryError {
    #[error("unknown battery {0:?}")]
    UnknownLemma(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("subtransport plan failed its own certificate")]
    BadPlan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lemma {
    /// OD(X^F; −2κ) ≤ 4F(OD(X; −κ)) and the concentration-function form.
    Key1dim,
    /// OD(X ×_p Y; −(κ+κ')) ≤ OD(X; −κ) + 2 OD(Y; −κ').
    KeyLp,
    /// OD(X ×_F Y; −2(κ+κ')) ≤ 4F(OD(X; −κ), 0) + 8F(0, OD(Y; −κ')).
    KeyF,
    /// F ≤ G ⇒ OD(X ×_F Y; −κ) ≤ OD(X ×_G Y; −κ).
    Lo,
    /// Both comparisons between OD and the concentration function.
    ConcFct,
    KeyLpN,
    KeyFN,
    /// |lm(f; μ) − lm(f; ν)| ≤ ε + OD((X,μ); −κ) + OD((X,ν); −κ).
    LmLem,
    /// prok_λ(μ⊗ν, μ'⊗ν') ≤ max{a + b, 2F(a, b)}.
    Lprok,
    /// □ of F-products against the max form, and the sum form for l_p.
    Box1,
    /// □((X,μ), (X,ν)) ≤ 2 prok(μ, ν).
    BoxProk,
    /// LR(X; −κ) ≤ OD(X; −κ) for κ < ½.
    LevyOd,
    /// prok(f_*μ, g_*μ) ≤ ky(f, g).
    ProkKy,
}

impl Lemma {
    pub const ALL: [Lemma; 13] = [
        Lemma::Key1dim,
        Lemma::KeyLp,
        Lemma::KeyF,
        Lemma::Lo,
        Lemma::ConcFct,
        Lemma::KeyLpN,
        Lemma::KeyFN,
        Lemma::LmLem,
        Lemma::Lprok,
        Lemma::Box1,
        Lemma::BoxProk,
        Lemma::LevyOd,
        Lemma::ProkKy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Key1dim => "key_1dim",
            Lemma::KeyLp => "key_lp",
            Lemma::KeyF => "key_F",
            Lemma::Lo => "LO",
            Lemma::ConcFct => "conc_fct",
            Lemma::KeyLpN => "key_lp_N",
            Lemma::KeyFN => "key_F_N",
            Lemma::LmLem => "lm_lem",
            Lemma::Lprok => "lprok",
            Lemma::Box1 => "box1",
            Lemma::BoxProk => "box_prok",
            Lemma::LevyOd => "lr_od",
            Lemma::ProkKy => "prok_ky",
        }
    }

    pub fn parse(s: &str) -> Result<Lemma, BatteryError> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BatteryError::UnknownLemma(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Candidate κ values; each κ a trial needs is drawn from those that
    /// satisfy its range, or uniformly from the range when none does.
    pub kappas: Option<Vec<f64>>,
    /// Effort for left-hand sides above the exact size limit.
    pub budget: Budget,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            trials: 50,
            seed: 0,
            tol: DEFAULT_TOL,
            kappas: None,
            budget: Budget { functions: 400, local_steps: 400 },
        }
    }
}

/// One instance: `lhs ≤ rhs + tol` is the claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// False when the left side is a heuristic lower bound.
    pub lhs_exact: bool,
    pub detail: String,
}

impl Check {
    fn new(lhs: f64, rhs: f64, lhs_exact: bool, tol: f64, detail: String) -> Self {
        Check { lhs, rhs, pass: lhs <= rhs + tol, lhs_exact, detail }
    }

    /// The part with the smallest margin, failing if any part fails.
    fn worst(parts: Vec<Check>) -> Check {
        let pass = parts.iter().all(|c| c.pass);
        let mut w = parts
            .into_iter()
            .max_by(|a, b| (a.lhs - a.rhs).total_cmp(&(b.lhs - b.rhs)))
            .expect("at least one part");
        w.pass = pass;
        w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub trial: usize,
    pub check: Check,
    /// The full instance, kept for failures only.
    pub witness: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub lemma: String,
    pub rows: Vec<BatteryRow>,
    pub failures: usize,
}

impl BatteryReport {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

/// Runs `cfg.trials` random instances in parallel; trial t draws from
/// substream t of the seed, so results do not depend on thread count.
pub fn run_inequality_battery(lemma: Lemma, cfg: &BatteryConfig) -> Result<BatteryReport, BatteryError> {
    let rows: Vec<BatteryRow> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(cfg.seed, t as u64);
            let (check, instance) = trial(lemma, cfg, &mut rng, t as u64)?;
            let witness = (!check.pass).then_some(instance);
            Ok(BatteryRow { trial: t, check, witness })
        })
        .collect::<Result<_, BatteryError>>()?;
    let failures = rows.iter().filter(|r| !r.check.pass).count();
    Ok(BatteryReport { lemma: lemma.name().to_string(), rows, failures })
}

/// Random metric on n points (shortest-path closure of random lengths)
/// with random positive weights.
pub fn random_tiny_space(n: usize, rng: &mut Rng) -> FiniteMMSpace {
    let mut d = vec![vec![0.0; n]; n];
    for (i, j) in (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))) {
        let v = rng.random_range(0.3..2.0);
        d[i][j] = v;
        d[j][i] = v;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMMSpace::new(d, random_weights(n, rng)).expect("closure is a metric")
}

pub fn random_weights(n: usize, rng: &mut Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / s).collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    w
}

/// Weights k_i/den with every k_i ≥ 1.
fn random_dyadic_weights(n: usize, den: usize, rng: &mut Rng) -> Vec<f64> {
    let mut k = vec![1usize; n];
    for _ in n..den {
        k[rng.random_range(0..n)] += 1;
    }
    k.into_iter().map(|c| c as f64 / den as f64).collect()
}

fn two_point(d: f64) -> FiniteMMSpace {
    FiniteMMSpace::uniform(vec![vec![0.0, d], vec![d, 0.0]]).expect("two-point space")
}

fn binary_family() -> Vec<(String, MPFDescriptor)> {
    let mut v: Vec<(String, MPFDescriptor)> = builtins::gallery()
        .into_iter()
        .filter(|(_, f)| f.arity() == 2)
        .map(|(n, f)| (n.to_string(), f))
        .collect();
    v.push(("notisotone".into(), builtins::notisotone()));
    v
}

fn unary_family() -> Vec<(String, MPFDescriptor)> {
    vec![
        ("H_1".into(), builtins::h1()),
        ("H_2".into(), builtins::h2()),
        ("min2".into(), builtins::min2()),
        ("F_n1(3)".into(), builtins::f_n1(3)),
        ("F_n3(2)".into(), builtins::f_n3(2)),
        ("identity".into(), builtins::identity()),
    ]
}

/// Pairs F ≤ G pointwise.
fn ordered_pairs() -> Vec<(&'static str, MPFDescriptor, &'static str, MPFDescriptor)> {
    vec![
        ("F_inf", lp(f64::INFINITY, 2), "F_2", lp(2.0, 2)),
        ("F_2", lp(2.0, 2), "F_1", lp(1.0, 2)),
        ("F_inf", lp(f64::INFINITY, 2), "F_1", lp(1.0, 2)),
        ("F_inf", lp(f64::INFINITY, 2), "F_exp", builtins::f_exp()),
        ("F_exp", builtins::f_exp(), "F_1", lp(1.0, 2)),
        ("F_3", lp(3.0, 2), "F_1.5", lp(1.5, 2)),
    ]
}

fn kappa(cfg: &BatteryConfig, rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    if let Some(list) = &cfg.kappas {
        let ok: Vec<f64> = list.iter().copied().filter(|&k| k > lo && k < hi).collect();
        if let Some(&k) = ok.choose(rng) {
            return k;
        }
    }
    let (a, b) = (lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo));
    rng.random_range(a..b)
}

fn pair_product(a: &FiniteMMSpace, b: &FiniteMMSpace, f: &MPFDescriptor) -> Result<FiniteMMSpace, ProductError> {
    let mut spec = ProductSpec::new(vec![a, b], f.clone());
    spec.triplet_samples = 0;
    product(&spec)
}

fn od(x: &FiniteMMSpace, kappa: f64) -> Result<f64, InvariantError> {
    Ok(od_exact(x, kappa)?.0)
}

/// Exact when small enough, otherwise a lower bound; returns (value, exact).
fn od_lower(x: &FiniteMMSpace, kappa: f64, budget: Budget, seed: u64) -> Result<(f64, bool), InvariantError> {
    let e = od_auto(x, kappa, budget, seed)?;
    Ok((e.value, x.len() <= EXACT_MAX_POINTS))
}

fn rec(x: &FiniteMMSpace) -> serde_json::Value {
    serde_json::to_value(x.to_record()).expect("record serializes")
}

/// α_X evaluated just above `v`: the limit of α_X(v + ε) as ε ↓ 0.
fn alpha_above(x: &FiniteMMSpace, v: f64) -> f64 {
    let next = distinct_distances(x).into_iter().find(|&d| d > v).unwrap_or(v + 2.0);
    concentration_function(x, 0.5 * (v + next)).upper
}

fn distinct_distances(x: &FiniteMMSpace) -> Vec<f64> {
    let mut v: Vec<f64> = (0..x.len()).flat_map(|i| (0..x.len()).map(move |j| (i, j))).map(|(i, j)| x.d(i, j)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

type Trial = (Check, serde_json::Value);

fn trial(lemma: Lemma, cfg: &BatteryConfig, rng: &mut Rng, t: u64) -> Result<Trial, BatteryError> {
    let seed = cfg.seed.wrapping_add(t);
    match lemma {
        Lemma::Key1dim => {
            let x = random_tiny_space(rng.random_range(2..=5), rng);
            let (name, f) = unary_family().choose(rng).cloned().expect("nonempty");
            let k = kappa(cfg, rng, 0.0, 0.5);
            let c = check_key_1dim(&x, &f, k, cfg.tol)?;
            Ok((c.with_prefix(&format!("F={name} ")), json!({"x": rec(&x), "F": name, "kappa": k})))
        }
        Lemma::KeyLp => {
            let (x, y) = (random_tiny_space(rng.random_range(2..=3), rng), random_tiny_space(rng.random_range(2..=3), rng));
            let p = *[1.0, 1.5, 2.0, 3.0, f64::INFINITY].choose(rng).expect("nonempty");
            let k1 = kappa(cfg, rng, 0.0, 0.5);
            let k2 = kappa(cfg, rng, 0.0, 0.5);
            let c = check_key_lp(&x, &y, p, k1, k2, cfg, seed)?;
            Ok((c, json!({"x": rec(&x), "y": rec(&y), "p": p, "kappa": k1, "kappa2": k2})))
        }
        Lemma::KeyF => {
            let (x, y) = (random_tiny_space(rng.random_range(2..=3), rng), random_tiny_space(rng.random_range(2..=3), rng));
            let (name, f) = binary_family().choose(rng).cloned().expect("nonempty");
            let k1 = kappa(cfg, rng, 0.0, 0.25);
            let k2 = kappa(cfg, rng, 0.0, 0.25);
            let c = check_key_f(&x, &y, &f, k1, k2, cfg, seed)?;
            Ok((c.with_prefix(&format!("F={name} ")), json!({"x": rec(&x), "y": rec(&y), "F": name, "kappa": k1, "kappa2": k2})))
        }
        Lemma::Lo => {
            let (n1, n2) = *[(2, 2), (2, 3), (3, 2)].choose(rng).expect("nonempty");
            let (x, y) = (random_tiny_space(n1, rng), random_tiny_space(n2, rng));
            let pairs = ordered_pairs();
            let (fname, f, gname, g) = pairs.choose(rng).expect("nonempty");
            let k = kappa(cfg, rng, 0.0, 1.0);
            let c = check_lo(&x, &y, f, g, k, cfg.tol)?;
            Ok((c.with_prefix(&format!("F={fname} G={gname} ")), json!({"x": rec(&x), "y": rec(&y), "F": fname, "G": gname, "kappa": k})))
        }
        Lemma::ConcFct => {
            let x = random_tiny_space(rng.random_range(2..=5), rng);
            let k = kappa(cfg, rng, 0.0, 1.0);
            Ok((check_conc_fct(&x, k, cfg.tol)?, json!({"x": rec(&x), "kappa": k})))
        }
        Lemma::KeyLpN | Lemma::KeyFN => {
            let n = 3;
            let xs: Vec<FiniteMMSpace> = (0..n).map(|_| random_tiny_space(rng.random_range(1..=2), rng)).collect();
            let ks: Vec<f64> = (0..n).map(|_| kappa(cfg, rng, 0.0, if lemma == Lemma::KeyLpN { 1.0 / 3.0 } else { 1.0 / 6.0 })).collect();
            let recs: Vec<serde_json::Value> = xs.iter().map(rec).collect();
            let refs: Vec<&FiniteMMSpace> = xs.iter().collect();
            if lemma == Lemma::KeyLpN {
                let p = *[1.0, 2.0, f64::INFINITY].choose(rng).expect("nonempty");
                let c = check_key_lp_n(&refs, p, &ks, cfg, seed)?;
                Ok((c, json!({"factors": recs, "p": p, "kappas": ks})))
            } else {
                let choices = [("F_1^3", lp(1.0, 3)), ("F_2^3", lp(2.0, 3)), ("F_inf^3", lp(f64::INFINITY, 3)), ("F_cyc", builtins::f_cyc())];
                let (name, f) = choices.choose(rng).cloned().expect("nonempty");
                let c = check_key_f_n(&refs, &f, &ks, cfg, seed)?;
                Ok((c.with_prefix(&format!("F={name} ")), json!({"factors": recs, "F": name, "kappas": ks})))
            }
        }
        Lemma::LmLem => {
            let x = random_tiny_space(rng.random_range(2..=5), rng);
            let mu = random_weights(x.len(), rng);
            let nu = random_weights(x.len(), rng);
            let k = kappa(cfg, rng, 0.0, 0.5);
            let c = check_lm_lem(&x, &mu, &nu, k, cfg.tol, seed)?;
            Ok((c, json!({"x": rec(&x), "mu": mu, "nu": nu, "kappa": k})))
        }
        Lemma::Lprok => {
            let (x, y) = (random_tiny_space(rng.random_range(2..=3), rng), random_tiny_space(rng.random_range(2..=3), rng));
            let (mu, mu2) = (random_weights(x.len(), rng), random_weights(x.len(), rng));
            let (nu, nu2) = (random_weights(y.len(), rng), random_weights(y.len(), rng));
            let (name, f) = binary_family().choose(rng).cloned().expect("nonempty");
            let lambda = *[0.5, 1.0, 2.0].choose(rng).expect("nonempty");
            let r = lprok_product_check(x.dist(), &mu, &mu2, y.dist(), &nu, &nu2, &f, lambda)?;
            let c = Check::new(r.lhs, r.rhs, true, cfg.tol, format!("F={name} lambda={lambda} a={:.6} b={:.6}", r.prok_x, r.prok_y));
            Ok((c, json!({"x": rec(&x), "y": rec(&y), "mu": mu, "mu2": mu2, "nu": nu, "nu2": nu2, "F": name, "lambda": lambda})))
        }
        Lemma::Box1 => {
            let sp: Vec<FiniteMMSpace> = (0..4).map(|_| two_point(rng.random_range(0.2..2.0))).collect();
            let (name, f) = binary_family().choose(rng).cloned().expect("nonempty");
            let c = check_box1(&sp[0], &sp[1], &sp[2], &sp[3], &f, cfg.tol)?;
            let recs: Vec<serde_json::Value> = sp.iter().map(rec).collect();
            Ok((c.with_prefix(&format!("F={name} ")), json!({"spaces": recs, "F": name})))
        }
        Lemma::BoxProk => {
            let n = rng.random_range(2..=3);
            let x = random_tiny_space(n, rng);
            let den = *[4usize, 8].choose(rng).expect("nonempty");
            let mu = random_dyadic_weights(n, den, rng);
            let nu = random_dyadic_weights(n, den, rng);
            let c = check_box_prok(&x, &mu, &nu, cfg.tol)?;
            Ok((c, json!({"x": rec(&x), "mu": mu, "nu": nu})))
        }
        Lemma::LevyOd => {
            let x = random_tiny_space(rng.random_range(2..=6), rng);
            let k = kappa(cfg, rng, 0.0, 0.5);
            let lr = levy_radius(&x, k, cfg.budget, seed)?.value;
            let o = od(&x, k)?;
            Ok((Check::new(lr, o, true, cfg.tol, format!("kappa={k:.4}")), json!({"x": rec(&x), "kappa": k})))
        }
        Lemma::ProkKy => {
            let n = rng.random_range(2..=8);
            let w = random_weights(n, rng);
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = f
                .iter()
                .map(|&v| if rng.random_bool(0.5) { v + rng.random_range(-0.3..0.3) } else { v })
                .collect();
            Ok((check_prok_ky(&w, &f, &g, cfg.tol)?, json!({"weights": w, "f": f, "g": g})))
        }
    }
}

impl Check {
    fn with_prefix(mut self, p: &str) -> Self {
        self.detail.insert_str(0, p);
        self
    }
}

/// Both parts: α_{X^F}(2F(s)+) ≤ α_X(s) at every distance s of X and at
/// midpoints, and OD(X^F; −2κ) ≤ 4F(OD(X; −κ)).
pub fn check_key_1dim(x: &FiniteMMSpace, f: &MPFDescriptor, kappa: f64, tol: f64) -> Result<Check, BatteryError> {
    let xf = metric_transform(x, f)?;
    let mut parts = Vec::new();
    let ds = distinct_distances(x);
    let probes = ds.iter().skip(1).copied().chain(ds.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    for s in probes {
        let lhs = alpha_above(&xf, 2.0 * f.eval1(s));
        let rhs = concentration_function(x, s).upper;
        parts.push(Check::new(lhs, rhs, true, tol, format!("alpha part s={s:.6}")));
    }
    let lhs = od(&xf, 2.0 * kappa)?;
    let rhs = 4.0 * f.eval1(od(x, kappa)?);
    parts.push(Check::new(lhs, rhs, true, tol, format!("OD part kappa={kappa:.4}")));
    Ok(Check::worst(parts))
}

pub fn check_key_lp(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    p: f64,
    k1: f64,
    k2: f64,
    cfg: &BatteryConfig,
    seed: u64,
) -> Result<Check, BatteryError> {
    let xy = pair_product(x, y, &lp(p, 2))?;
    let (lhs, exact) = od_lower(&xy, k1 + k2, cfg.budget, seed)?;
    let rhs = od(x, k1)? + 2.0 * od(y, k2)?;
    Ok(Check::new(lhs, rhs, exact, cfg.tol, format!("p={p} kappa={k1:.4} kappa2={k2:.4}")))
}

pub fn check_key_f(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    f: &MPFDescriptor,
    k1: f64,
    k2: f64,
    cfg: &BatteryConfig,
    seed: u64,
) -> Result<Check, BatteryError> {
    let xy = pair_product(x, y, f)?;
    let (lhs, exact) = od_lower(&xy, 2.0 * (k1 + k2), cfg.budget, seed)?;
    let rhs = 4.0 * f.eval2(od(x, k1)?, 0.0) + 8.0 * f.eval2(0.0, od(y, k2)?);
    Ok(Check::new(lhs, rhs, exact, cfg.tol, format!("kappa={k1:.4} kappa2={k2:.4}")))
}

/// Both products must be small enough for exact OD.
pub fn check_lo(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    f: &MPFDescriptor,
    g: &MPFDescriptor,
    kappa: f64,
    tol: f64,
) -> Result<Check, BatteryError> {
    let lhs = od(&pair_product(x, y, f)?, kappa)?;
    let rhs = od(&pair_product(x, y, g)?, kappa)?;
    Ok(Check::new(lhs, rhs, true, tol, format!("kappa={kappa:.4}")))
}

/// OD(X; −κ) ≤ 2 inf{r : α_X(r) ≤ κ/2}, and α_X(r) ≤ sup{κ' : OD(X; −κ') ≥ r}
/// at every distance and midpoint r (checked as OD(X; −(α_X(r) − δ)) ≥ r).
pub fn check_conc_fct(x: &FiniteMMSpace, kappa: f64, tol: f64) -> Result<Check, BatteryError> {
    let ds = distinct_distances(x);
    let r_star = ds.iter().copied().find(|&d| alpha_above(x, d) <= 0.5 * kappa + 1e-12).unwrap_or(0.0);
    let mut parts = vec![Check::new(od(x, kappa)?, 2.0 * r_star, true, tol, format!("first part kappa={kappa:.4}"))];
    let probes = ds.iter().skip(1).copied().chain(ds.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    for r in probes {
        let a = concentration_function(x, r).upper;
        if a > 1e-6 {
            let k = a - 1e-7;
            parts.push(Check::new(r, od(x, k)?, true, tol, format!("second part r={r:.6} alpha={a:.6}")));
        }
    }
    Ok(Check::worst(parts))
}

fn lp_n_product(xs: &[&FiniteMMSpace], f: &MPFDescriptor) -> Result<FiniteMMSpace, ProductError> {
    let mut spec = ProductSpec::new(xs.to_vec(), f.clone());
    spec.triplet_samples = 0;
    product(&spec)
}

pub fn check_key_lp_n(
    xs: &[&FiniteMMSpace],
    p: f64,
    kappas: &[f64],
    cfg: &BatteryConfig,
    seed: u64,
) -> Result<Check, BatteryError> {
    let prod = lp_n_product(xs, &lp(p, xs.len()))?;
    let (lhs, exact) = od_lower(&prod, kappas.iter().sum(), cfg.budget, seed)?;
    let mut rhs = od(xs[0], kappas[0])?;
    for (x, &k) in xs.iter().zip(kappas).skip(1) {
        rhs += 2.0 * od(x, k)?;
    }
    Ok(Check::new(lhs, rhs, exact, cfg.tol, format!("p={p} N={}", xs.len())))
}

pub fn check_key_f_n(
    xs: &[&FiniteMMSpace],
    f: &MPFDescriptor,
    kappas: &[f64],
    cfg: &BatteryConfig,
    seed: u64,
) -> Result<Check, BatteryError> {
    let prod = lp_n_product(xs, f)?;
    let (lhs, exact) = od_lower(&prod, 2.0 * kappas.iter().sum::<f64>(), cfg.budget, seed)?;
    let axis = |i: usize, s: f64| {
        let mut a = vec![0.0; xs.len()];
        a[i] = s;
        f.eval_unchecked(&a)
    };
    let mut rhs = 4.0 * axis(0, od(xs[0], kappas[0])?);
    for (i, (x, &k)) in xs.iter().zip(kappas).enumerate().skip(1) {
        rhs += 8.0 * axis(i, od(x, k)?);
    }
    Ok(Check::new(lhs, rhs, exact, cfg.tol, format!("N={}", xs.len())))
}

/// Builds the subtransport plan from the Prokhorov solver, lowering λ
/// until its deficiency is below 1 − 2κ, then checks the Lévy-mean bound
/// over the OD witnesses, distance functions and sampled observables.
pub fn check_lm_lem(x: &FiniteMMSpace, mu: &[f64], nu: &[f64], kappa: f64, tol: f64, seed: u64) -> Result<Check, BatteryError> {
    let mut plan = None;
    for lambda in [1.0, 0.1, 0.01, 0.001] {
        let p = prokhorov(x.dist(), mu, nu, lambda)?.plan;
        if p.deficiency < 1.0 - 2.0 * kappa {
            plan = Some(p);
            break;
        }
    }
    let plan = plan.ok_or(BatteryError::BadPlan)?;
    if !plan_is_valid(x.dist(), mu, nu, &plan) {
        return Err(BatteryError::BadPlan);
    }
    let (xm, xn) = (x.with_weights(mu.to_vec())?, x.with_weights(nu.to_vec())?);
    let (om, wm, _) = od_exact(&xm, kappa)?;
    let (on, wn, _) = od_exact(&xn, kappa)?;
    let mut fs = vec![wm, wn];
    fs.extend((0..x.len()).map(|a| x.dist().row(a).to_vec()));
    fs.extend(sample_observables(x, 64, seed));
    let lm = |w: &FiniteMMSpace, f: &[f64]| -> Result<f64, SpaceError> { Ok(levy_mean(&pushforward_values(w, f)?).lm) };
    let mut lhs = 0.0f64;
    for f in &fs {
        lhs = lhs.max((lm(&xm, f)? - lm(&xn, f)?).abs());
    }
    let rhs = plan.radius + om + on;
    Ok(Check::new(lhs, rhs, true, tol, format!("kappa={kappa:.4} eps={:.6} def={:.6}", plan.radius, plan.deficiency)))
}

/// Sum form for l_p products, max form for every F.
pub fn check_box1(
    x: &FiniteMMSpace,
    y: &FiniteMMSpace,
    z: &FiniteMMSpace,
    w: &FiniteMMSpace,
    f: &MPFDescriptor,
    tol: f64,
) -> Result<Check, BatteryError> {
    let r = box_product_check(x, y, z, w, f, tol)?;
    let is_lp = matches!(f.expr(), crate::mpf::Expr::Lp { .. } | crate::mpf::Expr::Max);
    let rhs = if is_lp { r.rhs_sum } else { r.rhs_max };
    Ok(Check::new(r.lhs, rhs, true, tol, format!("box_xy={:.6} box_zw={:.6}", r.box_xy, r.box_zw)))
}

pub fn check_box_prok(x: &FiniteMMSpace, mu: &[f64], nu: &[f64], tol: f64) -> Result<Check, BatteryError> {
    let b = box_distance(&x.with_weights(mu.to_vec())?, &x.with_weights(nu.to_vec())?, BoxMode::ExactTiny)?.value();
    let p = prokhorov(x.dist(), mu, nu, 1.0)?.value;
    Ok(Check::new(b, 2.0 * p, true, tol, format!("prok={p:.6}")))
}

/// Pushforwards of one weight vector by f and g, on the union of values.
pub fn check_prok_ky(w: &[f64], f: &[f64], g: &[f64], tol: f64) -> Result<Check, BatteryError> {
    let mut pos: Vec<f64> = f.iter().chain(g).copied().collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    let place = |vals: &[f64]| {
        let mut m = vec![0.0; pos.len()];
        for (&v, &wi) in vals.iter().zip(w) {
            m[pos.partition_point(|&q| q < v)] += wi;
        }
        m
    };
    let d = DistMatrix::from_fn(pos.len(), |i, j| (pos[i] - pos[j]).abs());
    let lhs = prokhorov(&d, &place(f), &place(g), 1.0)?.value;
    let rhs = ky_fan_weighted(w, f, g);
    Ok(Check::new(lhs, rhs, true, tol, format!("atoms={}", pos.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(lemma: Lemma) -> BatteryReport {
        run_inequality_battery(lemma, &BatteryConfig { trials: 6, seed: 3, ..Default::default() }).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for l in Lemma::ALL {
            assert_eq!(Lemma::parse(l.name()).unwrap(), l);
        }
        assert!(Lemma::parse("nope").is_err());
    }

    #[test]
    fn every_battery_passes_a_few_trials() {
        for l in Lemma::ALL {
            let r = small(l);
            assert!(r.all_pass(), "{}: {:?}", l.name(), r.rows.iter().find(|r| !r.check.pass));
        }
    }

    #[test]
    fn batteries_are_reproducible() {
        assert_eq!(small(Lemma::KeyF), small(Lemma::KeyF));
    }

    #[test]
    fn key_1dim_on_a_four_point_space() {
        let mut rng = substream(11, 0);
        let x = random_tiny_space(4, &mut rng);
        assert!(check_key_1dim(&x, &builtins::h1(), 0.2, DEFAULT_TOL).unwrap().pass);
    }
}
