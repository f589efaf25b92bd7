//! Acceptance run: one line per criterion with its measurements, its
//! runtime against the budget, and PASS or FAIL. Exits nonzero if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use mmlab::distances::{prokhorov, prokhorov_bruteforce};
use mmlab::experiments::{
    box_product_suite, classifier_demo, collapse_1dim, lemma_batteries, sphere_od_decay, BoxConfig, CollapseConfig,
    SphereDecayConfig, COLLAPSE_EPS_MAX, COLLAPSE_P5_MAX, SLOPE_RANGE, THEOREM_BATTERIES,
};
use mmlab::invariants::battery::BatteryConfig;
use mmlab::invariants::{observable_diameter, Budget, OdMode};
use mmlab::mpf::{builtins, check_triangle_triplets, ClassifyConfig};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    summary: String,
}

fn run(id: usize, name: &str, budget: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] {id}. {name}: {} ({:.1}s of {}s{})",
        if pass { "PASS" } else { "FAIL" },
        out.summary,
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn strassen() -> Outcome {
    let worst = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = common::rng(1000 + t);
            let n = rng.random_range(1..=5);
            let x = common::random_space(n, &mut rng);
            let mu = common::random_measure(n, &mut rng);
            let nu = common::random_measure(n, &mut rng);
            let flow = prokhorov(x.dist(), &mu, &nu, 1.0).expect("valid measures").value;
            let brute = prokhorov_bruteforce(x.dist(), &mu, &nu, 1.0).expect("valid measures");
            (flow - brute).abs()
        })
        .reduce(|| 0.0, f64::max);
    Outcome { pass: worst <= 1e-6, summary: format!("200 spaces, max |flow − brute force| = {worst:.2e}") }
}

fn batteries() -> Outcome {
    let cfg = BatteryConfig { trials: 50, seed: 7, tol: 1e-6, ..Default::default() };
    match lemma_batteries(&THEOREM_BATTERIES, &cfg) {
        Ok(reports) => {
            let failed: Vec<String> =
                reports.iter().filter(|r| !r.all_pass()).map(|r| format!("{}({})", r.lemma, r.failures)).collect();
            let summary = if failed.is_empty() {
                format!("{} batteries × 50 trials, no failures", reports.len())
            } else {
                format!("failures in {}", failed.join(", "))
            };
            Outcome { pass: failed.is_empty(), summary }
        }
        Err(e) => Outcome { pass: false, summary: format!("error: {e}") },
    }
}

fn sphere_decay() -> Outcome {
    match sphere_od_decay(&SphereDecayConfig::default()) {
        Ok(r) => {
            let ods: Vec<String> = r.rows.iter().map(|row| format!("n={}:{:.4}", row.n, row.od)).collect();
            Outcome {
                pass: r.slope_in_range,
                summary: format!(
                    "OD lower bounds {}; slope {:.4} (need [{}, {}])",
                    ods.join(" "),
                    r.slope,
                    SLOPE_RANGE.0,
                    SLOPE_RANGE.1
                ),
            }
        }
        Err(e) => Outcome { pass: false, summary: format!("error: {e}") },
    }
}

fn classifier() -> Outcome {
    match classifier_demo(&ClassifyConfig::default(), 1e-6) {
        Ok(d) => {
            let sup2 = d.rows[1].verdict.conditions[1].evidence.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
            let i3: Vec<String> = d.rows[2].defect_at_2_0.iter().map(|e| format!("{}", e.1)).collect();
            Outcome {
                pass: d.all_pass(),
                summary: format!(
                    "G1 {} G2 {} (min sup-defect {sup2}) G3 {} (I_n(2,0) = {})",
                    ok(d.pass_g1),
                    ok(d.pass_g2),
                    ok(d.pass_g3),
                    i3.join(",")
                ),
            }
        }
        Err(e) => Outcome { pass: false, summary: format!("error: {e}") },
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "no"
    }
}

fn collapse() -> Outcome {
    match collapse_1dim(&CollapseConfig::default()) {
        Ok(c) => {
            let naive = match c.naive_first_eps {
                None => "rejected on all of [0, 0.5]".to_string(),
                Some(e) => format!("accepted at ε = {e}"),
            };
            Outcome {
                pass: c.all_pass(),
                summary: format!(
                    "(a) {} max |‖z−Tz‖−3| = {:.1e}; (b) {} cross ∈ [{:.4}, {:.4}]; (c) {} min F = {:.6}, p5 = {:.4} (need ≤ {COLLAPSE_P5_MAX}); (d) {} ε(Y) = {:.4} (need ≤ {COLLAPSE_EPS_MAX}), naive limit {naive}",
                    ok(c.pass_antipodal),
                    c.antipodal_defect,
                    ok(c.pass_cross_range),
                    c.cross_min,
                    c.cross_max,
                    ok(c.pass_transformed),
                    c.transformed_min,
                    c.transformed_p5,
                    ok(c.pass_certificate),
                    c.certificate.epsilon,
                ),
            }
        }
        Err(e) => Outcome { pass: false, summary: format!("error: {e}") },
    }
}

fn box_product() -> Outcome {
    match box_product_suite(&BoxConfig::default()) {
        Ok(s) => {
            let margin = s.rows.iter().map(|r| r.check.lhs - r.check.rhs_sum).fold(f64::NEG_INFINITY, f64::max);
            Outcome {
                pass: s.failures == 0,
                summary: format!("50 tuples, {} failures, max lhs − rhs = {margin:.3e}", s.failures),
            }
        }
        Err(e) => Outcome { pass: false, summary: format!("error: {e}") },
    }
}

fn falsifier() -> Outcome {
    let sq = check_triangle_triplets(&builtins::square(), 100_000, 10.0, 7);
    let rejected = sq.counterexample.is_some();
    let witness = sq
        .counterexample
        .as_ref()
        .map(|w| format!("F(a)={:.3} > F(b)+F(c)={:.3}", w.values[0], w.values[1] + w.values[2]))
        .unwrap_or_default();
    let survivors: Vec<(&str, bool)> = builtins::gallery()
        .into_par_iter()
        .map(|(name, f)| {
            let v = check_triangle_triplets(&f, 100_000, 10.0, 7);
            (name, v.no_violation_found)
        })
        .collect();
    let fallen: Vec<&str> = survivors.iter().filter(|s| !s.1).map(|s| s.0).collect();
    Outcome {
        pass: rejected && fallen.is_empty(),
        summary: format!(
            "square {} ({witness}); {}/12 gallery functions survive 10^5 triplets{}",
            if rejected { "rejected" } else { "NOT rejected" },
            12 - fallen.len(),
            if fallen.is_empty() { String::new() } else { format!(", falsified: {}", fallen.join(", ")) }
        ),
    }
}

fn oracle_od() -> Outcome {
    let results: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = common::rng(5000 + t);
            let n = rng.random_range(2..=5);
            let x = common::random_space(n, &mut rng);
            let kappa = rng.random_range(0.05..0.6);
            let delta = x.diameter() / 64.0;
            let exact = observable_diameter(&x, kappa, OdMode::ExactTiny, Budget::default(), t).expect("tiny").value;
            let oracle = common::od_mcshane_grid(&x, kappa, delta);
            ((exact - oracle).abs(), (exact - oracle).abs() / delta)
        })
        .collect();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let pass = results.iter().all(|r| r.1 <= 2.0 + 1e-9);
    Outcome { pass, summary: format!("100 spaces, max |exact − oracle| = {worst:.3}δ (need ≤ 2δ, δ = diam/64)") }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "Prokhorov flow vs subset enumeration", secs(10), strassen),
        run(2, "inequality batteries", secs(120), batteries),
        run(3, "sphere observable-diameter decay", secs(300), sphere_decay),
        run(4, "classifier separations", secs(30), classifier),
        run(5, "one-dimensional collapse", secs(300), collapse),
        run(6, "box product bound", secs(30), box_product),
        run(7, "triangle-triplet falsifier", secs(60), falsifier),
        run(8, "exact OD vs McShane-grid oracle", secs(120), oracle_od),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
