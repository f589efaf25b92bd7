//! Experiment suites: a serializable spec in, CSV, SVG, witnesses and a
//! pass/fail summary out.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mmlab::experiments::{
    box_product_suite, classifier_demo, collapse_1dim, lemma_batteries, sphere_od_decay_with, BoxConfig,
    CollapseConfig, SphereDecayConfig, COLLAPSE_EPS_MAX, COLLAPSE_P5_MAX, SLOPE_RANGE, THEOREM_BATTERIES,
};
use mmlab::invariants::battery::{BatteryConfig, Lemma, DEFAULT_TOL};
use mmlab::mpf::ClassifyConfig;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::io::{fmt12, sphere_sample, write_text, Table};
use crate::svg::{Chart, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteriesParams {
    /// Battery names as accepted by `mml battery`.
    pub lemmas: Vec<String>,
    pub config: BatteryConfig,
}

impl Default for BatteriesParams {
    fn default() -> Self {
        BatteriesParams {
            lemmas: THEOREM_BATTERIES.iter().map(|l| l.name().to_string()).collect(),
            config: BatteryConfig { seed: 7, ..Default::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub config: ClassifyConfig,
    pub tol: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams { config: ClassifyConfig::default(), tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", content = "params", rename_all = "snake_case")]
pub enum Suite {
    SphereOdDecay(SphereDecayConfig),
    #[serde(rename = "cex_1dim_collapse")]
    Cex1dimCollapse(CollapseConfig),
    LemmaBatteries(BatteriesParams),
    BoxConvergence(BoxConfig),
    ClassifierDemo(ClassifierParams),
}

pub const SUITE_NAMES: [&str; 5] =
    ["sphere_od_decay", "cex_1dim_collapse", "lemma_batteries", "box_convergence", "classifier_demo"];

impl Suite {
    pub fn default_for(name: &str) -> Option<Suite> {
        Some(match name {
            "sphere_od_decay" => Suite::SphereOdDecay(Default::default()),
            "cex_1dim_collapse" => Suite::Cex1dimCollapse(Default::default()),
            "lemma_batteries" => Suite::LemmaBatteries(Default::default()),
            "box_convergence" => Suite::BoxConvergence(Default::default()),
            "classifier_demo" => Suite::ClassifierDemo(Default::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::SphereOdDecay(_) => SUITE_NAMES[0],
            Suite::Cex1dimCollapse(_) => SUITE_NAMES[1],
            Suite::LemmaBatteries(_) => SUITE_NAMES[2],
            Suite::BoxConvergence(_) => SUITE_NAMES[3],
            Suite::ClassifierDemo(_) => SUITE_NAMES[4],
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Suite::SphereOdDecay(c) => c.seed = seed,
            Suite::Cex1dimCollapse(c) => c.seed = seed,
            Suite::LemmaBatteries(p) => p.config.seed = seed,
            Suite::BoxConvergence(c) => c.seed = seed,
            // The classifier is deterministic.
            Suite::ClassifierDemo(_) => {}
        }
    }

    pub fn set_tol(&mut self, tol: f64) {
        match self {
            Suite::SphereOdDecay(_) => {}
            Suite::Cex1dimCollapse(c) => c.tol = tol,
            Suite::LemmaBatteries(p) => p.config.tol = tol,
            Suite::BoxConvergence(c) => c.tol = tol,
            Suite::ClassifierDemo(p) => p.tol = tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(flatten)]
    pub suite: Suite,
    /// Output directory; defaults to `out/<suite>`.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "yes")]
    pub svg: bool,
}

fn yes() -> bool {
    true
}

impl ExperimentSpec {
    pub fn new(suite: Suite) -> Self {
        ExperimentSpec { suite, out: None, svg: true }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| Path::new("out").join(self.suite.name()))
    }
}

/// One asserted criterion of a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: String,
    pub assertions: Vec<Assertion>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn lines(&self) -> Vec<String> {
        self.assertions
            .iter()
            .map(|a| format!("[{}] {}/{}: {}", if a.pass { "PASS" } else { "FAIL" }, self.suite, a.name, a.detail))
            .collect()
    }
}

fn assertion(name: &str, pass: bool, detail: String) -> Assertion {
    Assertion { name: name.to_string(), pass, detail }
}

fn b(v: bool) -> String {
    v.to_string()
}

/// Runs the suite and writes `results.csv`, `spec.json`, `summary.json`,
/// `plot.svg` (when requested and meaningful) and `witnesses.json` (when
/// anything failed) into the output directory.
pub fn run_suite(spec: &ExperimentSpec) -> Result<Summary> {
    let dir = spec.out_dir();
    write_text(&dir.join("spec.json"), &serde_json::to_string_pretty(spec)?)?;
    let mut witnesses: Vec<serde_json::Value> = Vec::new();
    let mut chart: Option<(Chart, Vec<Series>)> = None;
    let name = spec.suite.name();

    let (table, assertions) = match &spec.suite {
        Suite::SphereOdDecay(cfg) => {
            let res = sphere_od_decay_with(cfg, |n| {
                sphere_sample(n, cfg.r, cfg.count, cfg.metric, cfg.seed)
                    .map_err(|e| mmlab::experiments::ExperimentError::BadSpec(format!("{e:#}")))
            })?;
            let mut t = Table::new(&["n", "od_lb", "evaluated"])?;
            for r in &res.rows {
                t.row(&[r.n.to_string(), fmt12(r.od), r.evaluated.to_string()])?;
            }
            chart = Some((
                Chart { title: "Observable diameter of S^n(1)", x_label: "n", y_label: "OD lower bound", log_x: true, log_y: true },
                vec![Series { name: format!("slope {}", fmt12(res.slope)), points: res.rows.iter().map(|r| (r.n as f64, r.od)).collect() }],
            ));
            let ok = res.slope_in_range;
            if !ok {
                witnesses.push(serde_json::to_value(&res)?);
            }
            let detail = format!("log-log slope {} (accepted range [{}, {}])", fmt12(res.slope), SLOPE_RANGE.0, SLOPE_RANGE.1);
            (t, vec![assertion("slope", ok, detail)])
        }
        Suite::Cex1dimCollapse(cfg) => {
            let res = collapse_1dim(cfg)?;
            let mut t = Table::new(&["quantity", "value", "bound", "pass"])?;
            let rows = [
                ("antipodal_defect", res.antipodal_defect, cfg.tol, res.pass_antipodal),
                ("cross_min", res.cross_min, cfg.s, res.pass_cross_range),
                ("cross_max", res.cross_max, cfg.s_n, res.pass_cross_range),
                ("transformed_min", res.transformed_min, res.y_distance, res.pass_transformed),
                ("transformed_p5", res.transformed_p5, COLLAPSE_P5_MAX, res.pass_transformed),
                ("certificate_epsilon", res.certificate.epsilon, COLLAPSE_EPS_MAX, res.pass_certificate),
                ("naive_first_epsilon", res.naive_first_eps.unwrap_or(f64::INFINITY), cfg.naive_eps_max, res.pass_certificate),
            ];
            for (q, v, bound, pass) in rows {
                t.row(&[q.to_string(), fmt12(v), fmt12(bound), b(pass)])?;
            }
            if !res.all_pass() {
                witnesses.push(serde_json::to_value(&res)?);
            }
            let naive = res.naive_first_eps.map_or("never".to_string(), fmt12);
            let a = vec![
                assertion("antipodal", res.pass_antipodal, format!("max |‖z − Tz‖ − s_n| = {}", fmt12(res.antipodal_defect))),
                assertion(
                    "cross_range",
                    res.pass_cross_range,
                    format!("cross distances in [{}, {}]", fmt12(res.cross_min), fmt12(res.cross_max)),
                ),
                assertion(
                    "transformed",
                    res.pass_transformed,
                    format!(
                        "min F = {} (≥ {}), p5 = {} (≤ {COLLAPSE_P5_MAX})",
                        fmt12(res.transformed_min),
                        fmt12(res.y_distance),
                        fmt12(res.transformed_p5)
                    ),
                ),
                assertion(
                    "certificate",
                    res.pass_certificate,
                    format!(
                        "ε(Y) = {} (≤ {COLLAPSE_EPS_MAX}), naive limit first accepted at ε = {naive}",
                        fmt12(res.certificate.epsilon)
                    ),
                ),
            ];
            (t, a)
        }
        Suite::LemmaBatteries(p) => {
            let lemmas = p.lemmas.iter().map(|s| Lemma::parse(s)).collect::<Result<Vec<_>, _>>()?;
            let reports = lemma_batteries(&lemmas, &p.config)?;
            let mut t = Table::new(&["lemma", "trial", "lhs", "rhs", "pass", "lhs_exact"])?;
            let mut a = Vec::new();
            for rep in &reports {
                for r in &rep.rows {
                    t.row(&[
                        rep.lemma.clone(),
                        r.trial.to_string(),
                        fmt12(r.check.lhs),
                        fmt12(r.check.rhs),
                        b(r.check.pass),
                        b(r.check.lhs_exact),
                    ])?;
                    if !r.check.pass {
                        witnesses.push(json!({ "lemma": rep.lemma, "trial": r.trial, "check": r.check, "instance": r.witness }));
                    }
                }
                a.push(assertion(&rep.lemma, rep.all_pass(), format!("{} of {} trials fail", rep.failures, rep.rows.len())));
            }
            (t, a)
        }
        Suite::BoxConvergence(cfg) => {
            let res = box_product_suite(cfg)?;
            let mut t = Table::new(&[
                "trial", "d_x", "d_y", "d_z", "d_w", "lhs", "box_xy", "box_zw", "rhs_sum", "rhs_max", "pass_sum", "pass_max",
            ])?;
            for r in &res.rows {
                let c = &r.check;
                let mut fields = vec![r.trial.to_string()];
                fields.extend(r.distances.iter().map(|&d| fmt12(d)));
                fields.extend([c.lhs, c.box_xy, c.box_zw, c.rhs_sum, c.rhs_max].map(fmt12));
                fields.extend([b(c.pass_sum), b(c.pass_max)]);
                t.row(&fields)?;
                if !c.pass_sum {
                    witnesses.push(serde_json::to_value(r)?);
                }
            }
            chart = Some((
                Chart { title: "Box distance of products", x_label: "trial", y_label: "distance", log_x: false, log_y: false },
                vec![
                    Series { name: "□(X×Z, Y×W)".into(), points: res.rows.iter().map(|r| (r.trial as f64, r.check.lhs)).collect() },
                    Series { name: "□(X,Y) + □(Z,W)".into(), points: res.rows.iter().map(|r| (r.trial as f64, r.check.rhs_sum)).collect() },
                ],
            ));
            let detail = format!("{} of {} trials exceed □(X,Y) + □(Z,W)", res.failures, res.rows.len());
            (t, vec![assertion("sum_bound", res.failures == 0, detail)])
        }
        Suite::ClassifierDemo(p) => {
            let res = classifier_demo(&p.config, p.tol)?;
            let mut t = Table::new(&["family", "condition", "holds", "n", "value"])?;
            let mut series = Vec::new();
            for row in &res.rows {
                for (k, c) in row.verdict.conditions.iter().enumerate() {
                    for (n, v, _) in &c.evidence {
                        t.row(&[row.family.clone(), (k + 1).to_string(), b(c.holds), n.to_string(), fmt12(*v)])?;
                    }
                }
                for (n, v) in &row.defect_at_2_0 {
                    t.row(&[row.family.clone(), "defect_at_2_0".into(), String::new(), n.to_string(), fmt12(*v)])?;
                }
                let sup = &row.verdict.conditions[1].evidence;
                series.push(Series { name: row.family.clone(), points: sup.iter().map(|e| (e.0 as f64, e.1)).collect() });
            }
            chart = Some((
                Chart { title: "Sup isotone defect on [0, max D]", x_label: "n", y_label: "defect", log_x: true, log_y: false },
                series,
            ));
            if !res.all_pass() {
                witnesses.push(serde_json::to_value(&res)?);
            }
            let verdict = |i: usize| {
                let v = &res.rows[i].verdict;
                (1..=5).map(|k| if v.holds(k) { '✓' } else { '✗' }).collect::<String>()
            };
            let a = vec![
                assertion("gn1", res.pass_g1, format!("conditions 1-5: {}", verdict(0))),
                assertion("gn2", res.pass_g2, format!("conditions 1-5: {}", verdict(1))),
                assertion("gn3", res.pass_g3, format!("conditions 1-5: {}", verdict(2))),
            ];
            (t, a)
        }
    };

    table.save(&dir.join("results.csv"))?;
    if spec.svg {
        if let Some((c, s)) = chart {
            write_text(&dir.join("plot.svg"), &c.render(&s))?;
        }
    }
    let witness_path = dir.join("witnesses.json");
    if witnesses.is_empty() {
        if witness_path.exists() {
            std::fs::remove_file(&witness_path).with_context(|| format!("removing stale {}", witness_path.display()))?;
        }
    } else {
        write_text(&witness_path, &serde_json::to_string_pretty(&witnesses)?)?;
    }
    let summary = Summary { suite: name.to_string(), assertions };
    write_text(&dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_round_trip() {
        for name in SUITE_NAMES {
            let spec = ExperimentSpec::new(Suite::default_for(name).unwrap());
            let text = serde_json::to_string(&spec).unwrap();
            assert!(text.starts_with(&format!("{{\"suite\":\"{name}\"")), "{text}");
            assert_eq!(serde_json::from_str::<ExperimentSpec>(&text).unwrap(), spec);
            assert_eq!(spec.suite.name(), name);
        }
    }

    #[test]
    fn partial_specs_fill_defaults() {
        let spec: ExperimentSpec =
            serde_json::from_str(r#"{"suite":"box_convergence","params":{"trials":3}}"#).unwrap();
        match spec.suite {
            Suite::BoxConvergence(c) => assert_eq!(c, BoxConfig { trials: 3, ..Default::default() }),
            other => panic!("{other:?}"),
        }
        assert!(spec.svg);
    }
}
