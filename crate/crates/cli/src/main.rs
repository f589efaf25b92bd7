//! `mml`: command-line front end for finite metric measure spaces.
//!
//! Exit status is 0 on success, 1 when a check or suite assertion fails
//! and 2 on errors (bad input, missing files, invalid parameters).

mod io;
mod suites;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mmlab::distances::{box_distance, concentration_certificate, ky_fan, prokhorov, BoxMode, CertConfig};
use mmlab::gallery::{build_counterexample_1dim, build_counterexample_2dim, glued_interval_sphere};
use mmlab::invariants::battery::{run_inequality_battery, BatteryConfig, Lemma, DEFAULT_TOL};
use mmlab::invariants::{concentration_function, levy_radius, observable_diameter, od_auto, Budget, OdMode};
use mmlab::mpf::{builtins, check_triangle_triplets_with, classify_sequence, defect_table, ClassifyConfig, TripletConfig};
use mmlab::product::{metric_transform, product, ProductSpec};
use mmlab::space::mm_isomorphic;
use mmlab::MPFDescriptor;
use serde::Serialize;
use serde_json::json;

use crate::io::{fmt12, load_fn, load_map, load_space, load_vec, parse_metric, save_space, write_text, Table};
use crate::suites::{run_suite, ExperimentSpec, Suite, SUITE_NAMES};

const DEFAULT_SEED: u64 = 7;
const ISO_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "mml", version, about = "Metric measure spaces: products, invariants, distances and experiment suites")]
struct Cli {
    /// Master seed (default 7); suites and specs use it in place of their own.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Tolerance override for checks, batteries and suites.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate and compare spaces.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Metric-preserving functions: falsifier, defects, sequence classifier.
    #[command(subcommand)]
    Mpf(MpfCmd),
    /// F-product of spaces.
    Product {
        #[arg(long = "space", required = true)]
        spaces: Vec<PathBuf>,
        #[arg(long = "fn")]
        f: String,
        /// Skip the sampled triangle-triplet pre-check.
        #[arg(long)]
        no_precheck: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// (X, F ∘ d) for a unary F.
    Transform {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "fn")]
        f: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Observable diameter, Lévy radius, concentration function.
    #[command(subcommand)]
    Invariant(InvariantCmd),
    /// Prokhorov, box and Ky Fan distances.
    #[command(subcommand)]
    Dist(DistCmd),
    /// Concentration certificate for a map from a large space onto a small one.
    Cert {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Comma list or JSON array of target indices, one per source point.
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 200)]
        observables: usize,
    },
    /// Builders for the sphere and counterexample spaces.
    #[command(subcommand)]
    Gallery(GalleryCmd),
    /// Randomized inequality batteries; `all` runs every battery.
    Battery {
        lemma: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Failing instances as JSON.
        #[arg(long)]
        witnesses: Option<PathBuf>,
    },
    /// Run an experiment suite and write CSV, SVG and a summary.
    Experiment {
        /// One of the suite names, or `all`.
        suite: String,
        /// JSON spec; parameters left out take their defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory (per suite `out/<suite>` otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_svg: bool,
        /// Print the resolved spec instead of running it.
        #[arg(long)]
        print_spec: bool,
    },
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Validate a space and optionally write its canonical form.
    Validate {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a measure-preserving isometry.
    Iso { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum MpfCmd {
    /// Triangle-triplet falsifier; exits 1 with a witness if F fails.
    Check {
        #[arg(long = "fn")]
        f: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
    },
    /// Isotone defect table on [0, D]^N.
    Defect {
        #[arg(long = "fn")]
        f: String,
        #[arg(long = "D", default_value_t = 8.0)]
        d: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        h: f64,
        #[arg(long)]
        probe: Option<f64>,
        /// Full table as CSV (one column per coordinate, then the defect).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Test the five defect conditions on a builtin sequence.
    Classify {
        #[arg(long)]
        family: String,
        #[arg(long = "n", value_delimiter = ',', default_values_t = [1u64, 2, 4, 8, 16])]
        n_list: Vec<u64>,
        #[arg(long = "D", value_delimiter = ',', default_values_t = [4.0, 8.0])]
        d_list: Vec<f64>,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        h: f64,
        #[arg(long, default_value_t = 8.0)]
        probe: f64,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Print the descriptor JSON, or list the builtin gallery.
    Show {
        #[arg(long = "fn")]
        f: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Heuristic,
    Auto,
}

#[derive(Args)]
struct BudgetArgs {
    /// Observables tried by the heuristic.
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    #[arg(long, default_value_t = 2000)]
    local_steps: usize,
}

impl BudgetArgs {
    fn get(&self) -> Budget {
        Budget { functions: self.budget, local_steps: self.local_steps }
    }
}

#[derive(Subcommand)]
enum InvariantCmd {
    Od {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        kappa: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    Levy {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    Conc {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        r: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoxModeArg {
    Exact,
    Bound,
}

#[derive(Subcommand)]
enum DistCmd {
    /// prok_λ between two measures on one space.
    Prok {
        #[arg(long)]
        space: PathBuf,
        /// Comma list or JSON array; the space's own measure if omitted.
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        nu: String,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Optimal subtransport plan as a CSV matrix.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    Box {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, value_enum, default_value_t = BoxModeArg::Exact)]
        mode: BoxModeArg,
        #[arg(long, default_value_t = 2000)]
        iterations: usize,
    },
    /// Ky Fan distance between two functions on a space.
    Ky {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
}

#[derive(Subcommand)]
enum GalleryCmd {
    /// Uniform sample of S^n(r).
    Sphere {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long = "N", default_value_t = 2000)]
        count: usize,
        #[arg(long, default_value = "chordal")]
        metric: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Two points thickened by antipodal sphere samples; writes a bundle directory.
    Counterexample1 {
        /// A builtin sequence name, or any function used as a constant sequence.
        #[arg(long = "fn")]
        f: String,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long, default_value_t = 3.0)]
        sn: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long = "N", default_value_t = 1500)]
        count: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Two-factor construction with its four-point limit; writes a bundle directory.
    Counterexample2 {
        #[arg(long = "fn")]
        f: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        sn: f64,
        #[arg(long)]
        tn: f64,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long = "N", default_value_t = 200)]
        count: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Interval glued to a sphere, with its limit; writes a bundle directory.
    Glued {
        #[arg(long)]
        n: usize,
        #[arg(long = "N", default_value_t = 600)]
        count: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Writes a line to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(line: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// A builtin sequence (gn1, fn2, ...) or a single function held constant.
fn load_family(spec: &str) -> Result<Box<dyn Fn(u64) -> MPFDescriptor + Send + Sync>> {
    if let Ok((family, _)) = builtins::family(spec) {
        return Ok(family);
    }
    let f = load_fn(spec)?;
    Ok(Box::new(move |_| f.clone()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring threads")?;
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match cli.cmd {
        Cmd::Space(SpaceCmd::Validate { file, output }) => {
            let x = load_space(&file)?;
            if let Some(out) = output {
                save_space(&out, &x)?;
            }
            print_json(&json!({
                "points": x.len(),
                "diameter": x.diameter(),
                "has_coords": x.coords().is_some(),
            }))?;
        }
        Cmd::Space(SpaceCmd::Iso { a, b }) => {
            let tol = cli.tol.unwrap_or(ISO_TOL);
            let perm = mm_isomorphic(&load_space(&a)?, &load_space(&b)?, tol)?;
            print_json(&json!({ "isomorphic": perm.is_some(), "permutation": perm }))?;
        }
        Cmd::Mpf(MpfCmd::Check { f, samples, horizon }) => {
            let desc = load_fn(&f)?;
            let mut cfg = TripletConfig { samples, horizon, seed, ..Default::default() };
            if let Some(t) = cli.tol {
                cfg.rel_tol = t;
            }
            let v = check_triangle_triplets_with(&desc, cfg);
            print_json(&v)?;
            return Ok(status(v.no_violation_found && v.zero_set_witness.is_none()));
        }
        Cmd::Mpf(MpfCmd::Defect { f, d, h, probe, csv }) => {
            let desc = load_fn(&f)?;
            let rep = defect_table(&desc, d, h, probe.unwrap_or(2.0 * d))?;
            if let Some(path) = csv {
                let mut header: Vec<String> = (1..=rep.arity).map(|k| format!("x{k}")).collect();
                header.push("defect".into());
                let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>())?;
                let m = rep.axis.len();
                for (idx, &v) in rep.table.iter().enumerate() {
                    let mut fields: Vec<String> = (0..rep.arity)
                        .map(|k| fmt12(rep.axis[idx / m.pow((rep.arity - 1 - k) as u32) % m]))
                        .collect();
                    fields.push(fmt12(v));
                    t.row(&fields)?;
                }
                t.save(&path)?;
            }
            print_json(&json!({
                "arity": rep.arity,
                "d_bound": rep.d_bound,
                "h": rep.h,
                "probe_bound": rep.probe_bound,
                "sup_defect": rep.sup_defect,
                "argmax": rep.argmax,
            }))?;
        }
        Cmd::Mpf(MpfCmd::Classify { family, n_list, d_list, h, probe, tau }) => {
            let (fam, limit) = builtins::family(&family).with_context(|| format!("unknown sequence {family:?}"))?;
            let cfg = ClassifyConfig { d_list, n_list, h, probe, tau, ..Default::default() };
            print_json(&classify_sequence(&*fam, &limit, &cfg)?)?;
        }
        Cmd::Mpf(MpfCmd::Show { f, output }) => match f {
            Some(f) => {
                let text = load_fn(&f)?.to_json();
                match output {
                    Some(path) => write_text(&path, &text)?,
                    None => emit(&text)?,
                }
            }
            None => {
                for (name, desc) in builtins::gallery() {
                    emit(&format!("{name}\t{}", desc.to_json()))?;
                }
            }
        },
        Cmd::Product { spaces, f, no_precheck, output } => {
            let loaded = spaces.iter().map(|p| load_space(p)).collect::<Result<Vec<_>>>()?;
            let mut spec = ProductSpec::new(loaded.iter().collect(), load_fn(&f)?);
            spec.seed = seed;
            if no_precheck {
                spec.triplet_samples = 0;
            }
            let x = product(&spec)?;
            save_space(&output, &x)?;
            print_json(&json!({ "points": x.len(), "diameter": x.diameter() }))?;
        }
        Cmd::Transform { space, f, output } => {
            let x = metric_transform(&load_space(&space)?, &load_fn(&f)?)?;
            save_space(&output, &x)?;
            print_json(&json!({ "points": x.len(), "diameter": x.diameter() }))?;
        }
        Cmd::Invariant(InvariantCmd::Od { space, kappa, mode, budget }) => {
            let x = load_space(&space)?;
            let est = match mode {
                ModeArg::Exact => observable_diameter(&x, kappa, OdMode::ExactTiny, budget.get(), seed)?,
                ModeArg::Heuristic => observable_diameter(&x, kappa, OdMode::HeuristicLb, budget.get(), seed)?,
                ModeArg::Auto => od_auto(&x, kappa, budget.get(), seed)?,
            };
            print_json(&est)?;
        }
        Cmd::Invariant(InvariantCmd::Levy { space, kappa, budget }) => {
            print_json(&levy_radius(&load_space(&space)?, kappa, budget.get(), seed)?)?;
        }
        Cmd::Invariant(InvariantCmd::Conc { space, r }) => {
            print_json(&concentration_function(&load_space(&space)?, r))?;
        }
        Cmd::Dist(DistCmd::Prok { space, mu, nu, lambda, plan }) => {
            let x = load_space(&space)?;
            let mu = match mu {
                Some(m) => load_vec(&m)?,
                None => x.weight().to_vec(),
            };
            let p = prokhorov(x.dist(), &mu, &load_vec(&nu)?, lambda)?;
            if let Some(path) = plan {
                let header: Vec<String> = (0..x.len()).map(|j| format!("to{j}")).collect();
                let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>())?;
                for row in &p.plan.matrix {
                    t.row(&row.iter().map(|&v| fmt12(v)).collect::<Vec<_>>())?;
                }
                t.save(&path)?;
            }
            print_json(&json!({
                "lambda": p.lambda,
                "value": p.value,
                "radius": p.plan.radius,
                "deficiency": p.plan.deficiency,
            }))?;
        }
        Cmd::Dist(DistCmd::Box { x, y, mode, iterations }) => {
            let mode = match mode {
                BoxModeArg::Exact => BoxMode::ExactTiny,
                BoxModeArg::Bound => BoxMode::Bound { iterations, seed },
            };
            print_json(&box_distance(&load_space(&x)?, &load_space(&y)?, mode)?)?;
        }
        Cmd::Dist(DistCmd::Ky { space, f, g }) => {
            let x = load_space(&space)?;
            print_json(&json!({ "ky_fan": ky_fan(&x, &load_vec(&f)?, &load_vec(&g)?)? }))?;
        }
        Cmd::Cert { source, target, map, observables } => {
            let cfg = CertConfig { observables, seed, ..Default::default() };
            let cert = concentration_certificate(&load_space(&source)?, &load_space(&target)?, &load_map(&map)?, &cfg)?;
            print_json(&cert)?;
        }
        Cmd::Gallery(g) => gallery(g, seed)?,
        Cmd::Battery { lemma, trials, csv, witnesses } => {
            let lemmas = if lemma == "all" { Lemma::ALL.to_vec() } else { vec![Lemma::parse(&lemma)?] };
            let cfg = BatteryConfig { trials, seed, tol: cli.tol.unwrap_or(DEFAULT_TOL), ..Default::default() };
            let mut table = Table::new(&["lemma", "trial", "lhs", "rhs", "pass", "lhs_exact", "detail"])?;
            let mut failed = Vec::new();
            for l in lemmas {
                let rep = run_inequality_battery(l, &cfg)?;
                for r in &rep.rows {
                    table.row(&[
                        rep.lemma.clone(),
                        r.trial.to_string(),
                        fmt12(r.check.lhs),
                        fmt12(r.check.rhs),
                        r.check.pass.to_string(),
                        r.check.lhs_exact.to_string(),
                        r.check.detail.clone(),
                    ])?;
                    if !r.check.pass {
                        failed.push(json!({ "lemma": rep.lemma, "trial": r.trial, "check": r.check, "instance": r.witness }));
                    }
                }
                let mark = if rep.all_pass() { "PASS" } else { "FAIL" };
                emit(&format!("[{mark}] {}: {} of {} trials fail", rep.lemma, rep.failures, rep.rows.len()))?;
            }
            if let Some(path) = csv {
                table.save(&path)?;
            }
            if let Some(path) = witnesses {
                write_text(&path, &serde_json::to_string_pretty(&failed)?)?;
            }
            return Ok(status(failed.is_empty()));
        }
        Cmd::Experiment { suite, spec, out, no_svg, print_spec } => {
            let specs = experiment_specs(&suite, spec.as_deref(), out.as_deref(), cli.seed, cli.tol)?;
            let mut pass = true;
            for mut s in specs {
                s.svg &= !no_svg;
                if print_spec {
                    print_json(&s)?;
                    continue;
                }
                let summary = run_suite(&s)?;
                for line in summary.lines() {
                    emit(&line)?;
                }
                pass &= summary.all_pass();
            }
            return Ok(status(pass));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn experiment_specs(
    suite: &str,
    spec: Option<&Path>,
    out: Option<&Path>,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<Vec<ExperimentSpec>> {
    let mut specs = match (suite, spec) {
        (_, Some(path)) => {
            let s: ExperimentSpec = serde_json::from_str(&io::read_text(path)?)
                .with_context(|| format!("parsing experiment spec {}", path.display()))?;
            if suite != s.suite.name() {
                bail!("spec is for suite {} but {suite} was requested", s.suite.name());
            }
            vec![s]
        }
        ("all", None) => SUITE_NAMES.iter().filter_map(|n| Suite::default_for(n)).map(ExperimentSpec::new).collect(),
        (name, None) => {
            let s = Suite::default_for(name)
                .with_context(|| format!("unknown suite {name:?}; expected one of {}", SUITE_NAMES.join(", ")))?;
            vec![ExperimentSpec::new(s)]
        }
    };
    let several = specs.len() > 1;
    for s in &mut specs {
        if let Some(seed) = seed {
            s.suite.set_seed(seed);
        }
        if let Some(tol) = tol {
            s.suite.set_tol(tol);
        }
        if let Some(dir) = out {
            s.out = Some(if several { dir.join(s.suite.name()) } else { dir.to_path_buf() });
        }
    }
    Ok(specs)
}

fn gallery(cmd: GalleryCmd, seed: u64) -> Result<()> {
    match cmd {
        GalleryCmd::Sphere { n, r, count, metric, output } => {
            let x = io::sphere_sample(n, r, count, parse_metric(&metric)?, seed)?;
            save_space(&output, &x)?;
            print_json(&json!({ "points": x.len(), "diameter": x.diameter() }))?;
        }
        GalleryCmd::Counterexample1 { f, s, sn, n, count, output } => {
            let family = load_family(&f)?;
            let c = build_counterexample_1dim(&*family, s, sn, n, count, seed)?;
            save_space(&output.join("x.json"), &c.x)?;
            save_space(&output.join("x_n.json"), &c.x_n)?;
            save_space(&output.join("transformed.json"), &c.transformed)?;
            save_space(&output.join("y_lim.json"), &c.y_lim)?;
            save_space(&output.join("naive_limit.json"), &c.naive_limit)?;
            write_text(&output.join("map.json"), &serde_json::to_string(&c.p_map)?)?;
            write_text(&output.join("f_n.json"), &c.f_n.to_json())?;
            let meta = json!({
                "s": c.s, "s_n": c.s_n, "eta": c.eta, "r_n": c.r_n, "k_n": c.k_n, "k_capped": c.k_capped,
                "points": c.x_n.len(), "antipodal_defect": c.antipodal_defect(), "y_distance": c.y_lim.d(0, 1),
            });
            write_text(&output.join("meta.json"), &serde_json::to_string_pretty(&meta)?)?;
            print_json(&meta)?;
        }
        GalleryCmd::Counterexample2 { f, s, t, sn, tn, n, count, output } => {
            let family = load_family(&f)?;
            let c = build_counterexample_2dim(&*family, s, t, sn, tn, n, count, seed)?;
            save_space(&output.join("x_n.json"), &c.x_n)?;
            save_space(&output.join("y_n.json"), &c.y_n)?;
            save_space(&output.join("z.json"), &c.z)?;
            write_text(&output.join("f_n.json"), &c.f_n.to_json())?;
            let meta = json!({
                "s": c.s, "t": c.t, "s_n": c.s_n, "t_n": c.t_n, "k_n": c.k_n, "l_n": c.l_n, "capped": c.capped,
                "triplet": c.triplet, "stats": c.stats,
            });
            write_text(&output.join("meta.json"), &serde_json::to_string_pretty(&meta)?)?;
            print_json(&meta)?;
        }
        GalleryCmd::Glued { n, count, output } => {
            let g = glued_interval_sphere(n, count, seed)?;
            save_space(&output.join("x_n.json"), &g.x_n)?;
            save_space(&output.join("x_limit.json"), &g.x_limit)?;
            write_text(&output.join("map.json"), &serde_json::to_string(&g.p_map)?)?;
            let meta = json!({ "n": n, "points": g.x_n.len(), "interval_atoms": g.interval_atoms });
            write_text(&output.join("meta.json"), &serde_json::to_string_pretty(&meta)?)?;
            print_json(&meta)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_tree_is_consistent() {
        Cli::command().debug_assert();
    }
}
