//! File formats: spaces and descriptors as JSON, tables as CSV with
//! values rounded to 12 significant digits, and the sphere-sample cache.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mmlab::gallery::{sphere_points, sphere_space, SphereMetric};
use mmlab::mpf::builtins;
use mmlab::{FiniteMMSpace, MPFDescriptor};

pub const CACHE_ENV: &str = "MML_CACHE_DIR";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_space(path: &Path) -> Result<FiniteMMSpace> {
    FiniteMMSpace::from_json(&read_text(path)?).with_context(|| format!("validating {}", path.display()))
}

pub fn save_space(path: &Path, x: &FiniteMMSpace) -> Result<()> {
    write_text(path, &x.to_json())
}

/// A builtin name such as `fp:2` or `h1`, or a path to a JSON descriptor.
pub fn load_fn(spec: &str) -> Result<MPFDescriptor> {
    let path = Path::new(spec);
    if path.is_file() {
        return MPFDescriptor::from_json(&read_text(path)?).with_context(|| format!("parsing {spec}"));
    }
    builtins::parse(spec).with_context(|| format!("unknown function {spec:?}"))
}

/// A comma-separated list of numbers, or a path to a JSON array.
pub fn load_vec(spec: &str) -> Result<Vec<f64>> {
    let path = Path::new(spec);
    if path.is_file() {
        return serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {spec}"));
    }
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number {t:?} in {spec:?}")))
        .collect()
}

/// A comma-separated list of indices, or a path to a JSON array.
pub fn load_map(spec: &str) -> Result<Vec<usize>> {
    let path = Path::new(spec);
    if path.is_file() {
        return serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {spec}"));
    }
    spec.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad index {t:?} in {spec:?}")))
        .collect()
}

/// Rounds to 12 significant digits and prints the shortest form of the
/// rounded value, so equal inputs always give equal text. Magnitudes
/// outside [1e-4, 1e15) use exponent notation.
pub fn fmt12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Table { writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn save(self, path: &Path) -> Result<()> {
        let bytes = self.writer.into_inner().context("flushing CSV")?;
        write_text(path, &String::from_utf8(bytes)?)
    }
}

fn metric_name(m: SphereMetric) -> &'static str {
    match m {
        SphereMetric::Chordal => "chordal",
        SphereMetric::Geodesic => "geodesic",
    }
}

pub fn parse_metric(s: &str) -> Result<SphereMetric> {
    match s {
        "chordal" => Ok(SphereMetric::Chordal),
        "geodesic" => Ok(SphereMetric::Geodesic),
        _ => bail!("metric must be chordal or geodesic, got {s:?}"),
    }
}

fn cache_path(dir: &Path, n: usize, r: f64, count: usize, metric: SphereMetric, seed: u64) -> PathBuf {
    // The points do not depend on the metric, but keeping it in the name
    // makes the cache directory self-describing.
    dir.join(format!("sphere_n{n}_r{}_N{count}_{}_seed{seed}.json", fmt12(r), metric_name(metric)))
}

/// Uniform sphere sample, memoized under $MML_CACHE_DIR when it is set.
pub fn sphere_sample(n: usize, r: f64, count: usize, metric: SphereMetric, seed: u64) -> Result<FiniteMMSpace> {
    if n < 1 || count < 2 || !(r > 0.0 && r.is_finite()) {
        bail!("sphere needs n ≥ 1, N ≥ 2 and r > 0");
    }
    let cached = std::env::var_os(CACHE_ENV).map(|d| cache_path(Path::new(&d), n, r, count, metric, seed));
    let points = match &cached {
        Some(path) if path.is_file() => {
            serde_json::from_str(&read_text(path)?).with_context(|| format!("reading cache {}", path.display()))?
        }
        _ => {
            let pts = sphere_points(n, r, count, seed);
            if let Some(path) = &cached {
                write_text(path, &serde_json::to_string(&pts)?)?;
            }
            pts
        }
    };
    Ok(sphere_space(points, r, metric)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(0.1 + 0.2), "0.3");
        assert_eq!(fmt12(1.234567890123456), "1.23456789012");
        assert_eq!(fmt12(-2.5e-20), "-2.5e-20");
        assert_eq!(fmt12(1.332267629550187e-15), "1.33226762955e-15");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(f64::INFINITY), "inf");
    }

    #[test]
    fn lists_parse() {
        assert_eq!(load_vec("0.5, 0.25,0.25").unwrap(), vec![0.5, 0.25, 0.25]);
        assert_eq!(load_map("0,1,1").unwrap(), vec![0, 1, 1]);
        assert!(load_vec("a,b").is_err());
    }
}
