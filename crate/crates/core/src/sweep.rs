//! Replicated parameter sweeps and theory-versus-simulation summaries.
//!
//! A plan fixes `(d, a)`, a list of scales `n`, and either a list of `λ`
//! (`p = λ/n`) or a list of `c` (`p = c ln n / n`). Every
//! `(point, replicate)` pair gets its own seed derived from the plan seed, and
//! rows are emitted in canonical order, so reruns are byte-identical
//! regardless of the worker count.
//!
//! `rows.csv` columns, in order:
//! `point, replicate, n, value, lambda, p, seed, sides, occupied_count, largest,
//! second_largest, isolated_count, component_count, is_connected,
//! isolated_or_giant, largest_over_ln_n, normalized_largest, lambda_c,
//! giant_fraction_theory, c_conn, c_iso_giant`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::components::Clustering;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sampler::{c_log_to_p, lambda_to_p, sample};
use crate::theory::{connectivity_thresholds, critical_lambda, extinction, occupied_normalizer};
use crate::torus::TorusSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `p = λ / n`.
    Lambda,
    /// `p = c ln(n) / n`.
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub d: usize,
    pub a: Vec<f64>,
    pub n_values: Vec<u64>,
    pub regime: Regime,
    pub values: Vec<f64>,
    pub replicates: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Also keep per-row component-size histograms.
    pub histograms: bool,
}

/// Flat `key = value` configuration; `#` starts a comment.
pub type ConfigMap = BTreeMap<String, String>;

const KNOWN_KEYS: &[&str] = &[
    "d",
    "a",
    "n",
    "regime",
    "values",
    "replicates",
    "seed",
    "out",
    "histograms",
];

pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().to_ascii_lowercase();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{s}'")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{raw}'")))
}

impl SweepPlan {
    /// Builds and validates a plan from configuration keys.
    pub fn from_config(map: &ConfigMap) -> Result<Self> {
        let get = |k: &str| {
            map.get(k)
                .ok_or_else(|| Error::InvalidParameter(format!("missing key '{k}'")))
        };
        let a: Vec<f64> = parse_list("a", get("a")?)?;
        let d = match map.get("d") {
            Some(raw) => parse_one("d", raw)?,
            None => a.len(),
        };
        let regime = match get("regime")?.to_ascii_lowercase().as_str() {
            "lambda" => Regime::Lambda,
            "log" | "c" => Regime::Log,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "regime must be 'lambda' or 'log', got '{other}'"
                )))
            }
        };
        let plan = SweepPlan {
            d,
            a,
            n_values: parse_list("n", get("n")?)?,
            regime,
            values: parse_list("values", get("values")?)?,
            replicates: match map.get("replicates") {
                Some(raw) => parse_one("replicates", raw)?,
                None => 1,
            },
            seed: match map.get("seed") {
                Some(raw) => parse_one("seed", raw)?,
                None => 0,
            },
            out: map.get("out").map(PathBuf::from),
            histograms: match map.get("histograms") {
                Some(raw) => parse_one("histograms", raw)?,
                None => false,
            },
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::DimensionTooSmall(self.d));
        }
        if self.a.len() != self.d {
            return Err(Error::InvalidSpec(format!(
                "d = {} but {} aspect ratios given",
                self.d,
                self.a.len()
            )));
        }
        if self.n_values.is_empty() || self.values.is_empty() {
            return Err(Error::InvalidParameter(
                "n and values must be non-empty".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter(
                "replicates must be at least 1".into(),
            ));
        }
        for point in self.points() {
            let spec = TorusSpec::new(self.d, &self.a, point.n)?;
            self.probability(&spec, point.value)?;
        }
        Ok(())
    }

    /// Parameter points in canonical order: `n` outer, value inner.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::with_capacity(self.n_values.len() * self.values.len());
        for &n in &self.n_values {
            for &value in &self.values {
                out.push(SweepPoint {
                    index: out.len(),
                    n,
                    value,
                });
            }
        }
        out
    }

    fn probability(&self, spec: &TorusSpec, value: f64) -> Result<f64> {
        match self.regime {
            Regime::Lambda => lambda_to_p(spec, value),
            Regime::Log => c_log_to_p(spec, value),
        }
    }

    /// Seed of one replicate at one point.
    pub fn row_seed(&self, point: usize, replicate: u32) -> u64 {
        derive_seed(derive_seed(self.seed, point as u64), replicate as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub n: u64,
    pub value: f64,
}

/// Theory columns of a point; functions of `(d, a, n, value)` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTheory {
    /// Effective `λ = p n`.
    pub lambda: f64,
    pub p: f64,
    pub lambda_c: f64,
    pub giant_fraction_theory: f64,
    pub c_conn: f64,
    pub c_iso_giant: f64,
    /// `λ (∏ a_i) n^{d-1}`.
    pub normalizer: f64,
}

fn point_theory(plan: &SweepPlan, point: &SweepPoint) -> Result<PointTheory> {
    let spec = TorusSpec::new(plan.d, &plan.a, point.n)?;
    let p = plan.probability(&spec, point.value)?;
    let lambda = p * point.n as f64;
    let thresholds = connectivity_thresholds(&plan.a)?;
    let giant = if lambda > 0.0 {
        extinction(lambda, &plan.a)?.giant_fraction()
    } else {
        0.0
    };
    Ok(PointTheory {
        lambda,
        p,
        lambda_c: critical_lambda(&plan.a)?,
        giant_fraction_theory: giant,
        c_conn: thresholds.c_conn,
        c_iso_giant: thresholds.c_iso_giant,
        normalizer: occupied_normalizer(&spec, lambda),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: usize,
    pub replicate: u32,
    pub n: u64,
    pub value: f64,
    pub lambda: f64,
    pub p: f64,
    pub seed: u64,
    /// Side lengths joined with `x`.
    pub sides: String,
    pub occupied_count: u64,
    pub largest: u64,
    pub second_largest: u64,
    pub isolated_count: u64,
    pub component_count: u64,
    pub is_connected: bool,
    pub isolated_or_giant: bool,
    pub largest_over_ln_n: f64,
    pub normalized_largest: f64,
    pub lambda_c: f64,
    pub giant_fraction_theory: f64,
    pub c_conn: f64,
    pub c_iso_giant: f64,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Per-row `(size, count)` histograms when the plan asks for them.
    pub histograms: Option<Vec<Vec<(u64, u64)>>>,
}

struct RowResult {
    row: SweepRow,
    histogram: Option<Vec<(u64, u64)>>,
}

fn run_row(
    plan: &SweepPlan,
    point: &SweepPoint,
    theory: &PointTheory,
    replicate: u32,
) -> Result<RowResult> {
    let started = Instant::now();
    let spec = TorusSpec::new(plan.d, &plan.a, point.n)?;
    let seed = plan.row_seed(point.index, replicate);
    let config = sample(&spec, theory.p, seed)?;
    let stats = Clustering::new(&config).stats();
    let ln_n = (point.n as f64).ln();
    let row = SweepRow {
        point: point.index,
        replicate,
        n: point.n,
        value: point.value,
        lambda: theory.lambda,
        p: theory.p,
        seed,
        sides: spec
            .sides()
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("x"),
        occupied_count: stats.occupied_count,
        largest: stats.largest,
        second_largest: stats.second_largest,
        isolated_count: stats.isolated_count,
        component_count: stats.component_count,
        is_connected: stats.is_connected,
        isolated_or_giant: stats.isolated_or_giant(),
        largest_over_ln_n: stats.largest as f64 / ln_n,
        normalized_largest: stats.largest as f64 / theory.normalizer,
        lambda_c: theory.lambda_c,
        giant_fraction_theory: theory.giant_fraction_theory,
        c_conn: theory.c_conn,
        c_iso_giant: theory.c_iso_giant,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok(RowResult {
        histogram: plan.histograms.then(|| stats.histogram()),
        row,
    })
}

/// Runs every `(point, replicate)` pair on `threads` workers (0 = rayon default).
pub fn run_sweep(plan: &SweepPlan, threads: usize) -> Result<SweepOutput> {
    plan.validate()?;
    let points = plan.points();
    let theories = points
        .iter()
        .map(|pt| point_theory(plan, pt))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|i| (0..plan.replicates).map(move |r| (i, r)))
        .collect();
    let job = |&(i, r): &(usize, u32)| run_row(plan, &points[i], &theories[i], r);

    #[cfg(feature = "parallel")]
    let results: Vec<Result<RowResult>> = {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(job).collect())
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<RowResult>> = {
        let _ = threads;
        tasks.iter().map(job).collect()
    };

    let mut rows = Vec::with_capacity(results.len());
    let mut histograms = plan.histograms.then(Vec::new);
    for res in results {
        let res = res?;
        rows.push(res.row);
        if let (Some(all), Some(h)) = (histograms.as_mut(), res.histogram) {
            all.push(h);
        }
    }
    Ok(SweepOutput { rows, histograms })
}

/// Writes rows as RFC-4180 CSV with a header line.
pub fn write_rows_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Summary statistics of one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: usize,
    pub n: u64,
    pub value: f64,
    pub lambda: f64,
    pub replicates: usize,
    pub mean_normalized_largest: f64,
    /// Half-width of the normal-approximation 95% interval (0 for one replicate).
    pub ci_half_width: f64,
    pub giant_fraction_theory: f64,
    pub abs_deviation: f64,
    pub mean_largest_over_ln_n: f64,
    pub max_second_largest: u64,
    pub fraction_connected: f64,
    pub fraction_with_isolated: f64,
    pub fraction_isolated_or_giant: f64,
}

/// Groups rows by point (in order of first appearance) and summarizes each.
pub fn compare_report(rows: &[SweepRow]) -> Vec<PointSummary> {
    let mut order: Vec<usize> = Vec::new();
    let mut groups: BTreeMap<usize, Vec<&SweepRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry(row.point)
            .or_insert_with(|| {
                order.push(row.point);
                Vec::new()
            })
            .push(row);
    }
    order
        .into_iter()
        .map(|pt| {
            let group = &groups[&pt];
            let k = group.len() as f64;
            let mean = group.iter().map(|r| r.normalized_largest).sum::<f64>() / k;
            let ci_half_width = if group.len() > 1 {
                let var = group
                    .iter()
                    .map(|r| (r.normalized_largest - mean).powi(2))
                    .sum::<f64>()
                    / (k - 1.0);
                1.96 * (var / k).sqrt()
            } else {
                0.0
            };
            let frac =
                |f: &dyn Fn(&SweepRow) -> bool| group.iter().filter(|r| f(r)).count() as f64 / k;
            let first = group[0];
            PointSummary {
                point: pt,
                n: first.n,
                value: first.value,
                lambda: first.lambda,
                replicates: group.len(),
                mean_normalized_largest: mean,
                ci_half_width,
                giant_fraction_theory: first.giant_fraction_theory,
                abs_deviation: (mean - first.giant_fraction_theory).abs(),
                mean_largest_over_ln_n: group.iter().map(|r| r.largest_over_ln_n).sum::<f64>() / k,
                max_second_largest: group.iter().map(|r| r.second_largest).max().unwrap_or(0),
                fraction_connected: frac(&|r| r.is_connected),
                fraction_with_isolated: frac(&|r| r.isolated_count > 0),
                fraction_isolated_or_giant: frac(&|r| r.isolated_or_giant),
            }
        })
        .collect()
}

/// JSON summary record of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub plan: SweepPlan,
    pub points: Vec<PointSummary>,
}

/// Writes `rows.csv`, `summary.json`, `timings.csv` and, when present,
/// `histograms.csv` into `dir`. Only `timings.csv` varies between reruns.
pub fn write_outputs(plan: &SweepPlan, output: &SweepOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_rows_csv(&output.rows, fs::File::create(dir.join("rows.csv"))?)?;

    let summary = SweepSummary {
        plan: plan.clone(),
        points: compare_report(&output.rows),
    };
    let json = crate::json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("summary.json"), json + "\n")?;

    let mut timings =
        csv::Writer::from_path(dir.join("timings.csv")).map_err(|e| Error::Io(e.to_string()))?;
    timings
        .write_record(["point", "replicate", "wall_time_ms"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for row in &output.rows {
        timings
            .write_record([
                row.point.to_string(),
                row.replicate.to_string(),
                format!("{:.3}", row.wall_time_ms),
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    timings.flush()?;

    if let Some(hists) = &output.histograms {
        let mut w = csv::Writer::from_path(dir.join("histograms.csv"))
            .map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(["point", "replicate", "size", "count"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for (row, hist) in output.rows.iter().zip(hists) {
            for (size, count) in hist {
                w.write_record([
                    row.point.to_string(),
                    row.replicate.to_string(),
                    size.to_string(),
                    count.to_string(),
                ])
                .map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        w.flush()?;
    }
    Ok(())
}
