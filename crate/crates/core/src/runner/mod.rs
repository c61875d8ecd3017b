//! Experiment registry, deterministic seeding and report sinks.
//!
//! Every experiment takes an [`ExperimentConfig`] and produces an
//! [`ExperimentReport`]: a list of named checks, each comparing a measured
//! value with a predicted one, plus free-form observations. Reports are
//! written as one JSON line per check so that runs can be diffed.

mod experiments;

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{argument, Error, Result};
use crate::legops::DEFAULT_DENSE_CAP;

/// Crate version echoed into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SWLAB_OUT_DIR";

/// Output directory used when neither a path nor [`OUT_DIR_ENV`] is given.
pub const DEFAULT_OUT_DIR: &str = "swlab-out";

/// JSON-lines file collecting one record per check.
pub const RESULTS_FILE: &str = "results.jsonl";

/// Schema for the files in the `reports` directory.
pub const SCHEMA_FILE: &str = "report.schema.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub seed: u64,
    pub samples: usize,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Registry defaults for `experiment` with master seed 0 and no output.
    pub fn new(experiment: &str) -> Result<Self> {
        let spec = lookup(experiment)?;
        let d = spec.defaults;
        Ok(Self {
            experiment: spec.name.to_string(),
            n: d.n,
            p: d.p,
            q: d.q,
            seed: 0,
            samples: d.samples,
            tolerances: BTreeMap::new(),
            out: None,
        })
    }

    pub fn with_size(mut self, n: usize, p: usize, q: usize) -> Self {
        self.n = n;
        self.p = p;
        self.q = q;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_out(mut self, out: impl Into<PathBuf>) -> Self {
        self.out = Some(out.into());
        self
    }

    pub fn with_tolerance(mut self, check: &str, tolerance: f64) -> Self {
        self.tolerances.insert(check.to_string(), tolerance);
        self
    }

    /// Registry membership, `N >= 2` and the dense cap.
    pub fn validate(&self) -> Result<()> {
        let spec = lookup(&self.experiment)?;
        if self.n < 2 {
            return Err(argument(format!("N must be at least 2, got {}", self.n)));
        }
        if let Some(dim) = (spec.dense_dim)(self) {
            if dim > DEFAULT_DENSE_CAP {
                return Err(Error::CapExceeded { dimension: dim, cap: DEFAULT_DENSE_CAP });
            }
        }
        for (name, tol) in &self.tolerances {
            if !(tol.is_finite() && *tol >= 0.0) {
                return Err(argument(format!("tolerance for `{name}` must be a non-negative number")));
            }
        }
        Ok(())
    }

    /// Stem for files written by this run, unique per experiment and size.
    pub fn file_stem(&self) -> String {
        format!("{}_N{}_p{}_q{}", self.experiment, self.n, self.p, self.q)
    }
}

/// How a check compares its measured value with the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|measured - predicted| <= tolerance`.
    AbsDiff,
    /// `measured <= predicted + tolerance`.
    AtMost,
    /// `measured < predicted`.
    Below,
    /// `measured > predicted`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, predicted: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = measured.is_finite()
            && match comparison {
                Comparison::AbsDiff => (measured - predicted).abs() <= tolerance,
                Comparison::AtMost => measured <= predicted + tolerance,
                Comparison::Below => measured < predicted,
                Comparison::Above => measured > predicted,
            };
        Self { name: name.into(), measured, predicted, tolerance, comparison, pass }
    }

    pub fn close(name: impl Into<String>, measured: f64, predicted: f64, tolerance: f64) -> Self {
        Self::new(name, measured, predicted, tolerance, Comparison::AbsDiff)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, measured, bound, tolerance, Comparison::AtMost)
    }

    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, 0.0, Comparison::Below)
    }

    pub fn above(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, 0.0, Comparison::Above)
    }

    /// Exact equality of two counts.
    pub fn count(name: impl Into<String>, measured: u128, predicted: u128) -> Self {
        Self::close(name, measured as f64, predicted as f64, 0.0)
    }

    /// A residual that should vanish.
    pub fn zero(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self::at_most(name, residual, 0.0, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sub_seed: u64,
    pub checks: Vec<Check>,
    /// Measured quantities without a prediction to compare against.
    pub observations: BTreeMap<String, f64>,
    /// Files written next to the report, relative to the output directory.
    pub tables: Vec<String>,
    pub pass: bool,
    pub version: String,
    pub duration_seconds: f64,
}

impl ExperimentReport {
    /// Serialized report with the duration zeroed; identical across reruns.
    pub fn body(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.duration_seconds = 0.0;
        Ok(serde_json::to_string(&copy)?)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// One line of [`RESULTS_FILE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub experiment: String,
    pub check: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub seed: u64,
    pub samples: usize,
    pub measured: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn records(&self) -> Vec<ResultRecord> {
        self.checks
            .iter()
            .map(|c| ResultRecord {
                experiment: self.config.experiment.clone(),
                check: c.name.clone(),
                n: self.config.n,
                p: self.config.p,
                q: self.config.q,
                seed: self.config.seed,
                samples: self.config.samples,
                measured: c.measured,
                predicted: c.predicted,
                tolerance: c.tolerance,
                comparison: c.comparison,
                pass: c.pass,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub samples: usize,
}

/// Registry entry.
pub struct ExperimentSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub defaults: Defaults,
    /// Size of the largest dense matrix the experiment materializes, if any.
    dense_dim: fn(&ExperimentConfig) -> Option<usize>,
    run: fn(&mut Context) -> Result<()>,
}

/// State handed to an experiment body.
pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    checks: Vec<Check>,
    observations: BTreeMap<String, f64>,
    tables: Vec<String>,
}

impl Context<'_> {
    /// Tolerance for `check`, honoring overrides.
    pub fn tol(&self, check: &str, default: f64) -> f64 {
        self.config.tolerances.get(check).copied().unwrap_or(default)
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn observe(&mut self, name: impl Into<String>, value: f64) {
        self.observations.insert(name.into(), value);
    }

    /// Creates `name` inside the output directory, or returns `None` when the
    /// run has no output directory.
    pub fn table(&mut self, name: &str) -> Result<Option<fs::File>> {
        let Some(dir) = &self.config.out else { return Ok(None) };
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(argument(format!("table name `{name}` must be a plain file name")));
        }
        fs::create_dir_all(dir)?;
        let file = fs::File::create(dir.join(name))?;
        self.tables.push(name.to_string());
        Ok(Some(file))
    }
}

pub fn registry() -> &'static [ExperimentSpec] {
    experiments::REGISTRY
}

pub fn lookup(name: &str) -> Result<&'static ExperimentSpec> {
    registry()
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

/// First eight bytes of `SHA-256(seed_le || name)`.
pub fn sub_seed(master: u64, experiment: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(experiment.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Runs one experiment. Tables go to `config.out` when it is set; the report
/// itself is only written by [`emit`].
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let spec = lookup(&config.experiment)?;
    let start = Instant::now();
    let mut ctx = Context {
        config,
        seed: sub_seed(config.seed, spec.name),
        checks: Vec::new(),
        observations: BTreeMap::new(),
        tables: Vec::new(),
    };
    (spec.run)(&mut ctx)?;
    let pass = !ctx.checks.is_empty() && ctx.checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        config: config.clone(),
        sub_seed: ctx.seed,
        checks: ctx.checks,
        observations: ctx.observations,
        tables: ctx.tables,
        pass,
        version: VERSION.to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Output directory from an explicit path, then [`OUT_DIR_ENV`], then
/// [`DEFAULT_OUT_DIR`].
pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT_DIR),
    }
}

/// Appends the report's records to [`RESULTS_FILE`], writes the full report to
/// `reports/<stem>.json` and refreshes the schema.
pub fn emit(report: &ExperimentReport, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir.join("reports"))?;
    write_schema(dir)?;
    let mut jsonl = OpenOptions::new().create(true).append(true).open(dir.join(RESULTS_FILE))?;
    for rec in report.records() {
        serde_json::to_writer(&mut jsonl, &rec)?;
        jsonl.write_all(b"\n")?;
    }
    let path = dir.join("reports").join(format!("{}.json", report.config.file_stem()));
    fs::write(&path, serde_json::to_string_pretty(report)?)?;
    Ok(path)
}

pub fn write_schema(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(SCHEMA_FILE);
    fs::write(&path, serde_json::to_string_pretty(&report_schema())?)?;
    Ok(path)
}

/// JSON Schema of [`ExperimentReport`].
pub fn report_schema() -> serde_json::Value {
    let number = json!({"type": "number"});
    let count = json!({"type": "integer", "minimum": 0});
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": "https://swlab.invalid/report.schema.json",
        "title": "swlab experiment report",
        "type": "object",
        "additionalProperties": false,
        "required": ["config", "sub_seed", "checks", "observations", "tables", "pass", "version", "duration_seconds"],
        "properties": {
            "config": {
                "type": "object",
                "additionalProperties": false,
                "required": ["experiment", "N", "p", "q", "seed", "samples", "tolerances", "out"],
                "properties": {
                    "experiment": {"enum": registry().iter().map(|s| s.name).collect::<Vec<_>>()},
                    "N": {"type": "integer", "minimum": 2},
                    "p": count,
                    "q": count,
                    "seed": count,
                    "samples": count,
                    "tolerances": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
                    "out": {"type": ["string", "null"]}
                }
            },
            "sub_seed": count,
            "checks": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": false,
                    "required": ["name", "measured", "predicted", "tolerance", "comparison", "pass"],
                    "properties": {
                        "name": {"type": "string"},
                        "measured": {"type": ["number", "null"]},
                        "predicted": number,
                        "tolerance": {"type": "number", "minimum": 0},
                        "comparison": {"enum": ["abs-diff", "at-most", "below", "above"]},
                        "pass": {"type": "boolean"}
                    }
                }
            },
            "observations": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
            "tables": {"type": "array", "items": {"type": "string"}},
            "pass": {"type": "boolean"},
            "version": {"type": "string"},
            "duration_seconds": {"type": "number", "minimum": 0}
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Smoke,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Suite::Smoke),
            "full" => Ok(Suite::Full),
            other => Err(argument(format!("unknown suite `{other}` (expected smoke or full)"))),
        }
    }
}

/// The configurations making up a suite, in reporting order.
pub fn suite_configs(suite: Suite, seed: u64) -> Vec<ExperimentConfig> {
    let mk = |name: &str, n: usize, p: usize, q: usize| {
        ExperimentConfig::new(name).expect("registered").with_size(n, p, q).with_seed(seed)
    };
    let mut out = vec![
        mk("young-check", 2, 3, 0),
        mk("young-check", 2, 2, 2),
        mk("haar-relations", 2, 1, 1),
        mk("haar-relations", 2, 2, 1),
        mk("sigma-decay", 2, 1, 1),
        mk("sigma-decay", 2, 2, 1),
        mk("cond-expectation", 2, 0, 0),
        mk("commutant-dims", 2, 2, 0),
        mk("commutant-dims", 2, 1, 1),
        mk("span-growth", 2, 2, 0),
        mk("span-growth", 2, 3, 0),
        mk("relative-gap", 2, 1, 1),
        mk("crossed-center", 2, 2, 0),
        mk("crossed-center", 2, 1, 1),
        mk("compression-check", 2, 2, 0),
        mk("compression-check", 2, 2, 1),
        mk("trace-table", 2, 3, 0),
        mk("trace-table", 2, 2, 1),
        mk("trace-inequality", 2, 2, 0),
        mk("trace-inequality", 2, 2, 1),
        mk("spectral-binning", 2, 0, 0),
    ];
    if suite == Suite::Full {
        out.extend([
            mk("young-check", 3, 4, 0),
            mk("young-check", 3, 2, 2),
            mk("haar-relations", 3, 1, 1),
            mk("haar-relations", 4, 1, 1),
            mk("sigma-decay", 3, 1, 1),
            mk("sigma-decay", 4, 1, 1),
            mk("limit-formula", 2, 1, 1),
            mk("cond-expectation", 4, 0, 0),
            mk("cond-expectation", 8, 0, 0),
            mk("commutant-dims", 3, 2, 0),
            mk("commutant-dims", 3, 1, 1),
            mk("span-growth", 3, 2, 0),
            mk("relative-gap", 4, 1, 1),
            mk("trace-table", 2, 3, 3),
            mk("trace-inequality", 3, 3, 2),
        ]);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFailure {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub reports: Vec<ExperimentReport>,
    pub failures: Vec<RunFailure>,
    pub pass: bool,
}

/// Runs every configuration of `suite` on the rayon pool. Experiment errors are
/// collected instead of aborting the suite. With an output directory, reports
/// are emitted in suite order once all runs have finished.
pub fn run_all(suite: Suite, seed: u64, out: Option<&Path>) -> Result<SuiteSummary> {
    let configs: Vec<ExperimentConfig> = suite_configs(suite, seed)
        .into_iter()
        .map(|c| match out {
            Some(dir) => c.with_out(dir),
            None => c,
        })
        .collect();
    let results: Vec<Result<ExperimentReport>> = configs.par_iter().map(run).collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (config, result) in configs.into_iter().zip(results) {
        match result {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(RunFailure { experiment: config.experiment.clone(), config, error: e.to_string() }),
        }
    }
    if let Some(dir) = out {
        for r in &reports {
            emit(r, dir)?;
        }
        fs::write(
            dir.join(format!("summary_{}.json", serde_json::to_value(suite)?.as_str().unwrap_or("suite"))),
            serde_json::to_string_pretty(&json!({
                "suite": suite,
                "seed": seed,
                "pass": failures.is_empty() && reports.iter().all(|r| r.pass),
                "experiments": reports.iter().map(|r| json!({
                    "experiment": r.config.experiment,
                    "N": r.config.n,
                    "p": r.config.p,
                    "q": r.config.q,
                    "pass": r.pass,
                    "failed_checks": r.failed_checks().map(|c| c.name.clone()).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "errors": failures,
            }))?,
        )?;
    }
    let pass = failures.is_empty() && reports.iter().all(|r| r.pass);
    Ok(SuiteSummary { suite, reports, failures, pass })
}
