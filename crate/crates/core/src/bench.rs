// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte-Carlo benchmark over preset models.
//!
//! Every replication draws one series per model from the master seed and the
//! replication index, runs each method on it and records `N_hat - N`, the mean
//! squared fitting error and the wall time of the detect call alone. Records
//! are sorted by `(model, replication, method)` before averaging, so metric
//! values do not depend on how replications were scheduled.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{BaselineConfig, BaselineDetector};
use crate::error::{Error, Result};
use crate::mosum::GridConfig;
use crate::sdll::{detect_mosum_sdll, SdllConfig, SELECTION_RULE};
use crate::signal::{sample_series, NoiseSpec, PiecewiseSignal, Preset, PresetDescription};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MosumSdll,
    MosumBaseline,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::MosumSdll, Method::MosumBaseline];

    pub fn name(self) -> &'static str {
        match self {
            Method::MosumSdll => "mosum-sdll",
            Method::MosumBaseline => "mosum-baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mosum-sdll" | "sdll" => Ok(Method::MosumSdll),
            "mosum-baseline" | "baseline" | "mosum" => Ok(Method::MosumBaseline),
            _ => Err(Error::invalid_input(format!(
                "unknown method `{s}` (expected mosum-sdll or mosum-baseline)"
            ))),
        }
    }
}

/// Output encoding of [`emit_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` selects JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub models: Vec<Preset>,
    pub methods: Vec<Method>,
    pub reps: usize,
    pub seed: u64,
    pub grid: GridConfig,
    pub sdll: SdllConfig,
    pub baseline: BaselineConfig,
    /// Run replications on the rayon pool. Metric values are unaffected.
    pub parallel: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            models: vec![Preset::Et, Preset::Eet],
            methods: Method::ALL.to_vec(),
            reps: 100,
            seed: 7,
            grid: GridConfig::default(),
            sdll: SdllConfig::default(),
            baseline: BaselineConfig::default(),
            parallel: true,
            out: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::invalid_input("benchmark needs at least one model"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid_input("benchmark needs at least one method"));
        }
        if self.reps == 0 {
            return Err(Error::invalid_input("benchmark needs at least one replication"));
        }
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].contains(m) {
                return Err(Error::invalid_input(format!("model `{m}` listed twice")));
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::invalid_input(format!("method `{m}` listed twice")));
            }
        }
        self.sdll.validate()?;
        self.baseline.validate()
    }
}

/// One method on one replication of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub model: Preset,
    pub method: Method,
    pub rep: usize,
    pub n_hat: usize,
    pub error: i64,
    /// `(1/T) * sum_t (f_hat_t - f_t)^2`.
    pub mse_fit: f64,
    pub seconds: f64,
}

/// Arithmetic means over replications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mean_error: f64,
    pub mean_abs_error: f64,
    pub mean_sq_error: f64,
    pub mse_fit: f64,
}

impl Metrics {
    /// Means of `errors` (`N_hat - N`) and `mse_fits`, summed in slice order.
    pub fn from_samples(errors: &[i64], mse_fits: &[f64]) -> Self {
        let n = errors.len() as f64;
        let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / n;
        Self {
            mean_error: mean(&mut errors.iter().map(|&e| e as f64)),
            mean_abs_error: mean(&mut errors.iter().map(|&e| e.abs() as f64)),
            mean_sq_error: mean(&mut errors.iter().map(|&e| (e * e) as f64)),
            mse_fit: mse_fits.iter().sum::<f64>() / mse_fits.len() as f64,
        }
    }

    /// `E(d^2) >= E(d)^2`, `E|d| >= |E(d)|` and `E(f_hat - f)^2 >= 0`, up to
    /// rounding in the last place.
    pub fn moments_consistent(&self) -> bool {
        let slack = 1e-12 * (1.0 + self.mean_sq_error);
        self.mean_sq_error + slack >= self.mean_error * self.mean_error
            && self.mean_abs_error + 1e-12 >= self.mean_error.abs()
            && self.mse_fit >= 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub model: Preset,
    pub method: Method,
    pub num_changes: usize,
    pub metrics: Metrics,
    pub mean_seconds: f64,
}

/// Settings echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub presets: Vec<PresetDescription>,
    pub grid: GridConfig,
    pub sdll: SdllConfig,
    pub selection_rule: String,
    pub baseline: BaselineConfig,
}

impl ConfigEcho {
    fn of(config: &BenchConfig) -> Self {
        Self {
            reps: config.reps,
            seed: config.seed,
            methods: config.methods.clone(),
            presets: config.models.iter().map(|m| m.describe()).collect(),
            grid: config.grid.clone(),
            sdll: config.sdll.clone(),
            selection_rule: SELECTION_RULE.to_string(),
            baseline: BaselineConfig {
                cache_path: None,
                ..config.baseline.clone()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: ConfigEcho,
    /// One entry per `(model, method)`, models outermost.
    pub summaries: Vec<MethodSummary>,
    /// Sorted by `(model, rep, method)` in config order.
    pub records: Vec<ReplicationRecord>,
}

pub const METRIC_NAMES: [&str; 5] = [
    "mean_error",
    "mean_abs_error",
    "mean_sq_error",
    "mse_fit",
    "mean_seconds",
];

impl BenchReport {
    pub fn summary(&self, model: Preset, method: Method) -> Option<&MethodSummary> {
        self.summaries
            .iter()
            .find(|s| s.model == model && s.method == method)
    }

    /// `(model, method, metric, value)` rows, five per summary.
    pub fn metric_rows(&self) -> Vec<(String, String, &'static str, f64)> {
        let mut rows = Vec::with_capacity(5 * self.summaries.len());
        for s in &self.summaries {
            let m = &s.metrics;
            let values = [m.mean_error, m.mean_abs_error, m.mean_sq_error, m.mse_fit, s.mean_seconds];
            for (name, value) in METRIC_NAMES.iter().zip(values) {
                rows.push((s.model.to_string(), s.method.to_string(), *name, value));
            }
        }
        rows
    }

    /// The deterministic part of the report: every metric row except timing,
    /// with values in shortest round-trip form. Identical configs give
    /// byte-identical sections.
    pub fn metrics_section(&self) -> String {
        let mut out = String::new();
        for (model, method, name, value) in self.metric_rows() {
            if name != "mean_seconds" {
                out.push_str(&format!("{model},{method},{name},{value:?}\n"));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# mosum-sdll benchmark report")?;
        writeln!(out, "# reps={} seed={}", self.config.reps, self.config.seed)?;
        for p in &self.config.presets {
            writeln!(out, "# preset {}", serde_json::to_string(p)?)?;
        }
        writeln!(out, "# grid {}", serde_json::to_string(&self.config.grid)?)?;
        writeln!(out, "# sdll {}", serde_json::to_string(&self.config.sdll)?)?;
        writeln!(out, "# selection_rule {}", self.config.selection_rule)?;
        writeln!(out, "# baseline {}", serde_json::to_string(&self.config.baseline)?)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "method", "metric", "value"])?;
        for (model, method, name, value) in self.metric_rows() {
            w.write_record([model, method, name.to_string(), format!("{value:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
    }
}

struct Prepared {
    model: Preset,
    signal_mean: Vec<f64>,
    num_changes: usize,
    signal: PiecewiseSignal,
    noise: NoiseSpec,
    baseline: Option<BaselineDetector>,
}

fn prepare(config: &BenchConfig, model: Preset) -> Result<Prepared> {
    let (signal, noise) = model.build();
    let len = signal.len();
    let grid = config.grid.build(len)?;
    if config.methods.contains(&Method::MosumSdll) {
        // one-off calibration, kept out of the timed region
        config.sdll.kappa(len, &grid)?;
    }
    let baseline = if config.methods.contains(&Method::MosumBaseline) {
        Some(BaselineDetector::prepare(len, &config.baseline, &grid)?)
    } else {
        None
    };
    Ok(Prepared {
        model,
        signal_mean: signal.mean_function(),
        num_changes: signal.num_changes(),
        noise: noise.with_seed(config.seed),
        signal,
        baseline,
    })
}

fn run_replication(
    config: &BenchConfig,
    p: &Prepared,
    rep: usize,
) -> Result<Vec<ReplicationRecord>> {
    let series = sample_series(&p.signal, &p.noise, rep as u64)?;
    let mut out = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let start = Instant::now();
        let seg = match method {
            Method::MosumSdll => detect_mosum_sdll(&series, &config.grid, &config.sdll)?.segmentation,
            Method::MosumBaseline => p
                .baseline
                .as_ref()
                .expect("prepared for baseline")
                .detect(&series)?,
        };
        let seconds = start.elapsed().as_secs_f64();
        let mse_fit = seg
            .fitted
            .iter()
            .zip(&p.signal_mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / p.signal_mean.len() as f64;
        out.push(ReplicationRecord {
            model: p.model,
            method,
            rep,
            n_hat: seg.n_hat,
            error: seg.n_hat as i64 - p.num_changes as i64,
            mse_fit,
            seconds,
        });
    }
    Ok(out)
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &model in &config.models {
        let p = prepare(config, model)?;
        let per_rep: Vec<Vec<ReplicationRecord>> = if config.parallel {
            (0..config.reps)
                .into_par_iter()
                .map(|r| run_replication(config, &p, r))
                .collect::<Result<_>>()?
        } else {
            (0..config.reps)
                .map(|r| run_replication(config, &p, r))
                .collect::<Result<_>>()?
        };
        let mut model_records: Vec<ReplicationRecord> = per_rep.into_iter().flatten().collect();
        let method_rank = |m: Method| config.methods.iter().position(|&x| x == m).unwrap();
        model_records.sort_by_key(|r| (r.rep, method_rank(r.method)));

        for &method in &config.methods {
            let mine: Vec<&ReplicationRecord> =
                model_records.iter().filter(|r| r.method == method).collect();
            let errors: Vec<i64> = mine.iter().map(|r| r.error).collect();
            let fits: Vec<f64> = mine.iter().map(|r| r.mse_fit).collect();
            summaries.push(MethodSummary {
                model,
                method,
                num_changes: p.num_changes,
                metrics: Metrics::from_samples(&errors, &fits),
                mean_seconds: mine.iter().map(|r| r.seconds).sum::<f64>() / mine.len() as f64,
            });
        }
        records.extend(model_records);
    }
    Ok(BenchReport {
        config: ConfigEcho::of(config),
        summaries,
        records,
    })
}

/// Writes `report` to `path`.
pub fn emit_report(report: &BenchReport, format: ReportFormat, path: &Path) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        ReportFormat::Csv => report.write_csv(out),
        ReportFormat::Json => report.write_json(out),
    }
}
