// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end: simulate, detect, path, bench, presets.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mosum_sdll::baseline::{BaselineConfig, BaselineDetector};
use mosum_sdll::bench::{emit_report, run_benchmark, BenchConfig, Method, ReportFormat};
use mosum_sdll::io::{read_series_csv, write_json, write_series, DetectionReport};
use mosum_sdll::mosum::{aggregate, compute_fields, write_fields_csv, GridConfig};
use mosum_sdll::path::{generate_path, ImportanceMode};
use mosum_sdll::sdll::{detect_mosum_sdll, SdllConfig, ThresholdRule};
use mosum_sdll::signal::{sample_series, Preset};
use mosum_sdll::{Error, Result};

#[derive(Parser)]
#[command(name = "mosum-sdll", version, about = "Multiscale MOSUM change-point detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one noisy replication of a preset model.
    Simulate(SimulateArgs),
    /// Estimate change points in a series.
    Detect(DetectArgs),
    /// Write the full MOSUM solution path of a series.
    Path(PathArgs),
    /// Run the Monte-Carlo benchmark.
    Bench(BenchArgs),
    /// Print the preset model parameters.
    Presets,
}

#[derive(Args)]
struct GridArgs {
    /// Drop bandwidth 1 from the grid.
    #[arg(long)]
    no_unit: bool,
    /// Largest bandwidth is floor(T / cap-divisor).
    #[arg(long, default_value_t = 3)]
    cap_divisor: usize,
    /// Explicit bandwidths, e.g. 5,10,20.
    #[arg(long, value_delimiter = ',')]
    bandwidths: Option<Vec<usize>>,
}

impl GridArgs {
    fn config(&self) -> GridConfig {
        GridConfig {
            include_unit: !self.no_unit,
            cap_divisor: self.cap_divisor,
            bandwidths: self.bandwidths.clone(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Importance {
    WinningScale,
    Aggregate,
}

impl From<Importance> for ImportanceMode {
    fn from(i: Importance) -> Self {
        match i {
            Importance::WinningScale => ImportanceMode::WinningScale,
            Importance::Aggregate => ImportanceMode::Aggregate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Calibrated,
    Universal,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: Preset,
    /// Override the preset noise level.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    rep: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the noiseless signal as JSON.
    #[arg(long)]
    signal_out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "mosum-sdll")]
    method: Method,
    #[arg(long, default_value_t = 0.9)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "calibrated")]
    threshold_rule: Rule,
    #[arg(long, default_value_t = 0.3)]
    floor_fraction: f64,
    #[arg(long, value_enum, default_value = "winning-scale")]
    importance: Importance,
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value_t = 2)]
    min_bandwidth: usize,
    #[arg(long, default_value_t = 0.4)]
    merge_tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    calibration_reps: usize,
    /// CSV file persisting baseline critical values between runs.
    #[arg(long)]
    threshold_cache: Option<PathBuf>,
    /// Dump every scale field as CSV (k, G_l, G_r, m_tilde, m_masked).
    #[arg(long)]
    dump_fields: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    /// Output JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "winning-scale")]
    importance: Importance,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "et,eet")]
    models: Vec<Preset>,
    #[arg(long, value_delimiter = ',', default_value = "mosum-sdll,mosum-baseline")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    lambda: f64,
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value_t = 2)]
    min_bandwidth: usize,
    /// Run replications one at a time.
    #[arg(long)]
    serial: bool,
    /// Report file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: serde::Serialize>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let (signal, noise) = a.model.build();
    let mut noise = noise.with_seed(a.seed);
    if let Some(s) = a.sigma {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::invalid_input(format!("sigma must be >= 0; got {s}")));
        }
        noise.sigma = s;
    }
    eprintln!("{}", serde_json::to_string(&a.model.describe())?);
    let series = sample_series(&signal, &noise, a.rep)?;
    if let Some(p) = &a.signal_out {
        write_json(p, &signal)?;
    }
    write_series(open_out(&a.out)?, &series)
}

fn detect(a: DetectArgs) -> Result<()> {
    let series = read_series_csv(&a.input)?;
    let grid_config = a.grid.config();
    let grid = grid_config.build(series.len())?;
    if let Some(p) = &a.dump_fields {
        let fields = compute_fields(series.values(), &grid)?;
        write_fields_csv(BufWriter::new(File::create(p)?), &fields)?;
    }
    let report = match a.method {
        Method::MosumSdll => {
            let config = SdllConfig {
                lambda: a.lambda,
                rule: match a.threshold_rule {
                    Rule::Calibrated => ThresholdRule::default(),
                    Rule::Universal => ThresholdRule::Universal,
                },
                floor_fraction: a.floor_fraction,
                importance: a.importance.into(),
                ..SdllConfig::default()
            };
            DetectionReport::from_sdll(&detect_mosum_sdll(&series, &grid_config, &config)?)
        }
        Method::MosumBaseline => {
            let config = BaselineConfig {
                alpha: a.alpha,
                min_bandwidth: a.min_bandwidth,
                merge_tolerance: a.merge_tolerance,
                calibration_reps: a.calibration_reps,
                cache_path: a.threshold_cache.clone(),
                ..BaselineConfig::default()
            };
            let detector = BaselineDetector::prepare(series.len(), &config, &grid)?;
            DetectionReport::from_baseline(&detector.detect(&series)?, detector.thresholds())
        }
    };
    emit_json(&a.out, &report)
}

fn path(a: PathArgs) -> Result<()> {
    let series = read_series_csv(&a.input)?;
    let grid = a.grid.config().build(series.len())?;
    let fields = compute_fields(series.values(), &grid)?;
    let v = aggregate(&fields)?;
    let path = generate_path(&fields, &v, a.importance.into())?;
    emit_json(&a.out, &path)
}

fn bench(a: BenchArgs) -> Result<()> {
    let config = BenchConfig {
        models: a.models,
        methods: a.methods,
        reps: a.reps,
        seed: a.seed,
        sdll: SdllConfig {
            lambda: a.lambda,
            ..SdllConfig::default()
        },
        baseline: BaselineConfig {
            alpha: a.alpha,
            min_bandwidth: a.min_bandwidth,
            ..BaselineConfig::default()
        },
        parallel: !a.serial,
        out: Some(a.out.clone()),
        ..BenchConfig::default()
    };
    let report = run_benchmark(&config)?;
    for s in &report.summaries {
        let m = &s.metrics;
        eprintln!(
            "{:>4} {:<15} E(d)={:+.3} E|d|={:.3} E(d^2)={:.3} mse={:.4} time={:.4}s",
            s.model, s.method, m.mean_error, m.mean_abs_error, m.mean_sq_error, m.mse_fit, s.mean_seconds
        );
    }
    emit_report(&report, ReportFormat::from_path(&a.out), &a.out)
}

fn presets() -> Result<()> {
    let mut out = io::stdout().lock();
    for p in Preset::ALL {
        writeln!(out, "{}", serde_json::to_string(&p.describe())?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Detect(a) => detect(a),
        Command::Path(a) => path(a),
        Command::Bench(a) => bench(a),
        Command::Presets => presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
