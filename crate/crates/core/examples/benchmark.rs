// SPDX-License-Identifier: MIT OR Apache-2.0

//! A small Monte-Carlo benchmark, written as CSV and JSON.
//!
//! Run with `cargo run --release --example benchmark [reps]`.

use mosum_sdll::bench::{emit_report, run_benchmark, BenchConfig, ReportFormat};
use mosum_sdll::signal::Preset;

fn main() -> mosum_sdll::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let config = BenchConfig {
        models: vec![Preset::Et, Preset::Eet, Preset::Mix],
        reps,
        ..BenchConfig::default()
    };
    let report = run_benchmark(&config)?;

    println!("model  method           E(d)     E|d|    E(d^2)   mse     ms/call");
    for s in &report.summaries {
        let m = &s.metrics;
        println!(
            "{:<6} {:<15} {:>7.3} {:>7.3} {:>8.3} {:>7.4} {:>8.3}",
            s.model.to_string(),
            s.method.to_string(),
            m.mean_error,
            m.mean_abs_error,
            m.mean_sq_error,
            m.mse_fit,
            1e3 * s.mean_seconds
        );
    }

    let dir = std::env::temp_dir();
    for (name, format) in [("report.csv", ReportFormat::Csv), ("report.json", ReportFormat::Json)] {
        let path = dir.join(name);
        emit_report(&report, format, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
