// SPDX-License-Identifier: MIT OR Apache-2.0

//! The threshold-based multiscale MOSUM baseline and its critical values.
//!
//! Run with `cargo run --release --example baseline`.

use mosum_sdll::baseline::{calibrate_threshold, BaselineConfig, BaselineDetector};
use mosum_sdll::mosum::build_grid;
use mosum_sdll::signal::{sample_series, Preset};

fn main() -> mosum_sdll::Result<()> {
    // critical values shrink as alpha grows
    for alpha in [0.01, 0.1, 0.5, 0.9] {
        let t = calibrate_threshold(500, 20, alpha, 1000, 1)?;
        println!("T=500 G=20 alpha={alpha:<4} critical value {:.3}", t.critical_value);
    }

    let (signal, noise) = Preset::Mix.build();
    let x = sample_series(&signal, &noise.with_seed(11), 0)?;
    let grid = build_grid(x.len(), true, 3)?;
    let cache = std::env::temp_dir().join("mosum-sdll-thresholds.csv");
    for alpha in [0.1, 0.9] {
        let config = BaselineConfig {
            alpha,
            cache_path: Some(cache.clone()),
            ..BaselineConfig::default()
        };
        let detector = BaselineDetector::prepare(x.len(), &config, &grid)?;
        let seg = detector.detect(&x)?;
        println!("alpha={alpha}: N_hat={} at {:?}", seg.n_hat, seg.changepoints);
    }
    println!("true change points: {:?}", signal.changepoints());
    println!("critical values cached in {}", cache.display());
    Ok(())
}
