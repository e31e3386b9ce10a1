// SPDX-License-Identifier: MIT OR Apache-2.0

//! MOSUM.SDLL end to end, with both threshold rules.
//!
//! Run with `cargo run --release --example sdll_detection`.

use mosum_sdll::io::DetectionReport;
use mosum_sdll::mosum::GridConfig;
use mosum_sdll::sdll::{detect_mosum_sdll, SdllConfig, ThresholdRule};
use mosum_sdll::signal::{sample_series, Preset};

fn main() -> mosum_sdll::Result<()> {
    let (signal, noise) = Preset::Mix.build();
    let x = sample_series(&signal, &noise.with_seed(11), 0)?;
    println!("true change points: {:?}", signal.changepoints());

    for (name, rule) in [
        ("noise-calibrated", ThresholdRule::default()),
        ("universal", ThresholdRule::Universal),
    ] {
        let config = SdllConfig { rule, ..SdllConfig::default() };
        let r = detect_mosum_sdll(&x, &GridConfig::default(), &config)?;
        let s = &r.segmentation;
        println!(
            "{name:>16}: zeta={:.3} sigma_hat={:.3} path length={} N_hat={} at {:?}",
            r.threshold,
            s.sigma_hat,
            r.path.len(),
            s.n_hat,
            s.changepoints
        );
    }

    let r = detect_mosum_sdll(&x, &GridConfig::default(), &SdllConfig::default())?;
    let mut report = DetectionReport::from_sdll(&r);
    report.path = None;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}
