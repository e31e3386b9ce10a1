// SPDX-License-Identifier: MIT OR Apache-2.0

//! Building the solution path one iteration at a time.
//!
//! Run with `cargo run --example solution_path`.

use mosum_sdll::mosum::{aggregate, build_grid, compute_fields};
use mosum_sdll::path::{ImportanceMode, PathGenerator};
use mosum_sdll::signal::{sample_series, NoiseSpec, PiecewiseSignal};

fn main() -> mosum_sdll::Result<()> {
    let signal = PiecewiseSignal::new(100, vec![30, 50, 80], vec![0.0, 2.0, 0.5, 1.5])?;
    let x = sample_series(&signal, &NoiseSpec::gaussian(0.4, 3)?, 0)?;
    let grid = build_grid(x.len(), true, 3)?;
    let fields = compute_fields(x.values(), &grid)?;
    let v = aggregate(&fields)?;
    let total: usize = fields.iter().map(|f| f.maximizers.len()).sum();

    let mut generator = PathGenerator::new(&fields, &v, ImportanceMode::WinningScale)?;
    println!(" iter    k  importance  scale");
    let mut n = 0;
    while let Some(e) = generator.step() {
        if e.iter < 10 {
            println!("{:>5} {:>4} {:>11.4}  ({}, {})", e.iter, e.k, e.importance, e.g_l, e.g_r);
        }
        n += 1;
    }
    println!("{n} candidates extracted from {total} local maximizers; V is now zero: {}",
        generator.is_exhausted());
    Ok(())
}
