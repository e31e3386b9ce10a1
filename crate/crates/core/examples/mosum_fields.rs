// SPDX-License-Identifier: MIT OR Apache-2.0

//! MOSUM statistic fields, local maximizers, masking and the aggregate `V`.
//!
//! Run with `cargo run --example mosum_fields`.

use mosum_sdll::mosum::{aggregate, build_grid, compute_fields, mosum_stat, write_fields_csv};
use mosum_sdll::signal::{sample_series, NoiseSpec, PiecewiseSignal};

fn main() -> mosum_sdll::Result<()> {
    let signal = PiecewiseSignal::new(60, vec![20, 40], vec![0.0, 1.5, 0.5])?;
    let x = sample_series(&signal, &NoiseSpec::gaussian(0.3, 1)?, 0)?;

    let m = mosum_stat(x.values(), 5, 5)?;
    let peak = (1..m.len()).max_by(|&a, &b| m[a].abs().total_cmp(&m[b].abs())).unwrap();
    println!("single scale (5, 5): |M| peaks at k={peak} ({:.3})", m[peak]);

    let grid = build_grid(x.len(), true, 3)?;
    println!("grid {:?}: {} bandwidth pairs", grid.bandwidths(), grid.num_pairs());
    let fields = compute_fields(x.values(), &grid)?;
    for f in fields.iter().filter(|f| f.g_l == f.g_r) {
        println!("  ({:>2},{:>2}) maximizers {:?}", f.g_l, f.g_r, f.maximizers);
    }

    let v = aggregate(&fields)?;
    let top = (1..v.values.len())
        .max_by(|&a, &b| v.values[a].abs().total_cmp(&v.values[b].abs()))
        .unwrap();
    println!("aggregate V peaks at k={top}");

    // the debug dump used by `detect --dump-fields`
    let mut csv = Vec::new();
    write_fields_csv(&mut csv, &fields[..1])?;
    let text = String::from_utf8(csv).expect("utf-8");
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
