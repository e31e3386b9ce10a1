// SPDX-License-Identifier: MIT OR Apache-2.0

//! Library results checked against brute-force references.

mod common;

use common::*;
use mosum_sdll::baseline::{calibrate_threshold, normalised_max};
use mosum_sdll::mosum::{
    aggregate, build_grid, compute_fields, local_maximizers, mask, mosum_stat, prefix_sums,
    BandwidthGrid,
};
use mosum_sdll::path::{generate_path, ImportanceMode};
use mosum_sdll::sdll::{fit_means, mad_sigma, sdll_count};
use mosum_sdll::signal::{detectability_index, PiecewiseSignal};

#[test]
fn statistic_masks_and_aggregate_match_direct_loops() {
    for seed in 0..8 {
        let x = random_series(70, seed);
        let grid = BandwidthGrid::new(vec![1, 2, 4, 7, 11], 70).unwrap();
        let fields = compute_fields(&x, &grid).unwrap();
        let naive = naive_fields(&x, &grid.pairs());
        for (f, n) in fields.iter().zip(&naive) {
            assert!(max_abs_diff(&f.raw, &n.raw) < 1e-10);
            assert_eq!(f.maximizers, n.maxima, "scale ({}, {})", f.g_l, f.g_r);
            assert!(max_abs_diff(&f.masked, &n.masked) < 1e-10);
        }
        let v = aggregate(&fields).unwrap();
        assert!(max_abs_diff(&v.values, &naive_v(&naive)) < 1e-10);
    }
}

#[test]
fn maximizers_keep_ties_on_plateaus() {
    let field = [0.0, 1.0, 2.0, 2.0, 1.0, 0.0, -2.0, 0.5];
    for (g_l, g_r) in [(1, 1), (2, 1), (1, 3), (3, 3)] {
        assert_eq!(
            local_maximizers(&field, g_l, g_r),
            naive_maximizers(&field, g_l, g_r),
            "({g_l}, {g_r})"
        );
    }
}

#[test]
fn mask_matches_window_membership() {
    let field: Vec<f64> = (0..30).map(|k| (k as f64 * 0.7).sin()).collect();
    for (g_l, g_r) in [(1, 1), (3, 2), (2, 5), (6, 6)] {
        let maxima = naive_maximizers(&field, g_l, g_r);
        assert_eq!(mask(&field, &maxima, g_l, g_r), naive_mask(&field, &maxima, g_l, g_r));
    }
}

#[test]
fn path_matches_full_recomputation() {
    for seed in 0..20 {
        let x = random_series(60, 100 + seed);
        let grid = build_grid(60, true, 3).unwrap();
        let fields = compute_fields(&x, &grid).unwrap();
        let v = aggregate(&fields).unwrap();
        let path = generate_path(&fields, &v, ImportanceMode::WinningScale).unwrap();
        let naive = naive_path(naive_fields(&x, &grid.pairs()));
        assert_eq!(path.len(), naive.len(), "seed {seed}");
        for (e, n) in path.entries.iter().zip(&naive) {
            assert_eq!((e.k, e.g_l, e.g_r), (n.0, n.2, n.3));
            assert!((e.importance - n.1).abs() < 1e-10);
        }
    }
}

#[test]
fn noiseless_step_first_entry_is_brute_force_argmax() {
    let x: Vec<f64> = (1..=100).map(|t| if t <= 50 { 0.0 } else { 1.0 }).collect();
    let grid = build_grid(100, true, 3).unwrap();
    let naive = naive_fields(&x, &grid.pairs());
    let v = naive_v(&naive);
    let brute = (1..100).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
    let fields = compute_fields(&x, &grid).unwrap();
    let path = generate_path(&fields, &aggregate(&fields).unwrap(), ImportanceMode::WinningScale)
        .unwrap();
    assert_eq!(path.entries[0].k, brute);
    assert_eq!(brute, 50);
}

#[test]
fn steepest_drop_count_matches_enumeration() {
    // enumerate every admissible cut and keep the first steepest one
    let brute = |sorted: &[f64], zeta: f64, floor: f64| -> usize {
        if sorted.is_empty() || sorted[0] < zeta {
            return 0;
        }
        let above = sorted.iter().filter(|&&m| m >= zeta).count();
        let admitted = sorted.iter().filter(|&&m| m >= floor.min(zeta)).count();
        let mut best = above;
        let mut best_drop = f64::NEG_INFINITY;
        for n in above..admitted {
            let d = (sorted[n - 1] / sorted[n]).ln();
            if d > best_drop + 1e-12 {
                best_drop = d;
                best = n;
            }
        }
        best
    };
    for seed in 0..200u64 {
        let x = random_series(40, seed);
        let mut sorted: Vec<f64> = x.iter().map(|v| v.abs() + 0.01).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (zeta, floor) in [(1.0, 0.0), (1.0, 0.3), (0.5, 0.2), (3.0, 0.9)] {
            assert_eq!(sdll_count(&sorted, zeta, floor), brute(&sorted, zeta, floor));
        }
    }
}

#[test]
fn fitted_means_are_segment_averages() {
    let x = random_series(50, 9);
    let cps = [7, 20, 21, 44];
    let fitted = fit_means(&x, &cps).unwrap();
    let mut bounds = vec![0];
    bounds.extend_from_slice(&cps);
    bounds.push(50);
    for w in bounds.windows(2) {
        let seg = &x[w[0]..w[1]];
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        for f in &fitted[w[0]..w[1]] {
            assert!((f - mean).abs() < 1e-12);
        }
    }
}

#[test]
fn mad_matches_sorted_median() {
    let x = random_series(101, 5);
    let mut d: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    d.sort_by(f64::total_cmp);
    let median = d[d.len() / 2 - 1] / 2.0 + d[d.len() / 2] / 2.0;
    let expected = median / (2f64.sqrt() * 0.6744897501960817);
    assert!((mad_sigma(&x) - expected).abs() < 1e-12);
}

#[test]
fn detectability_by_hand() {
    let s = PiecewiseSignal::new(20, vec![4, 12], vec![0.0, 1.5, -0.5]).unwrap();
    // spacings 4 and 8, jumps 1.5 and 2: min(4 * 2.25, 8 * 4) = 9
    let d = detectability_index(&s, 0.5).unwrap();
    assert!((d.index - 36.0).abs() < 1e-12);
    assert!((d.threshold - 20f64.ln()).abs() < 1e-12);
}

#[test]
fn calibration_is_an_order_statistic_of_direct_maxima() {
    use rand_distr::{Distribution, StandardNormal};
    let (len, g, reps, seed) = (120, 6, 150, 21);
    let t = calibrate_threshold(len, g, 0.2, reps, seed).unwrap();
    let mut maxima: Vec<f64> = (0..reps as u64)
        .map(|r| {
            let mut rng = mosum_sdll::signal::replication_rng(seed, r);
            let x: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
            let m = naive_mosum(&x, g, g).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!((normalised_max(&x, &prefix_sums(&x), g).unwrap() - m / mad_sigma(&x)).abs() < 1e-10);
            m / mad_sigma(&x)
        })
        .collect();
    maxima.sort_by(f64::total_cmp);
    // rank ceil(0.8 * 150) = 120
    assert!((t.critical_value - maxima[119]).abs() < 1e-10);
}

#[test]
fn mosum_stat_agrees_with_oracle_on_extreme_scales() {
    let x = random_series(40, 77);
    for (g_l, g_r) in [(1, 39), (39, 1), (20, 20), (1, 1)] {
        let m = mosum_stat(&x, g_l, g_r).unwrap();
        assert!(max_abs_diff(&m, &naive_mosum(&x, g_l, g_r)) < 1e-10);
    }
    assert!(mosum_stat(&x, 20, 21).is_err());
}
