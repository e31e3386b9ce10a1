// SPDX-License-Identifier: MIT OR Apache-2.0

//! Order statistics shared by the noise estimator and the Monte-Carlo
//! calibrations.

/// Median; the mean of the two middle values for even counts. Reorders `values`.
pub fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let mid = n / 2;
    let (below, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Lower empirical `p`-quantile of ascending `sorted`: the order statistic of
/// rank `ceil(p * n)`, clamped to `1..=n`. `p = 0` gives the minimum.
pub fn lower_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of an empty sample");
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}
