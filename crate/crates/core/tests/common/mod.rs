// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force reference implementations shared by the integration tests.
//! Each one follows the textbook definition with plain loops and no reuse of
//! library internals.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `M~_k` by direct summation; index 0 and invalid positions hold zero.
pub fn naive_mosum(x: &[f64], g_l: usize, g_r: usize) -> Vec<f64> {
    let t = x.len();
    let mut out = vec![0.0; t];
    for k in 1..t {
        if k < g_l || k + g_r > t {
            continue;
        }
        // x is 0-based: X_s = x[s - 1]
        let mut left = 0.0;
        for s in (k - g_l + 1)..=k {
            left += x[s - 1];
        }
        let mut right = 0.0;
        for s in (k + 1)..=(k + g_r) {
            right += x[s - 1];
        }
        let (gl, gr) = (g_l as f64, g_r as f64);
        out[k] = (gl * gr / (gl + gr)).sqrt() * (left / gl - right / gr);
    }
    out
}

/// Positions `k` with `|M_k| > 0` and `|M_k| >= |M_j|` for every `j` in the
/// open window `(k - G_l, k + G_r)` within `1..T`.
pub fn naive_maximizers(field: &[f64], g_l: usize, g_r: usize) -> Vec<usize> {
    let t = field.len();
    (1..t)
        .filter(|&k| {
            let a = field[k].abs();
            a > 0.0
                && (1..t)
                    .filter(|&j| j + g_l > k && j < k + g_r)
                    .all(|j| field[j].abs() <= a)
        })
        .collect()
}

/// Keeps `M_k` iff some maximizer `m` has `m - G_l < k < m + G_r`.
pub fn naive_mask(field: &[f64], maxima: &[usize], g_l: usize, g_r: usize) -> Vec<f64> {
    (0..field.len())
        .map(|k| {
            let covered = k > 0 && maxima.iter().any(|&m| k + g_l > m && k < m + g_r);
            if covered {
                field[k]
            } else {
                0.0
            }
        })
        .collect()
}

pub struct NaiveScale {
    pub g_l: usize,
    pub g_r: usize,
    pub raw: Vec<f64>,
    pub maxima: Vec<usize>,
    pub masked: Vec<f64>,
}

pub fn naive_fields(x: &[f64], pairs: &[(usize, usize)]) -> Vec<NaiveScale> {
    pairs
        .iter()
        .map(|&(g_l, g_r)| {
            let raw = naive_mosum(x, g_l, g_r);
            let maxima = naive_maximizers(&raw, g_l, g_r);
            let masked = naive_mask(&raw, &maxima, g_l, g_r);
            NaiveScale { g_l, g_r, raw, maxima, masked }
        })
        .collect()
}

pub fn naive_v(scales: &[NaiveScale]) -> Vec<f64> {
    let t = scales[0].masked.len();
    (0..t).map(|k| scales.iter().map(|s| s.masked[k]).sum()).collect()
}

/// `(k, importance, G_l, G_r)` in extraction order, with `V` rebuilt from
/// scratch at every iteration. Pruned windows are zeroed whole.
pub fn naive_path(mut scales: Vec<NaiveScale>) -> Vec<(usize, f64, usize, usize)> {
    let mut out = Vec::new();
    loop {
        let v = naive_v(&scales);
        let mut k0 = 0;
        for k in 1..v.len() {
            if v[k].abs() > v[k0].abs() {
                k0 = k;
            }
        }
        if v[k0] == 0.0 {
            return out;
        }
        let mut win: Option<usize> = None;
        for (s, sc) in scales.iter().enumerate() {
            let a = sc.masked[k0].abs();
            if a == 0.0 {
                continue;
            }
            win = match win {
                None => Some(s),
                Some(w) => {
                    let b = scales[w].masked[k0].abs();
                    let key = |i: usize| (scales[i].g_l + scales[i].g_r, scales[i].g_l);
                    if a > b || (a == b && key(s) < key(w)) {
                        Some(s)
                    } else {
                        Some(w)
                    }
                }
            };
        }
        let w = win.unwrap();
        out.push((k0, scales[w].masked[k0].abs(), scales[w].g_l, scales[w].g_r));
        for sc in scales.iter_mut() {
            let (g_l, g_r) = (sc.g_l, sc.g_r);
            let (pruned, kept): (Vec<usize>, Vec<usize>) =
                sc.maxima.iter().partition(|&&m| m + g_r > k0 && m < k0 + g_l);
            for m in pruned {
                for k in 1..sc.masked.len() {
                    if k + g_l > m && k < m + g_r {
                        sc.masked[k] = 0.0;
                    }
                }
            }
            sc.maxima = kept;
        }
    }
}

/// Best single split by exhaustive least squares: the `k` minimising the
/// residual sum of squares of the two-segment fit.
pub fn least_squares_single_change(x: &[f64]) -> usize {
    let rss = |seg: &[f64]| {
        let m = seg.iter().sum::<f64>() / seg.len() as f64;
        seg.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    };
    let mut best = (f64::INFINITY, 0);
    for k in 1..x.len() {
        let r = rss(&x[..k]) + rss(&x[k..]);
        if r < best.0 {
            best = (r, k);
        }
    }
    best.1
}

/// Random piecewise-constant signal plus Gaussian noise.
pub fn random_series(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let changes = rng.random_range(0..=len / 15);
    let mut level: f64 = rng.random_range(-2.0..2.0);
    let mut cps: Vec<usize> = (0..changes).map(|_| rng.random_range(1..len)).collect();
    cps.sort_unstable();
    let sigma: f64 = rng.random_range(0.1..1.5);
    let mut next = 0;
    (0..len)
        .map(|t| {
            while next < cps.len() && cps[next] == t {
                level += rng.random_range(-3.0..3.0);
                next += 1;
            }
            let e: f64 = StandardNormal.sample(&mut rng);
            level + sigma * e
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
