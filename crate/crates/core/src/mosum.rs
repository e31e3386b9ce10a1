// SPDX-License-Identifier: MIT OR Apache-2.0

//! Asymmetric-bandwidth MOSUM statistic fields.
//!
//! All per-position arrays in this module have length `T` and are indexed by
//! the 1-based position `k` directly: `values[k]` is the statistic at `k` for
//! `k = 1, ..., T-1`, and `values[0]` is always zero. Positions outside the
//! valid range `G_l <= k <= T - G_r` of a scale hold zero.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cumulative sums `S_0 = 0`, `S_k = X_1 + ... + X_k`.
pub fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for &v in values {
        acc += v;
        out.push(acc);
    }
    out
}

fn check_fit(len: usize, g_l: usize, g_r: usize) -> Result<()> {
    if g_l == 0 || g_r == 0 || g_l + g_r > len {
        return Err(Error::BandwidthTooLarge { g_l, g_r, len });
    }
    Ok(())
}

/// Statistic field computed from prefix sums of a series of length
/// `prefix.len() - 1`.
pub fn mosum_from_prefix(prefix: &[f64], g_l: usize, g_r: usize) -> Result<Vec<f64>> {
    let len = prefix.len().saturating_sub(1);
    check_fit(len, g_l, g_r)?;
    let (gl, gr) = (g_l as f64, g_r as f64);
    let scale = (gl * gr / (gl + gr)).sqrt();
    let mut out = vec![0.0; len];
    for k in g_l..=(len - g_r) {
        let left = (prefix[k] - prefix[k - g_l]) / gl;
        let right = (prefix[k + g_r] - prefix[k]) / gr;
        out[k] = scale * (left - right);
    }
    Ok(out)
}

/// Unscaled MOSUM statistic
/// `sqrt(G_l G_r / (G_l + G_r)) * (mean of the G_l values ending at k
/// - mean of the G_r values after k)`.
pub fn mosum_stat(values: &[f64], g_l: usize, g_r: usize) -> Result<Vec<f64>> {
    mosum_from_prefix(&prefix_sums(values), g_l, g_r)
}

/// Positions whose `|M~_k|` is nonzero and at least as large as every value in
/// the open window `(k - G_l, k + G_r)`. Ties are all retained.
pub fn local_maximizers(field: &[f64], g_l: usize, g_r: usize) -> Vec<usize> {
    let n = field.len();
    if n < 2 || g_l == 0 || g_r == 0 {
        return Vec::new();
    }
    let abs: Vec<f64> = field.iter().map(|v| v.abs()).collect();
    let last = n - 1;
    // indices with decreasing |value|; front is the window maximum
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 1;
    let mut out = Vec::new();
    for k in 1..=last {
        let hi = (k + g_r - 1).min(last);
        while next <= hi {
            while deque.back().is_some_and(|&b| abs[b] <= abs[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = (k + 1).saturating_sub(g_l).max(1);
        while deque.front().is_some_and(|&f| f < lo) {
            deque.pop_front();
        }
        let window_max = deque.front().map_or(0.0, |&f| abs[f]);
        if abs[k] != 0.0 && abs[k] >= window_max {
            out.push(k);
        }
    }
    out
}

/// Keeps `M~_k` on the union of windows `(k~ - G_l, k~ + G_r)` over the given
/// maximizers and zeroes it elsewhere.
pub fn mask(field: &[f64], maximizers: &[usize], g_l: usize, g_r: usize) -> Vec<f64> {
    let n = field.len();
    let mut coverage = vec![0i64; n + 1];
    for &m in maximizers {
        let (lo, hi) = window(m, g_l, g_r, n);
        if lo <= hi {
            coverage[lo] += 1;
            coverage[hi + 1] -= 1;
        }
    }
    let mut running = 0;
    field
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            running += coverage[k];
            if running > 0 && k > 0 {
                v
            } else {
                0.0
            }
        })
        .collect()
}

/// Inclusive integer range of the open window `(center - g_l, center + g_r)`,
/// clipped to positions `1..len`.
pub(crate) fn window(center: usize, g_l: usize, g_r: usize, len: usize) -> (usize, usize) {
    let lo = (center + 1).saturating_sub(g_l).max(1);
    let hi = (center + g_r - 1).min(len.saturating_sub(1));
    (lo, hi)
}

/// Set of bandwidths; scales are all ordered pairs `(G_l, G_r)` drawn from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthGrid {
    bandwidths: Vec<usize>,
}

impl BandwidthGrid {
    /// Validates a custom grid against a series length.
    pub fn new(bandwidths: Vec<usize>, len: usize) -> Result<Self> {
        if bandwidths.is_empty() {
            return Err(Error::invalid_input("bandwidth grid is empty"));
        }
        if bandwidths[0] == 0 {
            return Err(Error::invalid_input("bandwidths must be >= 1"));
        }
        if bandwidths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid_input(format!(
                "bandwidths must be strictly increasing; got {bandwidths:?}"
            )));
        }
        let max = *bandwidths.last().unwrap();
        check_fit(len, max, max)?;
        Ok(Self { bandwidths })
    }

    pub fn bandwidths(&self) -> &[usize] {
        &self.bandwidths
    }

    pub fn num_pairs(&self) -> usize {
        self.bandwidths.len() * self.bandwidths.len()
    }

    /// All `(G_l, G_r)` pairs, `G_l` outermost.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.bandwidths
            .iter()
            .flat_map(|&l| self.bandwidths.iter().map(move |&r| (l, r)))
            .collect()
    }

    /// Grid restricted to bandwidths of at least `min`.
    pub fn at_least(&self, min: usize) -> Option<Self> {
        let bandwidths: Vec<usize> = self.bandwidths.iter().copied().filter(|&g| g >= min).collect();
        (!bandwidths.is_empty()).then_some(Self { bandwidths })
    }
}

/// How the bandwidth grid is derived from the series length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Keep bandwidth 1, which makes the solution path complete.
    pub include_unit: bool,
    /// Largest bandwidth is `floor(T / cap_divisor)`.
    pub cap_divisor: usize,
    /// Explicit bandwidths overriding the Fibonacci construction.
    pub bandwidths: Option<Vec<usize>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            include_unit: true,
            cap_divisor: 3,
            bandwidths: None,
        }
    }
}

impl GridConfig {
    pub fn build(&self, len: usize) -> Result<BandwidthGrid> {
        match &self.bandwidths {
            Some(b) => BandwidthGrid::new(b.clone(), len),
            None => build_grid(len, self.include_unit, self.cap_divisor),
        }
    }
}

/// Fibonacci-type grid `1, 2, 3, 5, 8, ...` truncated at `floor(T / cap_divisor)`.
pub fn build_grid(len: usize, include_unit: bool, cap_divisor: usize) -> Result<BandwidthGrid> {
    if len < 6 {
        return Err(Error::invalid_input(format!(
            "grid construction needs T >= 6; got {len}"
        )));
    }
    if cap_divisor < 2 {
        return Err(Error::invalid_input(format!(
            "cap_divisor must be >= 2 so both windows fit; got {cap_divisor}"
        )));
    }
    let cap = len / cap_divisor;
    let mut bandwidths = Vec::new();
    let (mut a, mut b) = (1usize, 2usize);
    while a <= cap {
        if a >= 2 || include_unit {
            bandwidths.push(a);
        }
        (a, b) = (b, a + b);
    }
    if bandwidths.is_empty() {
        return Err(Error::invalid_input(format!(
            "no bandwidth fits under floor({len}/{cap_divisor}) = {cap}"
        )));
    }
    BandwidthGrid::new(bandwidths, len)
}

/// Statistic, local maximizers and masked statistic at one scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleField {
    pub g_l: usize,
    pub g_r: usize,
    pub raw: Vec<f64>,
    pub maximizers: Vec<usize>,
    pub masked: Vec<f64>,
}

impl ScaleField {
    pub fn from_prefix(prefix: &[f64], g_l: usize, g_r: usize) -> Result<Self> {
        let raw = mosum_from_prefix(prefix, g_l, g_r)?;
        let maximizers = local_maximizers(&raw, g_l, g_r);
        let masked = mask(&raw, &maximizers, g_l, g_r);
        Ok(Self {
            g_l,
            g_r,
            raw,
            maximizers,
            masked,
        })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

/// Fields for every scale of the grid, in [`BandwidthGrid::pairs`] order.
pub fn compute_fields(values: &[f64], grid: &BandwidthGrid) -> Result<Vec<ScaleField>> {
    let prefix = prefix_sums(values);
    grid.pairs()
        .into_par_iter()
        .map(|(g_l, g_r)| ScaleField::from_prefix(&prefix, g_l, g_r))
        .collect()
}

/// `V(k)`, the sum of masked statistics across scales.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateField {
    pub values: Vec<f64>,
}

/// Pointwise sum of masked fields, accumulated in slice order.
pub fn aggregate(fields: &[ScaleField]) -> Result<AggregateField> {
    let len = fields.first().map_or(0, ScaleField::len);
    let mut values = vec![0.0; len];
    for f in fields {
        if f.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: f.len(),
            });
        }
        for (acc, &m) in values.iter_mut().zip(&f.masked) {
            *acc += m;
        }
    }
    Ok(AggregateField { values })
}

/// Writes every scale field as CSV with columns `k,G_l,G_r,m_tilde,m_masked`.
pub fn write_fields_csv<W: Write>(out: W, fields: &[ScaleField]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "G_l", "G_r", "m_tilde", "m_masked"])?;
    for f in fields {
        for k in 1..f.len() {
            w.write_record(&[
                k.to_string(),
                f.g_l.to_string(),
                f.g_r.to_string(),
                f.raw[k].to_string(),
                f.masked[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
