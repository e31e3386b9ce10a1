// SPDX-License-Identifier: MIT OR Apache-2.0

//! Steepest-drop-to-low-levels model selection and segment fitting.
//!
//! Candidate importances are sorted in decreasing order `m_1 >= ... >= m_J`
//! and compared against `zeta = lambda * sigma_hat * sqrt(2 log T)`. Drops
//! `log m_j - log m_{j+1}` whose lower end falls below `zeta` are the "drops to
//! low levels"; the steepest of them sets the number of change points. This is
//! one concrete reading of the rule and is labelled as such in output metadata.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mosum::{aggregate, compute_fields, BandwidthGrid, GridConfig};
use crate::path::{generate_path, ImportanceMode, SolutionPath};
use crate::signal::{sample_series, NoiseSpec, PiecewiseSignal, TimeSeries};
use crate::stats;

/// `Phi^{-1}(3/4)`, the MAD-to-standard-deviation factor for Gaussian noise.
const MAD_QUANTILE: f64 = 0.674_489_750_196_081_7;

/// Short identifier of the selection rule, echoed in detection output.
pub const SELECTION_RULE: &str = "sdll: steepest log-drop among sorted importances \
     (those >= floor_fraction*zeta) landing below zeta = lambda*sigma_hat*kappa";

/// Noise level from the median absolute first difference.
pub fn mad_sigma(values: &[f64]) -> f64 {
    let mut diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    stats::median(&mut diffs) / (std::f64::consts::SQRT_2 * MAD_QUANTILE)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseEstimator {
    #[default]
    GlobalMad,
}

impl NoiseEstimator {
    pub fn estimate(self, values: &[f64]) -> f64 {
        match self {
            NoiseEstimator::GlobalMad => mad_sigma(values),
        }
    }
}

/// How the multiplier `kappa` in `zeta = lambda * sigma_hat * kappa` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ThresholdRule {
    /// `kappa = sqrt(2 log T)`.
    Universal,
    /// `kappa` is the `quantile` of `max importance / sigma_hat` over `reps`
    /// pure-noise series of the same length, run through the same grid.
    NoiseCalibrated { quantile: f64, reps: usize, seed: u64 },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::NoiseCalibrated {
            quantile: 0.99,
            reps: 500,
            seed: 0x5d11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdllConfig {
    pub lambda: f64,
    pub rule: ThresholdRule,
    /// Importances below `floor_fraction * zeta` are ignored by the drop
    /// search. Zero admits the whole path.
    pub floor_fraction: f64,
    pub noise: NoiseEstimator,
    pub importance: ImportanceMode,
}

impl Default for SdllConfig {
    fn default() -> Self {
        Self {
            lambda: 0.9,
            rule: ThresholdRule::default(),
            floor_fraction: 0.3,
            noise: NoiseEstimator::GlobalMad,
            importance: ImportanceMode::WinningScale,
        }
    }
}

impl SdllConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid_input(format!(
                "lambda must be finite and > 0; got {}",
                self.lambda
            )));
        }
        if !(0.0..=1.0).contains(&self.floor_fraction) {
            return Err(Error::invalid_input(format!(
                "floor_fraction must lie in [0, 1]; got {}",
                self.floor_fraction
            )));
        }
        if let ThresholdRule::NoiseCalibrated { quantile, reps, .. } = self.rule {
            if !(0.0..=1.0).contains(&quantile) || reps == 0 {
                return Err(Error::invalid_input(format!(
                    "calibration needs quantile in [0, 1] and reps >= 1; got {quantile}, {reps}"
                )));
            }
        }
        Ok(())
    }

    /// The multiplier `kappa` for series of length `len` analysed on `grid`.
    pub fn kappa(&self, len: usize, grid: &BandwidthGrid) -> Result<f64> {
        match self.rule {
            ThresholdRule::Universal => Ok((2.0 * (len as f64).ln()).sqrt()),
            ThresholdRule::NoiseCalibrated {
                quantile,
                reps,
                seed,
            } => noise_calibrated_kappa(len, grid, self.importance, quantile, reps, seed),
        }
    }

    /// `lambda * sigma_hat * kappa`.
    pub fn threshold(&self, sigma_hat: f64, len: usize, grid: &BandwidthGrid) -> Result<f64> {
        Ok(self.lambda * sigma_hat * self.kappa(len, grid)?)
    }
}

type KappaKey = (usize, Vec<usize>, ImportanceMode, u64, usize, u64);

fn kappa_cache() -> &'static Mutex<HashMap<KappaKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<KappaKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Monte-Carlo quantile of `max importance / sigma_hat` under pure Gaussian
/// noise. Deterministic given its arguments; memoised per process.
pub fn noise_calibrated_kappa(
    len: usize,
    grid: &BandwidthGrid,
    importance: ImportanceMode,
    quantile: f64,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    let key = (
        len,
        grid.bandwidths().to_vec(),
        importance,
        quantile.to_bits(),
        reps,
        seed,
    );
    if let Some(&k) = kappa_cache().lock().unwrap().get(&key) {
        return Ok(k);
    }
    let flat = PiecewiseSignal::new(len, vec![], vec![0.0])?;
    let noise = NoiseSpec::gaussian(1.0, seed)?;
    let mut maxima = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let x = sample_series(&flat, &noise, r)?;
            let fields = compute_fields(x.values(), grid)?;
            let v = aggregate(&fields)?;
            let path = generate_path(&fields, &v, importance)?;
            let top = path.importances().into_iter().fold(0.0, f64::max);
            Ok(top / mad_sigma(x.values()))
        })
        .collect::<Result<Vec<f64>>>()?;
    maxima.sort_by(f64::total_cmp);
    let kappa = stats::lower_quantile(&maxima, quantile);
    kappa_cache().lock().unwrap().insert(key, kappa);
    Ok(kappa)
}

/// Selected model size and locations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub n_hat: usize,
    /// Sorted by position.
    pub changepoints: Vec<usize>,
    pub threshold: f64,
}

/// Number of candidates kept by the steepest-drop rule, given importances
/// sorted in decreasing order. Only importances at or above `floor` take part
/// in the drop search.
pub fn sdll_count(sorted: &[f64], threshold: f64, floor: f64) -> usize {
    if sorted.first().is_none_or(|&m| m < threshold) {
        return 0;
    }
    let above = sorted.partition_point(|&m| m >= threshold);
    let admitted = sorted.partition_point(|&m| m >= floor.min(threshold));
    let mut best = above;
    let mut best_drop = f64::NEG_INFINITY;
    for n in above..admitted {
        let drop = sorted[n - 1].ln() - sorted[n].ln();
        if drop > best_drop {
            best_drop = drop;
            best = n;
        }
    }
    best
}

/// Applies the steepest-drop rule to a path with a precomputed threshold and
/// floor.
pub fn sdll_select(path: &SolutionPath, threshold: f64, floor: f64) -> Result<Selection> {
    if let Some(e) = path
        .entries
        .iter()
        .find(|e| !(e.importance > 0.0 && e.importance.is_finite()))
    {
        return Err(Error::invalid_input(format!(
            "path entry at k={} has non-positive importance {}",
            e.k, e.importance
        )));
    }
    let mut order: Vec<usize> = (0..path.len()).collect();
    // stable: equal importances keep extraction order
    order.sort_by(|&a, &b| {
        path.entries[b]
            .importance
            .total_cmp(&path.entries[a].importance)
    });
    let sorted: Vec<f64> = order.iter().map(|&i| path.entries[i].importance).collect();
    let n_hat = sdll_count(&sorted, threshold, floor);
    let mut changepoints: Vec<usize> = order[..n_hat].iter().map(|&i| path.entries[i].k).collect();
    changepoints.sort_unstable();
    Ok(Selection {
        n_hat,
        changepoints,
        threshold,
    })
}

/// Segment averages between consecutive change points.
pub fn fit_means(values: &[f64], changepoints: &[usize]) -> Result<Vec<f64>> {
    let len = values.len();
    let mut prev = 0;
    for &cp in changepoints {
        if cp <= prev || cp >= len {
            return Err(Error::invalid_input(format!(
                "change points must be strictly increasing within [1, {}); got {changepoints:?}",
                len
            )));
        }
        prev = cp;
    }
    let mut fitted = Vec::with_capacity(len);
    let mut start = 0;
    for end in changepoints.iter().copied().chain(std::iter::once(len)) {
        let segment = &values[start..end];
        let mean = segment.iter().sum::<f64>() / segment.len() as f64;
        fitted.extend(std::iter::repeat_n(mean, segment.len()));
        start = end;
    }
    Ok(fitted)
}

/// Estimated change points with the fitted piecewise-constant mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub n_hat: usize,
    pub changepoints: Vec<usize>,
    pub fitted: Vec<f64>,
    pub sigma_hat: f64,
}

impl Segmentation {
    pub fn from_changepoints(values: &[f64], changepoints: Vec<usize>, sigma_hat: f64) -> Result<Self> {
        let fitted = fit_means(values, &changepoints)?;
        Ok(Self {
            n_hat: changepoints.len(),
            changepoints,
            fitted,
            sigma_hat,
        })
    }
}

/// Output of [`detect_mosum_sdll`].
#[derive(Clone, Debug, PartialEq)]
pub struct MosumSdllResult {
    pub segmentation: Segmentation,
    pub path: SolutionPath,
    pub threshold: f64,
}

/// MOSUM solution path followed by steepest-drop selection and segment fitting.
pub fn detect_mosum_sdll(
    series: &TimeSeries,
    grid: &GridConfig,
    config: &SdllConfig,
) -> Result<MosumSdllResult> {
    config.validate()?;
    let values = series.values();
    if values.len() < 6 {
        return Err(Error::invalid_input(format!(
            "MOSUM.SDLL needs T >= 6; got {}",
            values.len()
        )));
    }
    let grid = grid.build(values.len())?;
    let fields = compute_fields(values, &grid)?;
    let v = aggregate(&fields)?;
    let path = generate_path(&fields, &v, config.importance)?;
    let sigma_hat = config.noise.estimate(values);
    let threshold = config.threshold(sigma_hat, values.len(), &grid)?;
    let selection = sdll_select(&path, threshold, config.floor_fraction * threshold)?;
    let segmentation = Segmentation::from_changepoints(values, selection.changepoints, sigma_hat)?;
    Ok(MosumSdllResult {
        segmentation,
        path,
        threshold,
    })
}
