// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold-based multiscale MOSUM detector.
//!
//! For each symmetric bandwidth `G` the normalised statistic
//! `|M~_k(G, G)| / sigma_hat` is compared with a critical value obtained by
//! simulating pure Gaussian noise. Significant local maximizers are merged
//! bottom-up: bandwidths are visited smallest first and a candidate is kept only
//! if no accepted change point lies within `merge_tolerance * G` of it.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mosum::{local_maximizers, mosum_from_prefix, prefix_sums, BandwidthGrid};
use crate::sdll::{mad_sigma, Segmentation};
use crate::signal::{replication_rng, TimeSeries};
use crate::stats;

const MIN_CALIBRATION_REPS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub alpha: f64,
    pub min_bandwidth: usize,
    pub merge_tolerance: f64,
    pub calibration_reps: usize,
    pub calibration_seed: u64,
    /// Optional CSV file used to persist critical values between runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            min_bandwidth: 2,
            merge_tolerance: 0.4,
            calibration_reps: 1000,
            calibration_seed: 0xca11b,
            cache_path: None,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid_input(format!(
                "alpha must lie in [0, 1]; got {}",
                self.alpha
            )));
        }
        if self.min_bandwidth < 2 {
            return Err(Error::invalid_input(format!(
                "minimum bandwidth must be >= 2; got {}",
                self.min_bandwidth
            )));
        }
        if !(self.merge_tolerance > 0.0 && self.merge_tolerance <= 1.0) {
            return Err(Error::invalid_input(format!(
                "merge tolerance must lie in (0, 1]; got {}",
                self.merge_tolerance
            )));
        }
        if self.calibration_reps < MIN_CALIBRATION_REPS {
            return Err(Error::invalid_input(format!(
                "calibration needs >= {MIN_CALIBRATION_REPS} replications; got {}",
                self.calibration_reps
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibratedThreshold {
    pub len: usize,
    pub bandwidth: usize,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    pub critical_value: f64,
}

/// `max_k |M~_k(G, G)| / sigma_hat` for one series, given its prefix sums.
pub fn normalised_max(values: &[f64], prefix: &[f64], bandwidth: usize) -> Result<f64> {
    let raw = mosum_from_prefix(prefix, bandwidth, bandwidth)?;
    let max = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sigma = mad_sigma(values);
    Ok(if sigma > 0.0 { max / sigma } else { f64::INFINITY })
}

/// Simulated null maxima for several bandwidths; replication `r` uses the same
/// noise series for every bandwidth.
fn null_maxima(len: usize, bandwidths: &[usize], reps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    use rand_distr::{Distribution, StandardNormal};

    for &g in bandwidths {
        if g == 0 || 2 * g > len {
            return Err(Error::BandwidthTooLarge { g_l: g, g_r: g, len });
        }
    }
    let per_rep: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(seed, r);
            let x: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
            let prefix = prefix_sums(&x);
            bandwidths
                .iter()
                .map(|&g| normalised_max(&x, &prefix, g))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..bandwidths.len())
        .map(|i| per_rep.iter().map(|row| row[i]).collect())
        .collect())
}

fn critical_from(mut maxima: Vec<f64>, alpha: f64) -> f64 {
    maxima.sort_by(f64::total_cmp);
    stats::lower_quantile(&maxima, 1.0 - alpha)
}

fn check_calibration_args(alpha: f64, reps: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid_input(format!("alpha must lie in [0, 1]; got {alpha}")));
    }
    if reps < MIN_CALIBRATION_REPS {
        return Err(Error::invalid_input(format!(
            "calibration needs >= {MIN_CALIBRATION_REPS} replications; got {reps}"
        )));
    }
    Ok(())
}

/// Empirical `(1 - alpha)`-quantile of the normalised null maximum at
/// bandwidth `G`. A statistic at or above the critical value is significant.
pub fn calibrate_threshold(
    len: usize,
    bandwidth: usize,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<CalibratedThreshold> {
    check_calibration_args(alpha, reps)?;
    let maxima = null_maxima(len, &[bandwidth], reps, seed)?.remove(0);
    Ok(CalibratedThreshold {
        len,
        bandwidth,
        alpha,
        reps,
        seed,
        critical_value: critical_from(maxima, alpha),
    })
}

/// Calibrates several bandwidths from one set of simulated series. Each entry
/// equals what [`calibrate_threshold`] returns for that bandwidth.
pub fn calibrate_thresholds(
    len: usize,
    bandwidths: &[usize],
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<CalibratedThreshold>> {
    check_calibration_args(alpha, reps)?;
    let maxima = null_maxima(len, bandwidths, reps, seed)?;
    Ok(bandwidths
        .iter()
        .zip(maxima)
        .map(|(&bandwidth, m)| CalibratedThreshold {
            len,
            bandwidth,
            alpha,
            reps,
            seed,
            critical_value: critical_from(m, alpha),
        })
        .collect())
}

type CacheKey = (usize, usize, u64, usize, u64);

fn key_of(t: &CalibratedThreshold) -> CacheKey {
    (t.len, t.bandwidth, t.alpha.to_bits(), t.reps, t.seed)
}

#[derive(Serialize, Deserialize)]
struct CacheRow {
    #[serde(rename = "T")]
    len: usize,
    #[serde(rename = "G")]
    bandwidth: usize,
    alpha: f64,
    reps: usize,
    seed: u64,
    critical_value: f64,
}

/// Critical values keyed by `(T, G, alpha, reps, seed)`, persisted as CSV with
/// columns `T,G,alpha,reps,seed,critical_value`.
#[derive(Clone, Debug, Default)]
pub struct ThresholdCache {
    entries: HashMap<CacheKey, f64>,
}

impl ThresholdCache {
    /// Reads a cache file; a missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cache = Self::default();
        if !path.exists() {
            return Ok(cache);
        }
        let mut reader = csv::Reader::from_path(path)?;
        for row in reader.deserialize::<CacheRow>() {
            let row = row?;
            cache.insert(&CalibratedThreshold {
                len: row.len,
                bandwidth: row.bandwidth,
                alpha: row.alpha,
                reps: row.reps,
                seed: row.seed,
                critical_value: row.critical_value,
            });
        }
        Ok(cache)
    }

    /// Writes all entries sorted by key.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut rows: Vec<(&CacheKey, &f64)> = self.entries.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        let mut w = csv::Writer::from_writer(File::create(path)?);
        for (&(len, bandwidth, alpha, reps, seed), &critical_value) in rows {
            w.serialize(CacheRow {
                len,
                bandwidth,
                alpha: f64::from_bits(alpha),
                reps,
                seed,
                critical_value,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn get(&self, len: usize, bandwidth: usize, alpha: f64, reps: usize, seed: u64) -> Option<f64> {
        self.entries
            .get(&(len, bandwidth, alpha.to_bits(), reps, seed))
            .copied()
    }

    pub fn insert(&mut self, t: &CalibratedThreshold) {
        self.entries.insert(key_of(t), t.critical_value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn memo() -> &'static Mutex<ThresholdCache> {
    static MEMO: OnceLock<Mutex<ThresholdCache>> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

/// Baseline detector with critical values prepared for one series length.
#[derive(Clone, Debug)]
pub struct BaselineDetector {
    config: BaselineConfig,
    thresholds: Vec<CalibratedThreshold>,
}

impl BaselineDetector {
    /// Calibrates (or loads) the critical value of every grid bandwidth of at
    /// least `config.min_bandwidth`. Only symmetric scales are used.
    pub fn prepare(len: usize, config: &BaselineConfig, grid: &BandwidthGrid) -> Result<Self> {
        config.validate()?;
        let bandwidths = grid
            .at_least(config.min_bandwidth)
            .ok_or_else(|| {
                Error::invalid_input(format!(
                    "no grid bandwidth is >= the minimum bandwidth {}",
                    config.min_bandwidth
                ))
            })?
            .bandwidths()
            .to_vec();

        let mut disk = match &config.cache_path {
            Some(p) => Some(ThresholdCache::load(p)?),
            None => None,
        };
        let (a, reps, seed) = (config.alpha, config.calibration_reps, config.calibration_seed);
        let lookup = |g: usize, disk: &Option<ThresholdCache>| {
            disk.as_ref()
                .and_then(|d| d.get(len, g, a, reps, seed))
                .or_else(|| memo().lock().unwrap().get(len, g, a, reps, seed))
        };
        let missing: Vec<usize> = bandwidths
            .iter()
            .copied()
            .filter(|&g| lookup(g, &disk).is_none())
            .collect();
        if !missing.is_empty() {
            let fresh = calibrate_thresholds(len, &missing, a, reps, seed)?;
            let mut m = memo().lock().unwrap();
            for t in &fresh {
                m.insert(t);
            }
        }
        let thresholds: Vec<CalibratedThreshold> = bandwidths
            .iter()
            .map(|&g| CalibratedThreshold {
                len,
                bandwidth: g,
                alpha: a,
                reps,
                seed,
                critical_value: lookup(g, &disk).expect("calibrated above"),
            })
            .collect();
        if let (Some(path), Some(cache)) = (&config.cache_path, disk.as_mut()) {
            if !missing.is_empty() {
                for t in &thresholds {
                    cache.insert(t);
                }
                cache.save(path)?;
            }
        }
        Ok(Self {
            config: config.clone(),
            thresholds,
        })
    }

    pub fn thresholds(&self) -> &[CalibratedThreshold] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.first().map_or(0, |t| t.len)
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn detect(&self, series: &TimeSeries) -> Result<Segmentation> {
        let values = series.values();
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        let prefix = prefix_sums(values);
        let sigma_hat = mad_sigma(values);
        let mut accepted: Vec<usize> = Vec::new();
        for t in &self.thresholds {
            let g = t.bandwidth;
            let raw = mosum_from_prefix(&prefix, g, g)?;
            let mut candidates: Vec<(usize, f64)> = local_maximizers(&raw, g, g)
                .into_iter()
                .map(|k| {
                    let z = if sigma_hat > 0.0 {
                        raw[k].abs() / sigma_hat
                    } else {
                        f64::INFINITY
                    };
                    (k, z)
                })
                .filter(|&(_, z)| z >= t.critical_value)
                .collect();
            candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let reach = self.config.merge_tolerance * g as f64;
            for (k, _) in candidates {
                if accepted.iter().all(|&a| (a.abs_diff(k) as f64) > reach) {
                    accepted.push(k);
                }
            }
        }
        accepted.sort_unstable();
        Segmentation::from_changepoints(values, accepted, sigma_hat)
    }
}

/// One-shot convenience: calibrate for this series length, then detect.
pub fn detect_baseline(
    series: &TimeSeries,
    config: &BaselineConfig,
    grid: &BandwidthGrid,
) -> Result<Segmentation> {
    BaselineDetector::prepare(series.len(), config, grid)?.detect(series)
}
