// SPDX-License-Identifier: MIT OR Apache-2.0

//! Piecewise-constant test signals, Gaussian sampling and the detectability
//! diagnostic.
//!
//! Positions follow the 1-based convention used throughout the crate: a change
//! point `eta` means the mean changes between observation `eta` and `eta + 1`,
//! so valid change points satisfy `1 <= eta < T`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth piecewise-constant mean function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignal", into = "RawSignal")]
pub struct PiecewiseSignal {
    len: usize,
    changepoints: Vec<usize>,
    levels: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSignal {
    #[serde(rename = "T")]
    len: usize,
    changepoints: Vec<usize>,
    levels: Vec<f64>,
}

impl TryFrom<RawSignal> for PiecewiseSignal {
    type Error = Error;

    fn try_from(raw: RawSignal) -> Result<Self> {
        Self::new(raw.len, raw.changepoints, raw.levels)
    }
}

impl From<PiecewiseSignal> for RawSignal {
    fn from(s: PiecewiseSignal) -> Self {
        Self {
            len: s.len,
            changepoints: s.changepoints,
            levels: s.levels,
        }
    }
}

impl PiecewiseSignal {
    pub fn new(len: usize, changepoints: Vec<usize>, levels: Vec<f64>) -> Result<Self> {
        if len < 2 {
            return Err(Error::invalid_input(format!(
                "signal length must be >= 2; got {len}"
            )));
        }
        if levels.len() != changepoints.len() + 1 {
            return Err(Error::invalid_input(format!(
                "{} change points need {} levels; got {}",
                changepoints.len(),
                changepoints.len() + 1,
                levels.len()
            )));
        }
        let mut prev = 0;
        for &cp in &changepoints {
            if cp <= prev || cp >= len {
                return Err(Error::invalid_input(format!(
                    "change points must be strictly increasing within [1, {}); got {changepoints:?}",
                    len
                )));
            }
            prev = cp;
        }
        if let Some(bad) = levels.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid_input(format!("non-finite level {bad}")));
        }
        if levels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid_input(
                "adjacent segment levels must differ",
            ));
        }
        Ok(Self {
            len,
            changepoints,
            levels,
        })
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn changepoints(&self) -> &[usize] {
        &self.changepoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of change points `N`.
    pub fn num_changes(&self) -> usize {
        self.changepoints.len()
    }

    /// Jump magnitudes `|level_{i+1} - level_i|`.
    pub fn jumps(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    /// Distance from each change point to its nearest neighbour, with the
    /// series ends acting as change points at 0 and `T`.
    pub fn spacings(&self) -> Vec<usize> {
        let n = self.changepoints.len();
        (0..n)
            .map(|i| {
                let left = if i == 0 { 0 } else { self.changepoints[i - 1] };
                let right = if i + 1 == n {
                    self.len
                } else {
                    self.changepoints[i + 1]
                };
                let cp = self.changepoints[i];
                (cp - left).min(right - cp)
            })
            .collect()
    }

    /// Smallest spacing, `None` when the signal has no change point.
    pub fn min_spacing(&self) -> Option<usize> {
        self.spacings().into_iter().min()
    }

    /// The mean function `f_1, ..., f_T` (stored 0-based).
    pub fn mean_function(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        let mut start = 0;
        for (seg, &level) in self.levels.iter().enumerate() {
            let end = self.changepoints.get(seg).copied().unwrap_or(self.len);
            out.extend(std::iter::repeat_n(level, end - start));
            start = end;
        }
        out
    }

    /// Applies `level -> scale * level + shift` to every segment.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(
            self.len,
            self.changepoints.clone(),
            self.levels.iter().map(|v| scale * v + shift).collect(),
        )
    }
}

/// Noise distributions supported by [`sample_series`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid_input(format!(
                "noise sigma must be finite and >= 0; got {sigma}"
            )));
        }
        Ok(Self {
            sigma,
            kind: NoiseKind::Gaussian,
            seed,
        })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Observed series `X_1, ..., X_T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid_input(format!(
                "series needs at least 2 observations; got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid_input(format!(
                "non-finite value {v} at position {}",
                i + 1
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Returns `scale * X + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| scale * v + shift).collect())
    }
}

/// Alternating `low`/`high` signal with a change every `period` observations.
pub fn make_teeth(len: usize, period: usize, low: f64, high: f64) -> Result<PiecewiseSignal> {
    if period == 0 || period >= len {
        return Err(Error::invalid_input(format!(
            "teeth period must lie in [1, T); got period={period}, T={len}"
        )));
    }
    let changepoints: Vec<usize> = (1..).map(|i| i * period).take_while(|&cp| cp < len).collect();
    let levels = (0..=changepoints.len())
        .map(|i| if i % 2 == 0 { low } else { high })
        .collect();
    PiecewiseSignal::new(len, changepoints, levels)
}

/// Built-in benchmark signals.
///
/// These are analogues of the teeth-type and mixed-regime models used in the
/// literature; their parameters are fixed here and echoed in every report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Teeth with spacing 5, unit jumps, `sigma = 0.3` (199 change points).
    Et,
    /// Denser teeth with spacing 3 and jumps of 2 (332 change points).
    Eet,
    /// Long segments with small jumps next to short spikes with large jumps.
    Mix,
}

/// Parameters of a preset, in a form suitable for report headers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetDescription {
    pub name: String,
    pub len: usize,
    pub num_changes: usize,
    pub min_spacing: usize,
    pub sigma: f64,
    pub changepoints: String,
    pub levels: String,
    pub note: String,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Et, Preset::Eet, Preset::Mix];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Et => "et",
            Preset::Eet => "eet",
            Preset::Mix => "mix",
        }
    }

    pub fn build(self) -> (PiecewiseSignal, NoiseSpec) {
        let (signal, sigma) = match self {
            Preset::Et => (make_teeth(1000, 5, 0.0, 1.0), 0.3),
            Preset::Eet => (make_teeth(999, 3, 0.0, 2.0), 0.3),
            Preset::Mix => (
                PiecewiseSignal::new(
                    1000,
                    vec![200, 210, 500, 750, 753],
                    vec![0.0, 3.0, 0.0, 0.6, 4.0, 0.6],
                ),
                0.4,
            ),
        };
        let signal = signal.expect("preset parameters are valid");
        (signal, NoiseSpec::gaussian(sigma, 0).expect("preset sigma is valid"))
    }

    pub fn describe(self) -> PresetDescription {
        let (signal, noise) = self.build();
        let (changepoints, levels, note) = match self {
            Preset::Et => (
                "5,10,...,995".to_string(),
                "alternating 0/1".to_string(),
                "extreme-teeth analogue",
            ),
            Preset::Eet => (
                "3,6,...,996".to_string(),
                "alternating 0/2".to_string(),
                "extreme-extreme-teeth analogue (denser, larger jumps)",
            ),
            Preset::Mix => (
                format!("{:?}", signal.changepoints()),
                format!("{:?}", signal.levels()),
                "mixed regime: small jumps on long segments, large jumps on short ones",
            ),
        };
        PresetDescription {
            name: self.name().to_string(),
            len: signal.len(),
            num_changes: signal.num_changes(),
            min_spacing: signal.min_spacing().unwrap_or(0),
            sigma: noise.sigma,
            changepoints,
            levels,
            note: note.to_string(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "et" | "extreme.teeth" => Ok(Preset::Et),
            "eet" | "extreme.extreme.teeth" => Ok(Preset::Eet),
            "mix" => Ok(Preset::Mix),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

pub fn preset(name: &str) -> Result<(PiecewiseSignal, NoiseSpec)> {
    Ok(name.parse::<Preset>()?.build())
}

/// Random stream for one replication: the master seed selects the key and the
/// replication index selects a disjoint ChaCha stream.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Draws `X_t = f_t + sigma * eps_t` with i.i.d. standard Gaussian `eps_t`.
pub fn sample_series(
    signal: &PiecewiseSignal,
    noise: &NoiseSpec,
    replication: u64,
) -> Result<TimeSeries> {
    let mut values = signal.mean_function();
    if noise.sigma > 0.0 {
        let mut rng = replication_rng(noise.seed, replication);
        for v in values.iter_mut() {
            let eps: f64 = StandardNormal.sample(&mut rng);
            *v += noise.sigma * eps;
        }
    }
    TimeSeries::new(values)
}

/// Outcome of [`detectability_index`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detectability {
    pub index: f64,
    pub threshold: f64,
    pub detectable: bool,
}

/// Compares `min_i(delta_i * jump_i^2) / sigma^2` against `log T`.
///
/// Below the threshold no estimator can consistently localise every change
/// point; above it the diagnostic only says detection is not ruled out.
pub fn detectability_index(signal: &PiecewiseSignal, sigma: f64) -> Result<Detectability> {
    if signal.num_changes() == 0 {
        return Err(Error::invalid_input(
            "detectability index needs at least one change point",
        ));
    }
    let min_product = signal
        .spacings()
        .into_iter()
        .zip(signal.jumps())
        .map(|(d, j)| d as f64 * j * j)
        .fold(f64::INFINITY, f64::min);
    detectability_from_parts(min_product, sigma, (signal.len() as f64).ln())
}

/// Evaluates the diagnostic from `min_i(delta_i * jump_i^2)` and `log T`.
pub fn detectability_from_parts(
    min_spacing_jump_sq: f64,
    sigma: f64,
    log_len: f64,
) -> Result<Detectability> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::invalid_input(format!(
            "sigma must be >= 0; got {sigma}"
        )));
    }
    let index = if sigma == 0.0 {
        f64::INFINITY
    } else {
        min_spacing_jump_sq / (sigma * sigma)
    };
    Ok(Detectability {
        index,
        threshold: log_len,
        detectable: index >= log_len,
    })
}
