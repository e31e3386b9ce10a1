// SPDX-License-Identifier: MIT OR Apache-2.0

//! Series CSV files and detection-result JSON.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::CalibratedThreshold;
use crate::error::{Error, Result};
use crate::path::SolutionPath;
use crate::sdll::{MosumSdllResult, Segmentation, SELECTION_RULE};
use crate::signal::TimeSeries;

/// Parses one value per line. A first line that is not a number is taken as a
/// header; blank lines are skipped.
pub fn read_series<R: Read>(input: R) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 1 {
            return Err(Error::invalid_input(format!(
                "line {}: expected one value, found {} fields",
                i + 1,
                record.len()
            )));
        }
        let field = &record[0];
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(Error::invalid_input(format!(
                    "line {}: `{field}` is not a number",
                    i + 1
                )))
            }
        }
    }
    TimeSeries::new(values)
}

pub fn read_series_csv(path: &Path) -> Result<TimeSeries> {
    read_series(File::open(path)?)
}

/// Writes header `x` followed by one value per line.
pub fn write_series<W: Write>(mut out: W, series: &TimeSeries) -> Result<()> {
    writeln!(out, "x")?;
    for v in series.values() {
        writeln!(out, "{v:?}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    write_series(BufWriter::new(File::create(path)?), series)
}

/// JSON document written by `detect`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub method: String,
    pub n_hat: usize,
    pub changepoints: Vec<usize>,
    pub sigma_hat: f64,
    /// Selection threshold; absent for the baseline, which uses one critical
    /// value per bandwidth.
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<SolutionPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_values: Option<Vec<CalibratedThreshold>>,
}

impl DetectionReport {
    pub fn from_sdll(result: &MosumSdllResult) -> Self {
        let seg = &result.segmentation;
        Self {
            method: "mosum-sdll".to_string(),
            n_hat: seg.n_hat,
            changepoints: seg.changepoints.clone(),
            sigma_hat: seg.sigma_hat,
            threshold: Some(result.threshold),
            path: Some(result.path.clone()),
            selection_rule: Some(SELECTION_RULE.to_string()),
            critical_values: None,
        }
    }

    pub fn from_baseline(seg: &Segmentation, thresholds: &[CalibratedThreshold]) -> Self {
        Self {
            method: "mosum-baseline".to_string(),
            n_hat: seg.n_hat,
            changepoints: seg.changepoints.clone(),
            sigma_hat: seg.sigma_hat,
            threshold: None,
            path: None,
            selection_rule: None,
            critical_values: Some(thresholds.to_vec()),
        }
    }
}

/// Pretty-printed JSON of any serialisable value.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
