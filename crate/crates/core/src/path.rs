// SPDX-License-Identifier: MIT OR Apache-2.0

//! Deterministic solution path over multiscale MOSUM fields.
//!
//! Each iteration takes the position maximizing `|V(k)|`, records it with the
//! scale whose masked statistic is largest there, then drops from every scale
//! each local maximizer `k~` in `(k - G_r, k + G_l)` together with its whole
//! window `(k~ - G_l, k~ + G_r)`. Iteration stops once `V` vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mosum::{window, AggregateField, ScaleField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    /// Candidate location `k`, between 1 and `T - 1`.
    pub k: usize,
    pub importance: f64,
    pub g_l: usize,
    pub g_r: usize,
    /// Zero-based extraction order.
    pub iter: usize,
}

/// Candidates in extraction order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolutionPath {
    pub entries: Vec<PathEntry>,
}

impl SolutionPath {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iterations(&self) -> usize {
        self.entries.len()
    }

    pub fn importances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.importance).collect()
    }
}

pub fn path_depth(path: &SolutionPath) -> usize {
    path.len()
}

/// What gets recorded as a candidate's importance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportanceMode {
    /// `|M_k(G_l, G_r)|` at the winning scale.
    #[default]
    WinningScale,
    /// `|V(k)|` at extraction time.
    Aggregate,
}

/// Stepwise path construction; [`generate_path`] runs it to completion.
#[derive(Clone, Debug)]
pub struct PathGenerator {
    scales: Vec<(usize, usize)>,
    maximizers: Vec<Vec<usize>>,
    alive: Vec<Vec<bool>>,
    masked: Vec<Vec<f64>>,
    v: Vec<f64>,
    support: Vec<u32>,
    mode: ImportanceMode,
    iter: usize,
}

impl PathGenerator {
    pub fn new(
        fields: &[ScaleField],
        aggregate: &AggregateField,
        mode: ImportanceMode,
    ) -> Result<Self> {
        let len = aggregate.values.len();
        let mut support = vec![0u32; len];
        for f in fields {
            if f.masked.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    actual: f.masked.len(),
                });
            }
            for (c, &m) in support.iter_mut().zip(&f.masked) {
                if m != 0.0 {
                    *c += 1;
                }
            }
        }
        let mut v = aggregate.values.clone();
        for (val, &c) in v.iter_mut().zip(&support) {
            if c == 0 {
                *val = 0.0;
            }
        }
        Ok(Self {
            scales: fields.iter().map(|f| (f.g_l, f.g_r)).collect(),
            maximizers: fields.iter().map(|f| f.maximizers.clone()).collect(),
            alive: fields.iter().map(|f| vec![true; f.maximizers.len()]).collect(),
            masked: fields.iter().map(|f| f.masked.clone()).collect(),
            v,
            support,
            mode,
            iter: 0,
        })
    }

    /// Current aggregate `V`.
    pub fn aggregate(&self) -> &[f64] {
        &self.v
    }

    /// Current masked field of every scale.
    pub fn masked(&self) -> &[Vec<f64>] {
        &self.masked
    }

    pub fn scales(&self) -> &[(usize, usize)] {
        &self.scales
    }

    /// `V` recomputed from scratch out of the current masked fields.
    pub fn recompute_aggregate(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.v.len()];
        for m in &self.masked {
            for (acc, &x) in out.iter_mut().zip(m) {
                *acc += x;
            }
        }
        out
    }

    pub fn is_exhausted(&self) -> bool {
        self.v.iter().all(|&x| x == 0.0)
    }

    /// Runs one iteration; `None` once `V` is identically zero.
    pub fn step(&mut self) -> Option<PathEntry> {
        let mut best_k = 0;
        let mut best = 0.0;
        for (k, &val) in self.v.iter().enumerate() {
            if val.abs() > best {
                best = val.abs();
                best_k = k;
            }
        }
        if best == 0.0 {
            return None;
        }
        let k = best_k;

        let mut winner: Option<(usize, f64)> = None;
        for (s, m) in self.masked.iter().enumerate() {
            let value = m[k].abs();
            if value == 0.0 {
                continue;
            }
            let better = match winner {
                None => true,
                Some((w, wv)) => {
                    let (wl, wr) = self.scales[w];
                    let (l, r) = self.scales[s];
                    value > wv || (value == wv && (l + r, l) < (wl + wr, wl))
                }
            };
            if better {
                winner = Some((s, value));
            }
        }
        let (win, win_value) = winner.expect("nonzero V implies a contributing scale");
        let (g_l, g_r) = self.scales[win];
        let importance = match self.mode {
            ImportanceMode::WinningScale => win_value,
            ImportanceMode::Aggregate => best,
        };

        self.prune_around(k);
        debug_assert_eq!(self.v[k], 0.0);

        let entry = PathEntry {
            k,
            importance,
            g_l,
            g_r,
            iter: self.iter,
        };
        self.iter += 1;
        Some(entry)
    }

    fn prune_around(&mut self, k: usize) {
        let len = self.v.len();
        for s in 0..self.scales.len() {
            let (g_l, g_r) = self.scales[s];
            let lo = (k + 1).saturating_sub(g_r);
            let hi = k + g_l - 1;
            let maxima = &self.maximizers[s];
            let start = maxima.partition_point(|&m| m < lo);
            let end = maxima.partition_point(|&m| m <= hi);
            let alive = &mut self.alive[s][start..end];
            for (flag, &center) in alive.iter_mut().zip(&maxima[start..end]) {
                if !*flag {
                    continue;
                }
                *flag = false;
                let (wlo, whi) = window(center, g_l, g_r, len);
                let cells = self.masked[s][wlo..=whi]
                    .iter_mut()
                    .zip(&mut self.support[wlo..=whi])
                    .zip(&mut self.v[wlo..=whi]);
                for ((field, support), v) in cells {
                    if *field == 0.0 {
                        continue;
                    }
                    *support -= 1;
                    *v = if *support == 0 { 0.0 } else { *v - *field };
                    *field = 0.0;
                }
            }
        }
    }
}

/// Runs the generator until `V` vanishes.
pub fn generate_path(
    fields: &[ScaleField],
    aggregate: &AggregateField,
    mode: ImportanceMode,
) -> Result<SolutionPath> {
    let mut generator = PathGenerator::new(fields, aggregate, mode)?;
    let mut entries = Vec::new();
    while let Some(e) = generator.step() {
        entries.push(e);
    }
    Ok(SolutionPath { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mosum::{aggregate, build_grid, compute_fields};

    fn hand_field() -> ScaleField {
        let raw = vec![0.0, 0.0, -1.0, 3.0, -2.0, 0.0];
        ScaleField {
            g_l: 2,
            g_r: 2,
            masked: raw.clone(),
            raw,
            maximizers: vec![3],
        }
    }

    #[test]
    fn single_scale_hand_simulation() {
        let f = hand_field();
        let v = aggregate(std::slice::from_ref(&f)).unwrap();
        let mut g = PathGenerator::new(std::slice::from_ref(&f), &v, ImportanceMode::WinningScale).unwrap();
        let e = g.step().unwrap();
        assert_eq!((e.k, e.importance, e.g_l, e.g_r, e.iter), (3, 3.0, 2, 2, 0));
        assert!(g.is_exhausted());
        assert!(g.step().is_none());

        let path = generate_path(&[f], &v, ImportanceMode::WinningScale).unwrap();
        assert_eq!(path_depth(&path), 1);
    }

    #[test]
    fn empty_for_constant_series() {
        let x = vec![1.5; 40];
        let grid = build_grid(40, true, 3).unwrap();
        let fields = compute_fields(&x, &grid).unwrap();
        let v = aggregate(&fields).unwrap();
        let path = generate_path(&fields, &v, ImportanceMode::WinningScale).unwrap();
        assert!(path.is_empty());
        assert_eq!(path_depth(&path), 0);
    }

    #[test]
    fn noiseless_step_comes_first() {
        let x: Vec<f64> = (1..=100).map(|t| if t <= 50 { 0.0 } else { 1.0 }).collect();
        let grid = build_grid(100, true, 3).unwrap();
        let fields = compute_fields(&x, &grid).unwrap();
        let v = aggregate(&fields).unwrap();
        let brute = (1..100)
            .max_by(|&a, &b| v.values[a].abs().total_cmp(&v.values[b].abs()))
            .unwrap();
        assert_eq!(brute, 50);
        let path = generate_path(&fields, &v, ImportanceMode::WinningScale).unwrap();
        assert_eq!(path.entries[0].k, 50);
        // largest symmetric scale has the largest statistic at a clean step
        assert_eq!((path.entries[0].g_l, path.entries[0].g_r), (21, 21));
    }

    #[test]
    fn winning_scale_tie_break() {
        let mk = |g_l, g_r, val: f64| {
            let mut raw = vec![0.0; 8];
            raw[4] = val;
            ScaleField {
                g_l,
                g_r,
                masked: raw.clone(),
                raw,
                maximizers: vec![4],
            }
        };
        let fields = vec![mk(3, 1, 2.0), mk(1, 3, -2.0), mk(2, 2, 2.0), mk(1, 1, 1.0)];
        let v = aggregate(&fields).unwrap();
        let path = generate_path(&fields, &v, ImportanceMode::WinningScale).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!((path.entries[0].g_l, path.entries[0].g_r), (1, 3));
        assert_eq!(path.entries[0].importance, 2.0);

        let path = generate_path(&fields, &v, ImportanceMode::Aggregate).unwrap();
        assert_eq!(path.entries[0].importance, 3.0);
    }

    #[test]
    fn location_tie_break_prefers_smallest_k() {
        let mut raw = vec![0.0; 10];
        raw[2] = 1.0;
        raw[7] = -1.0;
        let f = ScaleField {
            g_l: 1,
            g_r: 1,
            masked: raw.clone(),
            raw,
            maximizers: vec![2, 7],
        };
        let v = aggregate(std::slice::from_ref(&f)).unwrap();
        let path = generate_path(&[f], &v, ImportanceMode::WinningScale).unwrap();
        let ks: Vec<usize> = path.entries.iter().map(|e| e.k).collect();
        assert_eq!(ks, vec![2, 7]);
    }

    #[test]
    fn length_mismatch_rejected() {
        let f = hand_field();
        let v = AggregateField { values: vec![0.0; 3] };
        assert!(matches!(
            generate_path(&[f], &v, ImportanceMode::WinningScale),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn path_json_shape() {
        let path = SolutionPath {
            entries: vec![PathEntry {
                k: 3,
                importance: 1.5,
                g_l: 2,
                g_r: 1,
                iter: 0,
            }],
        };
        assert_eq!(
            serde_json::to_string(&path).unwrap(),
            r#"[{"k":3,"importance":1.5,"g_l":2,"g_r":1,"iter":0}]"#
        );
    }
}
