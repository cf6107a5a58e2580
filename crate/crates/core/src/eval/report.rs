//! Machine-readable protocol reports: one JSON document per run plus flat
//! CSV matrices, file names derived from the config hash.

use crate::error::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Hex digest of a config's canonical JSON encoding (first 16 chars).
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let digest = hex::encode(Sha256::digest(json.as_bytes()));
    digest[..16].to_string()
}

/// Mean rank-1 rate at one pose-estimation error magnitude.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DegradationBucket {
    pub pose_delta: f64,
    pub mean_rank1: f64,
    pub cells: usize,
}

/// The full ranking one probe produced, kept for the double-entry recount.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    /// (row, column) of the matrix cell this probe belongs to.
    pub cell: (usize, usize),
    pub true_subject: u32,
    /// Gallery subjects, best first.
    pub ranked: Vec<u32>,
}

/// Result of one protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct RecognitionReport {
    pub schema_version: u32,
    pub protocol: String,
    pub seed: u64,
    pub config_hash: String,
    /// Row axis: gallery poses, or estimated probe poses for the
    /// unknown-pose protocol.
    pub row_poses: Vec<f64>,
    /// Column axis: probe poses (real probe poses for unknown-pose).
    pub col_poses: Vec<f64>,
    /// Rank-1 rate per cell, in `[0, 1]`.
    pub rank1: Vec<Vec<f64>>,
    /// Raw-feature cosine nearest-neighbor baseline, same shape.
    pub baseline_rank1: Option<Vec<Vec<f64>>>,
    pub mean_rank1: f64,
    pub baseline_mean_rank1: Option<f64>,
    /// Mean rank-1 grouped by |estimated - real| pose difference.
    pub degradation: Option<Vec<DegradationBucket>>,
    pub histograms: Option<super::ScoreHistogramReport>,
    /// Per-probe rankings backing the matrix, for recounting.
    #[serde(skip)]
    pub per_probe: Vec<ProbeOutcome>,
}

impl RecognitionReport {
    /// Recomputes the rank-1 matrix from the stored per-probe rankings.
    /// Must agree exactly with `rank1`.
    pub fn recount_rank1(&self) -> Vec<Vec<f64>> {
        let rows = self.row_poses.len();
        let cols = self.col_poses.len();
        let mut hits = vec![vec![0u64; cols]; rows];
        let mut totals = vec![vec![0u64; cols]; rows];
        for p in &self.per_probe {
            let (r, c) = p.cell;
            totals[r][c] += 1;
            if p.ranked.first() == Some(&p.true_subject) {
                hits[r][c] += 1;
            }
        }
        (0..rows)
            .map(|r| {
                (0..cols)
                    .map(|c| {
                        if totals[r][c] == 0 {
                            0.0
                        } else {
                            hits[r][c] as f64 / totals[r][c] as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report_<protocol>_<hash>.json` into `dir`.
    pub fn write_json(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir
            .as_ref()
            .join(format!("report_{}_{}.json", self.protocol, self.config_hash));
        std::fs::write(&path, self.to_json_string())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(path)
    }

    /// Writes the rank-1 matrix (and baseline, if present) as CSV files.
    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        let mut written = Vec::new();
        let main = dir.join(format!("rank1_{}_{}.csv", self.protocol, self.config_hash));
        write_matrix_csv(&main, &self.row_poses, &self.col_poses, &self.rank1)?;
        written.push(main);
        if let Some(baseline) = &self.baseline_rank1 {
            let path = dir.join(format!(
                "baseline_{}_{}.csv",
                self.protocol, self.config_hash
            ));
            write_matrix_csv(&path, &self.row_poses, &self.col_poses, baseline)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_matrix_csv(
    path: &Path,
    row_poses: &[f64],
    col_poses: &[f64],
    matrix: &[Vec<f64>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("pose");
    for c in col_poses {
        out.push_str(&format!(",{c}"));
    }
    out.push('\n');
    for (r, row) in matrix.iter().enumerate() {
        out.push_str(&format!("{}", row_poses[r]));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}
