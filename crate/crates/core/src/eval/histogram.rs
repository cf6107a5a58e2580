//! Correlation-score histograms, split intra-subject vs inter-subject,
//! before and after subspace modeling.

use crate::error::{Error, Result};
use crate::recognition::score;
use crate::subspace::{CoupledDataset, PairedSubspaceModel};
use nalgebra::DVector;
use serde::Serialize;

/// Scores live in `[-1, 1]`.
pub const HISTOGRAM_RANGE: (f64, f64) = (-1.0, 1.0);

/// A fixed-range histogram with its first two moments.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: Vec<u64>,
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
}

impl Histogram {
    pub fn from_scores(scores: &[f64], nbins: usize, lo: f64, hi: f64) -> Self {
        assert!(nbins > 0 && hi > lo);
        let mut bins = vec![0u64; nbins];
        let width = (hi - lo) / nbins as f64;
        for &s in scores {
            let idx = (((s - lo) / width).floor() as i64).clamp(0, nbins as i64 - 1) as usize;
            bins[idx] += 1;
        }
        let count = scores.len() as u64;
        let mean = if scores.is_empty() {
            0.0
        } else {
            scores.iter().sum::<f64>() / scores.len() as f64
        };
        let variance = if scores.is_empty() {
            0.0
        } else {
            scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / scores.len() as f64
        };
        Self {
            lo,
            hi,
            bins,
            count,
            mean,
            variance,
        }
    }

    /// Bhattacharyya coefficient against another histogram over the same
    /// binning: `sum_i sqrt(p_i q_i)`, 1 for identical distributions, 0
    /// for disjoint support.
    pub fn bhattacharyya(&self, other: &Histogram) -> f64 {
        assert_eq!(self.bins.len(), other.bins.len());
        if self.count == 0 || other.count == 0 {
            return 0.0;
        }
        self.bins
            .iter()
            .zip(&other.bins)
            .map(|(&a, &b)| {
                ((a as f64 / self.count as f64) * (b as f64 / other.count as f64)).sqrt()
            })
            .sum()
    }
}

/// Intra-subject and inter-subject histograms of one score population.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PairHistograms {
    pub intra: Histogram,
    pub inter: Histogram,
}

/// Post-model histograms tagged with the model's method.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ModelHistograms {
    pub method: String,
    pub alpha: f64,
    pub k: usize,
    pub histograms: PairHistograms,
}

/// The full histogram report: raw-feature cosines (when the two views
/// share a dimension) and the post-model scores of every model passed in.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScoreHistogramReport {
    pub nbins: usize,
    pub intra_pairs: u64,
    pub inter_pairs: u64,
    pub raw: Option<PairHistograms>,
    pub models: Vec<ModelHistograms>,
}

/// Computes intra/inter score histograms on coupled test data.
///
/// Every (x column, y column) pair contributes: same subject to the intra
/// histogram, different subjects to the inter histogram. Raw-feature
/// cosines are reported when `d_x == d_y`.
pub fn score_histograms(
    models: &[&PairedSubspaceModel],
    data: &CoupledDataset,
    nbins: usize,
) -> Result<ScoreHistogramReport> {
    let distinct: std::collections::BTreeSet<u32> = data.subject_ids().iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::InsufficientSubjects {
            reason: format!(
                "histograms need at least 2 distinct subjects, got {}",
                distinct.len()
            ),
        });
    }

    let (lo, hi) = HISTOGRAM_RANGE;
    let n = data.n();
    let ids = data.subject_ids();
    let (d_x, d_y) = data.dims();

    let split = |scores_for: &dyn Fn(usize, usize) -> f64| -> PairHistograms {
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let s = scores_for(i, j);
                if ids[i] == ids[j] {
                    intra.push(s);
                } else {
                    inter.push(s);
                }
            }
        }
        PairHistograms {
            intra: Histogram::from_scores(&intra, nbins, lo, hi),
            inter: Histogram::from_scores(&inter, nbins, lo, hi),
        }
    };

    let raw = if d_x == d_y {
        let x = data.x_view();
        let y = data.y_view();
        Some(split(&|i, j| {
            let xi: DVector<f64> = x.column(i).into_owned();
            let yj: DVector<f64> = y.column(j).into_owned();
            score(&xi, &yj).value
        }))
    } else {
        None
    };

    let mut model_reports = Vec::with_capacity(models.len());
    for model in models {
        // Project every column once, then score the projection pairs.
        let mut x_hat = Vec::with_capacity(n);
        let mut y_hat = Vec::with_capacity(n);
        for i in 0..n {
            x_hat.push(model.project_x(&data.x_view().column(i).into_owned())?);
            y_hat.push(model.project_y(&data.y_view().column(i).into_owned())?);
        }
        let hist = split(&|i, j| score(&x_hat[i], &y_hat[j]).value);
        model_reports.push(ModelHistograms {
            method: model.method.as_str().to_string(),
            alpha: model.alpha,
            k: model.k(),
            histograms: hist,
        });
    }

    let intra_pairs = (0..n)
        .map(|i| (0..n).filter(|&j| ids[i] == ids[j]).count() as u64)
        .sum();
    let inter_pairs = (n as u64) * (n as u64) - intra_pairs;

    Ok(ScoreHistogramReport {
        nbins,
        intra_pairs,
        inter_pairs,
        raw,
        models: model_reports,
    })
}
