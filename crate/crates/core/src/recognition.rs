//! Cross-view matching: projection, correlation scoring, mean-rule fusion
//! of per-region classifiers and nearest-neighbor identification.
//!
//! Gallery faces travel through the x side of a model and probes through
//! the y side; the similarity of a pair is the cosine of their projections,
//! and a multi-region matcher fuses the per-region cosines with an
//! unweighted mean.

use crate::error::{Error, Result};
use crate::face::{FeatureVector, Region, RegionFeatures};
use crate::subspace::PairedSubspaceModel;
use nalgebra::DVector;

/// Projects a coupled input pair through a model: `W_x^T (x - x_mean)`,
/// `W_y^T (y - y_mean)`.
pub fn project_pair(
    model: &PairedSubspaceModel,
    x_input: &FeatureVector,
    y_input: &FeatureVector,
) -> Result<(DVector<f64>, DVector<f64>)> {
    Ok((
        model.project_x(&x_input.values)?,
        model.project_y(&y_input.values)?,
    ))
}

/// A correlation score with its degeneracy flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    /// Set when either projection was the zero vector (the input equalled
    /// the training mean); the score is defined as 0 in that case.
    pub zero_projection: bool,
}

/// Cosine between two projections, in `[-1, 1]`.
pub fn score(x_hat: &DVector<f64>, y_hat: &DVector<f64>) -> Score {
    let nx = x_hat.norm();
    let ny = y_hat.norm();
    if nx == 0.0 || ny == 0.0 {
        return Score {
            value: 0.0,
            zero_projection: true,
        };
    }
    let c = x_hat.dot(y_hat) / (nx * ny);
    Score {
        value: c.clamp(-1.0, 1.0),
        zero_projection: false,
    }
}

/// Unweighted mean of per-classifier correlations.
pub fn fuse(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// One per-region classifier: a trained model bound to the region whose
/// features it consumes.
#[derive(Debug, Clone)]
pub struct RegionClassifier {
    pub model: PairedSubspaceModel,
    pub region: Region,
}

impl RegionClassifier {
    pub fn new(model: PairedSubspaceModel, region: Region) -> Self {
        Self { model, region }
    }

    fn feature_for<'a>(
        &self,
        features: &'a RegionFeatures,
        side: &str,
    ) -> Result<&'a FeatureVector> {
        features.get(self.region).ok_or_else(|| Error::RegionMismatch {
            reason: format!("{side} features are missing region {}", self.region),
        })
    }

    /// Projects and scores one gallery/probe feature pair.
    pub fn score_pair(&self, gallery: &FeatureVector, probe: &FeatureVector) -> Result<Score> {
        let (x_hat, y_hat) = project_pair(&self.model, gallery, probe)?;
        Ok(score(&x_hat, &y_hat))
    }
}

/// Outcome of fusing one gallery/probe comparison.
#[derive(Debug, Clone)]
pub struct FusedScore {
    pub value: f64,
    pub per_region: Vec<(Region, f64)>,
    /// Regions dropped because a window was clamped at the canvas border
    /// on either side; the fusion mean runs over the remaining regions.
    pub dropped: Vec<Region>,
    pub zero_projections: usize,
}

/// Mean-rule fusion over per-region classifiers.
#[derive(Debug, Clone)]
pub struct FusedMatcher {
    classifiers: Vec<RegionClassifier>,
}

impl FusedMatcher {
    /// Builds a matcher from one or more classifiers on pairwise distinct
    /// regions.
    pub fn new(classifiers: Vec<RegionClassifier>) -> Result<Self> {
        if classifiers.is_empty() {
            return Err(Error::RegionMismatch {
                reason: "matcher needs at least one classifier".into(),
            });
        }
        for i in 0..classifiers.len() {
            for j in (i + 1)..classifiers.len() {
                if classifiers[i].region == classifiers[j].region {
                    return Err(Error::RegionMismatch {
                        reason: format!("duplicate classifier region {}", classifiers[i].region),
                    });
                }
            }
        }
        Ok(Self { classifiers })
    }

    pub fn classifiers(&self) -> &[RegionClassifier] {
        &self.classifiers
    }

    pub fn regions(&self) -> impl Iterator<Item = Region> + '_ {
        self.classifiers.iter().map(|c| c.region)
    }

    /// Fused score of one gallery/probe pair.
    pub fn fused_score(
        &self,
        gallery: &RegionFeatures,
        probe: &RegionFeatures,
    ) -> Result<FusedScore> {
        let mut per_region = Vec::with_capacity(self.classifiers.len());
        let mut dropped = Vec::new();
        let mut zero_projections = 0;
        for c in &self.classifiers {
            let g = c.feature_for(gallery, "gallery")?;
            let p = c.feature_for(probe, "probe")?;
            if g.clamped || p.clamped {
                dropped.push(c.region);
                continue;
            }
            let s = c.score_pair(g, p)?;
            if s.zero_projection {
                zero_projections += 1;
            }
            per_region.push((c.region, s.value));
        }
        let value = fuse(&per_region.iter().map(|(_, s)| *s).collect::<Vec<_>>())?;
        Ok(FusedScore {
            value,
            per_region,
            dropped,
            zero_projections,
        })
    }
}

/// A labeled gallery face.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub subject: u32,
    pub features: RegionFeatures,
}

/// One row of an identification ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedMatch {
    pub subject: u32,
    pub score: f64,
}

/// Ranks gallery identities against a probe by fused score, descending.
///
/// Ties keep gallery insertion order. When a gallery identity has several
/// images, its score is the maximum over them.
pub fn identify(
    matcher: &FusedMatcher,
    gallery: &[GalleryEntry],
    probe: &RegionFeatures,
) -> Result<Vec<RankedMatch>> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let mut order: Vec<u32> = Vec::new();
    let mut best: std::collections::HashMap<u32, f64> = std::collections::HashMap::new();
    for entry in gallery {
        let fused = matcher.fused_score(&entry.features, probe)?;
        match best.get_mut(&entry.subject) {
            None => {
                order.push(entry.subject);
                best.insert(entry.subject, fused.value);
            }
            Some(current) => {
                if fused.value > *current {
                    *current = fused.value;
                }
            }
        }
    }
    let mut ranked: Vec<RankedMatch> = order
        .into_iter()
        .map(|subject| RankedMatch {
            subject,
            score: best[&subject],
        })
        .collect();
    // Stable sort: equal scores keep first-insertion order.
    ranked.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));
    Ok(ranked)
}
