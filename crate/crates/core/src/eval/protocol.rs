//! Protocol runners over pose families: all-poses-vs-all-poses matrices
//! and the unknown-probe-pose confusion matrix. One model is trained per
//! pose pair; identification is nearest-neighbor on fused correlations.

use crate::error::{Error, Result};
use crate::eval::report::{config_hash, DegradationBucket, ProbeOutcome, RecognitionReport};
use crate::face::{Region, RegionFeatures};
use crate::recognition::{identify, score, FusedMatcher, GalleryEntry, RegionClassifier};
use crate::subspace::{fit, Method, SolverConfig};
use crate::synth::PoseFamilyDataset;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which feature representation a protocol run uses. Pose-family runs
/// carry one raw vector per face, so the mode only matters for image
/// pipelines; it is recorded in the config hash either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    Holistic,
    Local,
    HolisticPlusLocal,
}

impl FeatureMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureMode::Holistic => "holistic",
            FeatureMode::Local => "local",
            FeatureMode::HolisticPlusLocal => "holistic+local",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "holistic" => Ok(FeatureMode::Holistic),
            "local" => Ok(FeatureMode::Local),
            "holistic+local" | "holistic-plus-local" => Ok(FeatureMode::HolisticPlusLocal),
            other => Err(Error::InvalidParams {
                reason: format!("unknown feature mode {other:?}"),
            }),
        }
    }

    /// The regions this mode fuses.
    pub fn regions(&self) -> Vec<Region> {
        match self {
            FeatureMode::Holistic => vec![Region::Holistic],
            FeatureMode::Local => Region::ALL[1..].to_vec(),
            FeatureMode::HolisticPlusLocal => Region::ALL.to_vec(),
        }
    }
}

/// Configuration of one protocol run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub method: Method,
    pub alpha: f64,
    pub k: usize,
    pub feature_mode: FeatureMode,
    /// Gallery pose for the unknown-probe-pose protocol.
    pub gallery_pose: f64,
    /// Probe poses for the unknown-probe-pose protocol.
    pub probe_poses: Vec<f64>,
    /// Histogram bin count where histograms are emitted.
    pub bins: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            method: Method::Cca,
            alpha: 1e-6,
            k: 16,
            feature_mode: FeatureMode::Holistic,
            gallery_pose: 0.0,
            probe_poses: Vec::new(),
            bins: 50,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    fn solver(&self) -> SolverConfig {
        SolverConfig::new(self.method, self.alpha, self.k)
    }
}

/// Rank-1 rate of a probe set against a gallery, with the full rankings.
pub fn rank1_over_probes(
    matcher: &FusedMatcher,
    gallery: &[GalleryEntry],
    probes: &[(u32, RegionFeatures)],
    cell: (usize, usize),
) -> Result<(f64, Vec<ProbeOutcome>)> {
    let mut hits = 0usize;
    let mut outcomes = Vec::with_capacity(probes.len());
    for (true_subject, features) in probes {
        let ranking = identify(matcher, gallery, features)?;
        if ranking.first().map(|m| m.subject) == Some(*true_subject) {
            hits += 1;
        }
        outcomes.push(ProbeOutcome {
            cell,
            true_subject: *true_subject,
            ranked: ranking.into_iter().map(|m| m.subject).collect(),
        });
    }
    Ok((hits as f64 / probes.len().max(1) as f64, outcomes))
}

fn single_region_gallery(view: &DMatrix<f64>, ids: &[u32]) -> Vec<GalleryEntry> {
    (0..view.ncols())
        .map(|c| GalleryEntry {
            subject: ids[c],
            features: RegionFeatures::single_raw(Region::Holistic, view.column(c).into_owned()),
        })
        .collect()
}

fn single_region_probes(view: &DMatrix<f64>, ids: &[u32]) -> Vec<(u32, RegionFeatures)> {
    (0..view.ncols())
        .map(|c| {
            (
                ids[c],
                RegionFeatures::single_raw(Region::Holistic, view.column(c).into_owned()),
            )
        })
        .collect()
}

/// Raw-feature cosine nearest-neighbor rank-1 rate (the no-model baseline).
fn raw_cosine_rank1(
    gallery: &DMatrix<f64>,
    gallery_ids: &[u32],
    probes: &DMatrix<f64>,
    probe_ids: &[u32],
) -> f64 {
    let mut hits = 0usize;
    for p in 0..probes.ncols() {
        let pv: DVector<f64> = probes.column(p).into_owned();
        let mut best = f64::NEG_INFINITY;
        let mut best_subject = None;
        for g in 0..gallery.ncols() {
            let gv: DVector<f64> = gallery.column(g).into_owned();
            let s = score(&gv, &pv).value;
            if s > best {
                best = s;
                best_subject = Some(gallery_ids[g]);
            }
        }
        if best_subject == Some(probe_ids[p]) {
            hits += 1;
        }
    }
    hits as f64 / probes.ncols().max(1) as f64
}

struct CellResult {
    rank1: f64,
    baseline: f64,
    outcomes: Vec<ProbeOutcome>,
}

fn run_cell(
    config: &ProtocolConfig,
    family: &PoseFamilyDataset,
    train_x_pose: usize,
    train_y_pose: usize,
    probe_pose: usize,
    cell: (usize, usize),
) -> Result<CellResult> {
    let train = family.coupled_train(train_x_pose, train_y_pose)?;
    let model = fit(&train, &config.solver())?;
    let matcher = FusedMatcher::new(vec![RegionClassifier::new(model, Region::Holistic)])?;

    let (gallery_view, gallery_ids) = family.test_view(train_x_pose);
    let (probe_view, probe_ids) = family.test_view(probe_pose);
    let gallery = single_region_gallery(&gallery_view, &gallery_ids);
    let probes = single_region_probes(&probe_view, &probe_ids);

    let (rank1, outcomes) = rank1_over_probes(&matcher, &gallery, &probes, cell)?;
    let baseline = raw_cosine_rank1(&gallery_view, &gallery_ids, &probe_view, &probe_ids);
    Ok(CellResult {
        rank1,
        baseline,
        outcomes,
    })
}

fn check_test_subjects(family: &PoseFamilyDataset) -> Result<()> {
    if family.n_subjects() - family.n_train_subjects < 2 {
        return Err(Error::InsufficientSubjects {
            reason: format!(
                "{} test subjects, need at least 2",
                family.n_subjects() - family.n_train_subjects
            ),
        });
    }
    Ok(())
}

/// All poses against all poses: one model per ordered pose pair, rank-1
/// per cell. Diagonal cells (same pose on both sides) are sanity cells.
pub fn run_all_vs_all(
    config: &ProtocolConfig,
    family: &PoseFamilyDataset,
) -> Result<RecognitionReport> {
    if family.n_poses() < 2 {
        return Err(Error::InvalidParams {
            reason: format!("all-vs-all needs at least 2 poses, got {}", family.n_poses()),
        });
    }
    check_test_subjects(family)?;

    let p = family.n_poses();
    let cells: Vec<(usize, usize)> = (0..p)
        .flat_map(|g| (0..p).map(move |q| (g, q)))
        .collect();
    let results: Vec<Result<CellResult>> = cells
        .par_iter()
        .map(|&(g, q)| run_cell(config, family, g, q, q, (g, q)))
        .collect();

    let mut rank1 = vec![vec![0.0; p]; p];
    let mut baseline = vec![vec![0.0; p]; p];
    let mut per_probe = Vec::new();
    for (&(g, q), result) in cells.iter().zip(results) {
        let cell = result?;
        rank1[g][q] = cell.rank1;
        baseline[g][q] = cell.baseline;
        per_probe.extend(cell.outcomes);
    }

    let mean_rank1 = matrix_mean(&rank1);
    let baseline_mean = matrix_mean(&baseline);
    Ok(RecognitionReport {
        schema_version: 1,
        protocol: "all-vs-all".into(),
        seed: config.seed,
        config_hash: config_hash(config),
        row_poses: family.poses.clone(),
        col_poses: family.poses.clone(),
        rank1,
        baseline_rank1: Some(baseline),
        mean_rank1,
        baseline_mean_rank1: Some(baseline_mean),
        degradation: None,
        histograms: None,
        per_probe,
    })
}

/// Unknown-probe-pose protocol: probes of real pose `r` scored with the
/// model trained for (gallery pose, estimated pose `e`), over every
/// (e, r) combination. Also reports mean rank-1 by |e - r|.
pub fn run_unknown_probe_pose(
    config: &ProtocolConfig,
    family: &PoseFamilyDataset,
) -> Result<RecognitionReport> {
    if config.probe_poses.is_empty() {
        return Err(Error::InvalidParams {
            reason: "unknown-pose protocol needs at least one probe pose".into(),
        });
    }
    check_test_subjects(family)?;

    let gallery_pose = family.pose_index(config.gallery_pose)?;
    let probe_indices: Vec<usize> = config
        .probe_poses
        .iter()
        .map(|&p| family.pose_index(p))
        .collect::<Result<_>>()?;

    let m = probe_indices.len();
    let cells: Vec<(usize, usize)> = (0..m)
        .flat_map(|e| (0..m).map(move |r| (e, r)))
        .collect();
    let results: Vec<Result<CellResult>> = cells
        .par_iter()
        .map(|&(e, r)| {
            run_cell(
                config,
                family,
                gallery_pose,
                probe_indices[e],
                probe_indices[r],
                (e, r),
            )
        })
        .collect();

    let mut rank1 = vec![vec![0.0; m]; m];
    let mut per_probe = Vec::new();
    for (&(e, r), result) in cells.iter().zip(results) {
        let cell = result?;
        rank1[e][r] = cell.rank1;
        per_probe.extend(cell.outcomes);
    }

    // Bucket cells by |estimated - real| pose difference.
    let mut buckets: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for e in 0..m {
        for r in 0..m {
            let delta = (config.probe_poses[e] - config.probe_poses[r]).abs();
            buckets
                .entry((delta * 1000.0).round() as i64)
                .or_default()
                .push(rank1[e][r]);
        }
    }
    let degradation = buckets
        .into_iter()
        .map(|(key, rates)| DegradationBucket {
            pose_delta: key as f64 / 1000.0,
            mean_rank1: rates.iter().sum::<f64>() / rates.len() as f64,
            cells: rates.len(),
        })
        .collect();

    let mean_rank1 = matrix_mean(&rank1);
    Ok(RecognitionReport {
        schema_version: 1,
        protocol: "unknown-pose".into(),
        seed: config.seed,
        config_hash: config_hash(config),
        row_poses: config.probe_poses.clone(),
        col_poses: config.probe_poses.clone(),
        rank1,
        baseline_rank1: None,
        mean_rank1,
        baseline_mean_rank1: None,
        degradation: Some(degradation),
        histograms: None,
        per_probe,
    })
}

fn matrix_mean(m: &[Vec<f64>]) -> f64 {
    let count: usize = m.iter().map(|r| r.len()).sum();
    if count == 0 {
        return 0.0;
    }
    m.iter().flatten().sum::<f64>() / count as f64
}
