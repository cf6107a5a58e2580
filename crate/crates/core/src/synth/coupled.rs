//! Coupled latent-variable generators.
//!
//! Each subject has a latent identity vector `z ~ N(0, I_q)`. A view
//! observes `A z + sigma eps` through its own full-column-rank map `A`
//! with unit-norm rows; a fraction of the y-view coordinates can be
//! overwritten with identity-independent noise, modeling non-face content
//! entering a misaligned feature vector. Everything is a pure function of
//! the seed.

use crate::error::{Error, Result};
use crate::subspace::CoupledDataset;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Parameters of the two-view generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeSpec {
    pub latent_dim: usize,
    pub d_x: usize,
    pub d_y: usize,
    /// Total number of subjects; the first half trains, the second half
    /// tests (subject-disjoint by construction).
    pub n_subjects: usize,
    /// Images per subject per view.
    pub images_per_subject: usize,
    /// Explicit view maps; `None` draws random unit-row maps from the seed.
    pub view_maps: Option<(DMatrix<f64>, DMatrix<f64>)>,
    /// Additive noise scale for both views.
    pub noise_sigma: f64,
    /// Share of y-view coordinates replaced by identity-independent noise.
    pub occlusion_fraction: f64,
    pub seed: u64,
    /// Pose tags recorded on the generated datasets `(x view, y view)`.
    pub pose_labels: (f64, f64),
}

impl Default for GenerativeSpec {
    /// The desk-scale reference configuration: 100 train + 100 test
    /// subjects, 8 latent dimensions observed in two 50-dimensional views,
    /// noise 0.3, 20% occlusion, seed 42.
    fn default() -> Self {
        Self {
            latent_dim: 8,
            d_x: 50,
            d_y: 50,
            n_subjects: 200,
            images_per_subject: 1,
            view_maps: None,
            noise_sigma: 0.3,
            occlusion_fraction: 0.2,
            seed: 42,
            pose_labels: (0.0, 30.0),
        }
    }
}

impl GenerativeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.latent_dim > self.d_x.min(self.d_y) {
            return Err(Error::InvalidSpec {
                reason: format!(
                    "latent_dim={} must be in 1..=min(d_x, d_y)={}",
                    self.latent_dim,
                    self.d_x.min(self.d_y)
                ),
            });
        }
        if self.n_subjects < 4 {
            return Err(Error::InvalidSpec {
                reason: "n_subjects must be at least 4 (2 train + 2 test)".into(),
            });
        }
        if self.images_per_subject == 0 {
            return Err(Error::InvalidSpec {
                reason: "images_per_subject must be positive".into(),
            });
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidSpec {
                reason: format!("noise_sigma must be non-negative, got {}", self.noise_sigma),
            });
        }
        if !(0.0..1.0).contains(&self.occlusion_fraction) {
            return Err(Error::InvalidSpec {
                reason: format!(
                    "occlusion_fraction must lie in [0, 1), got {}",
                    self.occlusion_fraction
                ),
            });
        }
        if let Some((ax, ay)) = &self.view_maps {
            if ax.nrows() != self.d_x || ax.ncols() != self.latent_dim {
                return Err(Error::InvalidSpec {
                    reason: format!(
                        "x view map is {}x{}, expected {}x{}",
                        ax.nrows(),
                        ax.ncols(),
                        self.d_x,
                        self.latent_dim
                    ),
                });
            }
            if ay.nrows() != self.d_y || ay.ncols() != self.latent_dim {
                return Err(Error::InvalidSpec {
                    reason: format!(
                        "y view map is {}x{}, expected {}x{}",
                        ay.nrows(),
                        ay.ncols(),
                        self.d_y,
                        self.latent_dim
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn n_train_subjects(&self) -> usize {
        self.n_subjects / 2
    }
}

/// What the generator actually drew, for oracle checks.
#[derive(Debug, Clone)]
pub struct CoupledGroundTruth {
    pub a_x: DMatrix<f64>,
    pub a_y: DMatrix<f64>,
    /// Sorted y-view coordinate indices that carry pure noise.
    pub occluded_coords: Vec<usize>,
    /// Latents, one column per subject (train subjects first).
    pub latents: DMatrix<f64>,
}

/// Generates subject-disjoint train and test splits of coupled data.
pub fn generate_coupled(
    spec: &GenerativeSpec,
) -> Result<(CoupledDataset, CoupledDataset, CoupledGroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let latents = draw_matrix(&mut rng, spec.latent_dim, spec.n_subjects);
    generate_with_latents(spec, &latents, &mut rng)
}

/// Shared-latent generation; `rng` must already be past the latent draw.
fn generate_with_latents(
    spec: &GenerativeSpec,
    latents: &DMatrix<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<(CoupledDataset, CoupledDataset, CoupledGroundTruth)> {
    let (a_x, a_y) = match &spec.view_maps {
        Some((ax, ay)) => (ax.clone(), ay.clone()),
        None => {
            let ax = unit_row_map(rng, spec.d_x, spec.latent_dim);
            let ay = unit_row_map(rng, spec.d_y, spec.latent_dim);
            (ax, ay)
        }
    };

    let n_occluded = (spec.occlusion_fraction * spec.d_y as f64).floor() as usize;
    let mut occluded_coords =
        rand::seq::index::sample(rng, spec.d_y, n_occluded.min(spec.d_y)).into_vec();
    occluded_coords.sort_unstable();

    let n_train = spec.n_train_subjects();
    let per_split = |subjects: std::ops::Range<usize>, rng: &mut ChaCha8Rng| -> Result<CoupledDataset> {
        let cols = subjects.len() * spec.images_per_subject;
        let mut x = DMatrix::zeros(spec.d_x, cols);
        let mut y = DMatrix::zeros(spec.d_y, cols);
        let mut ids = Vec::with_capacity(cols);
        let mut col = 0;
        for s in subjects {
            let z = latents.column(s);
            for _ in 0..spec.images_per_subject {
                let mut xs = &a_x * z;
                let mut ys = &a_y * z;
                for v in xs.iter_mut() {
                    *v += spec.noise_sigma * rng.sample::<f64, _>(StandardNormal);
                }
                for v in ys.iter_mut() {
                    *v += spec.noise_sigma * rng.sample::<f64, _>(StandardNormal);
                }
                for &c in &occluded_coords {
                    ys[c] = rng.sample::<f64, _>(StandardNormal);
                }
                x.column_mut(col).copy_from(&xs);
                y.column_mut(col).copy_from(&ys);
                ids.push(s as u32);
                col += 1;
            }
        }
        CoupledDataset::new(x, y, ids, spec.pose_labels)
    };

    let train = per_split(0..n_train, rng)?;
    let test = per_split(n_train..spec.n_subjects, rng)?;
    Ok((
        train,
        test,
        CoupledGroundTruth {
            a_x,
            a_y,
            occluded_coords,
            latents: latents.clone(),
        },
    ))
}

/// Generates a family of region datasets that share subject latents but
/// have independent view maps, noise and occlusion masks per region.
/// Region 0 plays the holistic role.
pub fn generate_region_family(spec: &GenerativeSpec, n_regions: usize) -> Result<RegionFamily> {
    spec.validate()?;
    if n_regions == 0 {
        return Err(Error::InvalidSpec {
            reason: "n_regions must be positive".into(),
        });
    }
    let mut master = ChaCha8Rng::seed_from_u64(spec.seed);
    let latents = draw_matrix(&mut master, spec.latent_dim, spec.n_subjects);

    let mut regions = Vec::with_capacity(n_regions);
    for r in 0..n_regions {
        // Fixed stream split per region keeps every region reproducible on
        // its own.
        let sub_seed = spec
            .seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(r as u64 + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let (train, test, truth) = generate_with_latents(spec, &latents, &mut rng)?;
        regions.push(RegionDatasets { train, test, truth });
    }
    Ok(RegionFamily { regions })
}

/// Train/test splits plus ground truth for one region.
#[derive(Debug, Clone)]
pub struct RegionDatasets {
    pub train: CoupledDataset,
    pub test: CoupledDataset,
    pub truth: CoupledGroundTruth,
}

/// Shared-latent multi-region family.
#[derive(Debug, Clone)]
pub struct RegionFamily {
    pub regions: Vec<RegionDatasets>,
}

/// Parameters of the smooth pose family generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFamilySpec {
    pub latent_dim: usize,
    pub dim: usize,
    pub n_subjects: usize,
    /// Pose tags in degrees, one view per pose.
    pub poses: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for PoseFamilySpec {
    fn default() -> Self {
        Self {
            latent_dim: 8,
            dim: 40,
            n_subjects: 160,
            poses: vec![-45.0, -30.0, -15.0, 15.0, 30.0, 45.0],
            noise_sigma: 0.3,
            seed: 42,
        }
    }
}

impl PoseFamilySpec {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.latent_dim > self.dim {
            return Err(Error::InvalidSpec {
                reason: "latent_dim must be in 1..=dim".into(),
            });
        }
        if self.n_subjects < 4 {
            return Err(Error::InvalidSpec {
                reason: "n_subjects must be at least 4".into(),
            });
        }
        if self.poses.is_empty() {
            return Err(Error::InvalidSpec {
                reason: "poses must be non-empty".into(),
            });
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidSpec {
                reason: "noise_sigma must be non-negative".into(),
            });
        }
        Ok(())
    }
}

/// One view per pose over a shared subject roster, with view maps that
/// rotate smoothly with the pose angle.
#[derive(Debug, Clone)]
pub struct PoseFamilyDataset {
    pub poses: Vec<f64>,
    /// One `dim x n_subjects` matrix per pose; column `j` in every view
    /// belongs to subject `j`.
    pub views: Vec<DMatrix<f64>>,
    pub subject_ids: Vec<u32>,
    pub n_train_subjects: usize,
}

impl PoseFamilyDataset {
    pub fn n_poses(&self) -> usize {
        self.poses.len()
    }

    pub fn n_subjects(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn pose_index(&self, pose: f64) -> Result<usize> {
        self.poses
            .iter()
            .position(|&p| p == pose)
            .ok_or_else(|| Error::InvalidParams {
                reason: format!("pose {pose} not present in family {:?}", self.poses),
            })
    }

    /// The coupled training set for a pose pair (x view = `pose_i`,
    /// y view = `pose_j`).
    pub fn coupled_train(&self, pose_i: usize, pose_j: usize) -> Result<CoupledDataset> {
        self.coupled_range(pose_i, pose_j, 0..self.n_train_subjects)
    }

    /// The coupled test set for a pose pair.
    pub fn coupled_test(&self, pose_i: usize, pose_j: usize) -> Result<CoupledDataset> {
        self.coupled_range(pose_i, pose_j, self.n_train_subjects..self.n_subjects())
    }

    fn coupled_range(
        &self,
        pose_i: usize,
        pose_j: usize,
        range: std::ops::Range<usize>,
    ) -> Result<CoupledDataset> {
        let cols: Vec<usize> = range.collect();
        let x = self.views[pose_i].select_columns(cols.iter());
        let y = self.views[pose_j].select_columns(cols.iter());
        let ids = cols.iter().map(|&c| self.subject_ids[c]).collect();
        CoupledDataset::new(x, y, ids, (self.poses[pose_i], self.poses[pose_j]))
    }

    /// Test-split columns of one pose view, with subject ids.
    pub fn test_view(&self, pose: usize) -> (DMatrix<f64>, Vec<u32>) {
        let cols: Vec<usize> = (self.n_train_subjects..self.n_subjects()).collect();
        let m = self.views[pose].select_columns(cols.iter());
        let ids = cols.iter().map(|&c| self.subject_ids[c]).collect();
        (m, ids)
    }
}

/// Generates the smooth pose family: `A(theta) = cos(c theta) A0 +
/// sin(c theta) A1` with rows renormalized, `c = pi / 180`.
pub fn generate_pose_family(spec: &PoseFamilySpec) -> Result<PoseFamilyDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a0 = draw_matrix(&mut rng, spec.dim, spec.latent_dim);
    let a1 = draw_matrix(&mut rng, spec.dim, spec.latent_dim);
    let latents = draw_matrix(&mut rng, spec.latent_dim, spec.n_subjects);

    let mut views = Vec::with_capacity(spec.poses.len());
    for &pose in &spec.poses {
        let t = pose.to_radians();
        let mut map = &a0 * t.cos() + &a1 * t.sin();
        normalize_rows(&mut map);
        let mut view = &map * &latents;
        for v in view.iter_mut() {
            *v += spec.noise_sigma * rng.sample::<f64, _>(StandardNormal);
        }
        views.push(view);
    }

    Ok(PoseFamilyDataset {
        poses: spec.poses.clone(),
        views,
        subject_ids: (0..spec.n_subjects as u32).collect(),
        n_train_subjects: spec.n_subjects / 2,
    })
}

fn draw_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Column-major fill order is part of the determinism contract.
    let mut m = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    m
}

fn unit_row_map(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = draw_matrix(rng, rows, cols);
    normalize_rows(&mut m);
    m
}

fn normalize_rows(m: &mut DMatrix<f64>) {
    for r in 0..m.nrows() {
        let norm: f64 = (0..m.ncols()).map(|c| m[(r, c)] * m[(r, c)]).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in 0..m.ncols() {
                m[(r, c)] /= norm;
            }
        }
    }
}

/// Re-pairs the y-view columns with a seeded random permutation,
/// destroying the identity coupling. Used by the permutation-null checks.
pub fn permuted_pairing(data: &CoupledDataset, seed: u64) -> Result<CoupledDataset> {
    let n = data.n();
    let mut perm: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    // Fixed-point-free enough for the purpose; re-shuffle once if the
    // permutation kept too many pairs intact.
    let fixed = perm.iter().enumerate().filter(|(i, &p)| *i == p).count();
    if fixed > n / 10 {
        perm.shuffle(&mut rng);
    }
    let y = data.y_view().select_columns(perm.iter());
    CoupledDataset::new(
        data.x_view().clone(),
        y,
        data.subject_ids().to_vec(),
        data.pose_labels(),
    )
}
