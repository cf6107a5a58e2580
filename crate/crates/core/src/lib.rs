//! Cross-view correlation subspace learning.
//!
//! This crate learns paired linear subspaces from identity-coupled two-view
//! data. The core solver is regularized canonical correlation analysis, with
//! partial least squares and PCA exposed through the same block-eigen
//! framework. Around the solver sit the pieces needed to run cross-pose face
//! recognition end to end on verifiable synthetic data:
//!
//! - [`subspace`]: covariance blocks, shrinkage regularization, the CCA /
//!   PLS / PCA solvers and the unified block-eigen cross-check path, plus a
//!   byte-stable model container.
//! - [`face`]: landmark-based face normalization into a 204x256 canonical
//!   frame, holistic intensity features (45x56) and local Gabor magnitude
//!   features (5 scales x 8 orientations, 31x31 windows sampled to 7x7).
//! - [`recognition`]: projection, correlation scoring, mean-rule fusion of
//!   per-region classifiers and nearest-neighbor identification.
//! - [`synth`]: seeded generators for coupled latent-variable datasets,
//!   smooth pose families and rendered cartoon-face rasters with landmarks.
//! - [`eval`]: the experimental protocols (all-poses matrices, unknown
//!   probe pose confusion matrices, correlation histograms) with
//!   machine-readable reports.

pub mod error;
pub mod eval;
pub mod face;
pub mod recognition;
pub mod subspace;
pub mod synth;

pub use error::{Error, Result};
