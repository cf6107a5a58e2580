//! Coupled-data covariance structure and the paired-subspace solvers.

mod covariance;
mod dataset;
mod model_io;
mod solver;
mod unified;

pub use covariance::{compute_covariance_blocks, regularize, CovarianceBlocks};
pub use dataset::CoupledDataset;
pub use solver::{
    fit, pca_whiten, solve_cca, Method, ModelDiagnostics, PairedSubspaceModel, PcaProjection,
    SolverConfig,
};
pub use unified::{solve_unified, UnifiedEigenProblem};

use nalgebra::DMatrix;

/// Largest principal angle (radians) between the column spans of `a` and `b`.
///
/// Columns are orthonormalized first, so the inputs only need full column
/// rank, not orthonormality.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows(), "subspaces live in different spaces");
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    let overlap = qa.transpose() * qb;
    let svd = overlap.svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    sigma_min.clamp(-1.0, 1.0).acos()
}

fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let q = qr.q();
    q.columns(0, m.ncols().min(q.ncols())).into_owned()
}
