//! Paired-subspace solvers: regularized CCA, PLS and per-view PCA.
//!
//! The CCA route factors the regularized within-view covariances with
//! Cholesky and takes the SVD of the whitened cross-covariance
//! `L_x^-1 C_xy L_y^-T`. That is algebraically the same solution as the
//! nonsymmetric product eigenproblem but numerically symmetric. When there
//! are fewer samples than feature dimensions, [`fit`] switches to an
//! economy-SVD route that works in the span of the data and never forms a
//! d x d factorization; both routes produce the same model up to roundoff.

use crate::error::{Error, Result, View};
use crate::subspace::covariance::{center, compute_covariance_blocks, regularize};
use crate::subspace::{CoupledDataset, CovarianceBlocks};
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Relative singular-value cutoff used when trimming the numerical rank of
/// a centered data factor.
const RANK_TRIM_REL: f64 = 1e-12;

/// Which objective the solver maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Correlation between projections, normalized by within-view covariance.
    Cca,
    /// Cross-covariance between projections (no within-view normalization).
    Pls,
    /// Within-view variance of the x-view alone.
    Pca,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cca => "cca",
            Method::Pls => "pls",
            Method::Pca => "pca",
        }
    }

}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cca" => Ok(Method::Cca),
            "pls" => Ok(Method::Pls),
            "pca" => Ok(Method::Pca),
            other => Err(Error::InvalidParams {
                reason: format!("unknown method {other:?} (expected cca, pls or pca)"),
            }),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Diagonal shrinkage added to both within-view covariances.
    pub alpha: f64,
    /// Requested number of basis pairs; clamped to `min(d_x, d_y, n - 1)`.
    pub k: usize,
    /// Relative tolerance for tie detection between adjacent correlations.
    pub eigen_tolerance: f64,
}

impl SolverConfig {
    pub fn new(method: Method, alpha: f64, k: usize) -> Self {
        Self {
            method,
            alpha,
            k,
            eigen_tolerance: 1e-10,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(Method::Cca, 1e-6, 32)
    }
}

/// Side information about how a model was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDiagnostics {
    /// The `k` that was asked for before clamping.
    pub requested_k: usize,
    /// True when the request exceeded `min(d_x, d_y, n - 1)` or the
    /// available spectrum and was reduced.
    pub k_clamped: bool,
    /// Indices `i` with `rho[i] ~ rho[i+1]`; for tied values only the
    /// spanned subspace is well defined, not the individual columns.
    pub tied_rho: Vec<usize>,
}

/// A trained pair of projection bases with their correlation spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSubspaceModel {
    /// d_x x k basis for the x view.
    pub w_x: DMatrix<f64>,
    /// d_y x k basis for the y view (zero columns for PCA).
    pub w_y: DMatrix<f64>,
    /// Canonical correlations (CCA), singular values of `C_xy` (PLS) or
    /// eigenvalues of `C_xx` (PCA); descending.
    pub rho: DVector<f64>,
    pub x_mean: DVector<f64>,
    pub y_mean: DVector<f64>,
    pub method: Method,
    pub alpha: f64,
    pub diagnostics: ModelDiagnostics,
}

impl PairedSubspaceModel {
    /// Feature dimensions `(d_x, d_y)` the model expects.
    pub fn dims(&self) -> (usize, usize) {
        (self.w_x.nrows(), self.w_y.nrows())
    }

    /// Number of retained basis pairs.
    pub fn k(&self) -> usize {
        self.w_x.ncols()
    }

    /// Projects an x-view feature vector: `W_x^T (x - x_mean)`.
    pub fn project_x(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.w_x.nrows() {
            return Err(Error::DimensionMismatch {
                context: "x-view projection".into(),
                expected: self.w_x.nrows(),
                got: x.len(),
            });
        }
        Ok(self.w_x.transpose() * (x - &self.x_mean))
    }

    /// Projects a y-view feature vector: `W_y^T (y - y_mean)`.
    pub fn project_y(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.w_y.nrows() {
            return Err(Error::DimensionMismatch {
                context: "y-view projection".into(),
                expected: self.w_y.nrows(),
                got: y.len(),
            });
        }
        Ok(self.w_y.transpose() * (y - &self.y_mean))
    }
}

/// Solves regularized CCA from covariance blocks.
///
/// Whitens with the Cholesky factors of `C*_xx` and `C*_yy` and reads the
/// basis pairs off the SVD of the whitened cross-covariance. Bases are
/// normalized to unit variance (`w^T C* w = 1`), which makes the coupling
/// relations `C_xy w_y = rho C*_xx w_x` hold with unit scale factors.
pub fn solve_cca(blocks: &CovarianceBlocks, config: &SolverConfig) -> Result<PairedSubspaceModel> {
    if config.method != Method::Cca {
        return Err(Error::InvalidParams {
            reason: format!("solve_cca called with method {}", config.method),
        });
    }
    let reg = regularize(blocks, config.alpha)?;
    let (d_x, d_y) = reg.dims();

    let chol_x =
        Cholesky::new(reg.c_xx.clone()).ok_or(Error::SingularCovariance { view: View::X })?;
    let chol_y =
        Cholesky::new(reg.c_yy.clone()).ok_or(Error::SingularCovariance { view: View::Y })?;
    let l_x = chol_x.l();
    let l_y = chol_y.l();

    // M = L_x^-1 C_xy L_y^-T
    let half = l_x
        .solve_lower_triangular(&reg.c_xy)
        .ok_or(Error::SingularCovariance { view: View::X })?;
    let whitened = l_y
        .solve_lower_triangular(&half.transpose())
        .ok_or(Error::SingularCovariance { view: View::Y })?
        .transpose();

    let svd = whitened.svd(true, true);
    let u = svd.u.expect("svd(true, true) computes u");
    let v_t = svd.v_t.expect("svd(true, true) computes v_t");
    let sigma = svd.singular_values;

    let (k, clamped) = clamp_k(config.k, d_x.min(d_y).min(sigma.len()), blocks.n);

    let w_x = l_x
        .transpose()
        .solve_upper_triangular(&u.columns(0, k).into_owned())
        .ok_or(Error::SingularCovariance { view: View::X })?;
    let w_y = l_y
        .transpose()
        .solve_upper_triangular(&v_t.rows(0, k).transpose().into_owned())
        .ok_or(Error::SingularCovariance { view: View::Y })?;

    let rho = DVector::from_fn(k, |i, _| sigma[i]);
    Ok(assemble(
        w_x,
        w_y,
        rho,
        blocks.x_mean.clone(),
        blocks.y_mean.clone(),
        config,
        clamped,
    ))
}

/// Trains a model straight from a coupled dataset.
///
/// Dispatches on `config.method`. For CCA and PLS with fewer samples than
/// feature dimensions the solver stays in the span of the data (economy
/// SVD), which is exact and avoids d x d factorizations on image-sized
/// vectors.
pub fn fit(data: &CoupledDataset, config: &SolverConfig) -> Result<PairedSubspaceModel> {
    let n = data.n();
    if n < 2 {
        return Err(Error::EmptyDataset { n });
    }
    if let Some((view, column)) = data.find_non_finite() {
        return Err(Error::NonFiniteInput { view, column });
    }
    if config.alpha < 0.0 || !config.alpha.is_finite() {
        return Err(Error::NegativeAlpha {
            alpha: config.alpha,
        });
    }
    let (d_x, d_y) = data.dims();
    let dual = n < d_x.min(d_y);
    match config.method {
        Method::Cca => {
            if dual {
                fit_cca_dual(data, config)
            } else {
                solve_cca(&compute_covariance_blocks(data)?, config)
            }
        }
        Method::Pls => {
            if dual {
                fit_pls_dual(data, config)
            } else {
                fit_pls_primal(data, config)
            }
        }
        Method::Pca => fit_pca(data, config),
    }
}

/// CCA in the span of the data: economy SVDs of the centered view factors,
/// an r_x x r_y core matrix, and one small SVD. Identical solution to
/// [`solve_cca`] (symmetric-square-root whitening instead of Cholesky picks
/// the same eigenvector directions).
fn fit_cca_dual(data: &CoupledDataset, config: &SolverConfig) -> Result<PairedSubspaceModel> {
    if config.alpha == 0.0 {
        // n < d guarantees rank deficiency here.
        return Err(Error::SingularCovariance { view: View::X });
    }
    let n = data.n();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();

    let (xc, x_mean) = center(data.x_view());
    let (yc, y_mean) = center(data.y_view());
    let fx = ViewFactor::decompose(xc * inv_sqrt_n);
    let fy = ViewFactor::decompose(yc * inv_sqrt_n);

    // Core = Gx Sx (Qx^T Qy) Sy Gy with G = (S^2 + alpha I)^-1/2.
    let mut core = fx.q.transpose() * &fy.q;
    for i in 0..core.nrows() {
        let row_scale = fx.s[i] / (fx.s[i] * fx.s[i] + config.alpha).sqrt();
        for j in 0..core.ncols() {
            let col_scale = fy.s[j] / (fy.s[j] * fy.s[j] + config.alpha).sqrt();
            core[(i, j)] *= row_scale * col_scale;
        }
    }

    let svd = core.svd(true, true);
    let u = svd.u.expect("svd(true, true) computes u");
    let v_t = svd.v_t.expect("svd(true, true) computes v_t");
    let sigma = svd.singular_values;

    let (d_x, d_y) = data.dims();
    let (k, clamped) = clamp_k(config.k, d_x.min(d_y).min(sigma.len()), n);

    let w_x = fx.basis_times(&u.columns(0, k).into_owned(), config.alpha);
    let w_y = fy.basis_times(&v_t.rows(0, k).transpose().into_owned(), config.alpha);
    let rho = DVector::from_fn(k, |i, _| sigma[i]);
    Ok(assemble(w_x, w_y, rho, x_mean, y_mean, config, clamped))
}

/// Rank-trimmed economy SVD of a centered `data / sqrt(n)` factor.
struct ViewFactor {
    /// d x r left singular vectors.
    p: DMatrix<f64>,
    /// r singular values (descending, trimmed).
    s: Vec<f64>,
    /// n x r right singular vectors.
    q: DMatrix<f64>,
}

impl ViewFactor {
    fn decompose(scaled: DMatrix<f64>) -> Self {
        let svd = scaled.svd(true, true);
        let u = svd.u.expect("svd(true, true) computes u");
        let v_t = svd.v_t.expect("svd(true, true) computes v_t");
        let sv = svd.singular_values;
        let cutoff = sv.get(0).copied().unwrap_or(0.0) * RANK_TRIM_REL;
        let r = sv.iter().take_while(|&&s| s > cutoff).count();
        ViewFactor {
            p: u.columns(0, r).into_owned(),
            s: sv.iter().take(r).copied().collect(),
            q: v_t.rows(0, r).transpose().into_owned(),
        }
    }

    /// `P (S^2 + alpha I)^-1/2 m`, mapping span coefficients to a whitened
    /// basis in the ambient space.
    fn basis_times(&self, m: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
        let mut scaled = m.clone();
        for i in 0..scaled.nrows() {
            let g = 1.0 / (self.s[i] * self.s[i] + alpha).sqrt();
            for j in 0..scaled.ncols() {
                scaled[(i, j)] *= g;
            }
        }
        &self.p * scaled
    }
}

fn fit_pls_primal(data: &CoupledDataset, config: &SolverConfig) -> Result<PairedSubspaceModel> {
    let blocks = compute_covariance_blocks(data)?;
    let svd = blocks.c_xy.clone().svd(true, true);
    let u = svd.u.expect("svd(true, true) computes u");
    let v_t = svd.v_t.expect("svd(true, true) computes v_t");
    let sigma = svd.singular_values;

    let (d_x, d_y) = blocks.dims();
    let (k, clamped) = clamp_k(config.k, d_x.min(d_y).min(sigma.len()), blocks.n);
    let w_x = u.columns(0, k).into_owned();
    let w_y = v_t.rows(0, k).transpose().into_owned();
    let rho = DVector::from_fn(k, |i, _| sigma[i]);
    Ok(assemble(
        w_x,
        w_y,
        rho,
        blocks.x_mean,
        blocks.y_mean,
        config,
        clamped,
    ))
}

/// PLS in the span of the data: `C_xy = A B^T` with thin QR of the factors
/// and an SVD of the small core `R_a R_b^T`.
fn fit_pls_dual(data: &CoupledDataset, config: &SolverConfig) -> Result<PairedSubspaceModel> {
    let n = data.n();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let (xc, x_mean) = center(data.x_view());
    let (yc, y_mean) = center(data.y_view());

    let qr_a = (xc * inv_sqrt_n).qr();
    let qr_b = (yc * inv_sqrt_n).qr();
    let core = qr_a.r() * qr_b.r().transpose();

    let svd = core.svd(true, true);
    let u = svd.u.expect("svd(true, true) computes u");
    let v_t = svd.v_t.expect("svd(true, true) computes v_t");
    let sigma = svd.singular_values;

    let (d_x, d_y) = data.dims();
    let (k, clamped) = clamp_k(config.k, d_x.min(d_y).min(sigma.len()), n);
    let w_x = qr_a.q() * u.columns(0, k);
    let w_y = qr_b.q() * v_t.rows(0, k).transpose();
    let rho = DVector::from_fn(k, |i, _| sigma[i]);
    Ok(assemble(w_x, w_y, rho, x_mean, y_mean, config, clamped))
}

/// PCA of the x view via an economy SVD of the centered data; eigenvalues
/// of `C_xx` are the squared singular values. The y side is left empty.
fn fit_pca(data: &CoupledDataset, config: &SolverConfig) -> Result<PairedSubspaceModel> {
    let n = data.n();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let (xc, x_mean) = center(data.x_view());
    let y_mean = DVector::zeros(0);

    let svd = (xc * inv_sqrt_n).svd(true, false);
    let u = svd.u.expect("svd(true, _) computes u");
    let sigma = svd.singular_values;

    let d_x = data.dims().0;
    let (k, clamped) = clamp_k(config.k, d_x.min(sigma.len()), n);
    let mut w_x = u.columns(0, k).into_owned();
    // PCA is single-view: the y side of the model stays empty.
    let mut w_y = DMatrix::zeros(0, k);
    fix_signs_paired(&mut w_x, &mut w_y);

    let rho = DVector::from_fn(k, |i, _| sigma[i] * sigma[i]);
    let tied_rho = detect_ties(&rho, config.eigen_tolerance);
    Ok(PairedSubspaceModel {
        w_x,
        w_y,
        rho,
        x_mean,
        y_mean,
        method: Method::Pca,
        alpha: config.alpha,
        diagnostics: ModelDiagnostics {
            requested_k: config.k,
            k_clamped: clamped,
            tied_rho,
        },
    })
}

/// Per-view PCA dimensionality reduction of a coupled dataset.
///
/// Each view is independently centered and projected onto its top
/// `retained` principal axes. The returned [`PcaProjection`] maps later
/// inputs into the same reduced spaces.
pub fn pca_whiten(
    data: &CoupledDataset,
    retained: usize,
) -> Result<(CoupledDataset, PcaProjection)> {
    let n = data.n();
    if n < 2 {
        return Err(Error::EmptyDataset { n });
    }
    if let Some((view, column)) = data.find_non_finite() {
        return Err(Error::NonFiniteInput { view, column });
    }
    let (d_x, d_y) = data.dims();
    let limit = d_x.min(d_y).min(n - 1);
    if retained == 0 || retained > limit {
        return Err(Error::RetainedTooLarge { retained, limit });
    }

    let (xc, x_mean) = center(data.x_view());
    let (yc, y_mean) = center(data.y_view());
    let x_basis = principal_axes(&xc, retained);
    let y_basis = principal_axes(&yc, retained);

    let x_proj = x_basis.transpose() * &xc;
    let y_proj = y_basis.transpose() * &yc;
    let reduced = CoupledDataset::new(
        x_proj,
        y_proj,
        data.subject_ids().to_vec(),
        data.pose_labels(),
    )?;
    Ok((
        reduced,
        PcaProjection {
            x_mean,
            x_basis,
            y_mean,
            y_basis,
        },
    ))
}

fn principal_axes(centered: &DMatrix<f64>, retained: usize) -> DMatrix<f64> {
    let svd = centered.clone().svd(true, false);
    let u = svd.u.expect("svd(true, _) computes u");
    let mut basis = u.columns(0, retained).into_owned();
    let mut dummy = DMatrix::zeros(0, retained);
    fix_signs_paired(&mut basis, &mut dummy);
    basis
}

/// Centering and projection metadata produced by [`pca_whiten`].
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    pub x_mean: DVector<f64>,
    pub x_basis: DMatrix<f64>,
    pub y_mean: DVector<f64>,
    pub y_basis: DMatrix<f64>,
}

impl PcaProjection {
    pub fn apply_x(&self, v: &DVector<f64>) -> DVector<f64> {
        self.x_basis.transpose() * (v - &self.x_mean)
    }

    pub fn apply_y(&self, v: &DVector<f64>) -> DVector<f64> {
        self.y_basis.transpose() * (v - &self.y_mean)
    }

    pub fn reconstruct_x(&self, proj: &DVector<f64>) -> DVector<f64> {
        &self.x_mean + &self.x_basis * proj
    }

    pub fn reconstruct_y(&self, proj: &DVector<f64>) -> DVector<f64> {
        &self.y_mean + &self.y_basis * proj
    }
}

/// Caps `k` at `min(spectral limit, n - 1)` and reports whether it shrank.
fn clamp_k(requested: usize, spectral_limit: usize, n: usize) -> (usize, bool) {
    let cap = spectral_limit.min(n.saturating_sub(1));
    let k = requested.min(cap);
    (k, k < requested)
}

/// Flips basis columns so the largest-magnitude entry of each x column is
/// positive. The paired y column flips together with it: the coupling
/// relations tie the two signs, so flipping sides independently would turn
/// `rho` negative.
pub(crate) fn fix_signs_paired(w_x: &mut DMatrix<f64>, w_y: &mut DMatrix<f64>) {
    for j in 0..w_x.ncols() {
        let mut anchor = 0usize;
        let mut best = 0.0f64;
        for i in 0..w_x.nrows() {
            let a = w_x[(i, j)].abs();
            if a > best {
                best = a;
                anchor = i;
            }
        }
        if w_x.nrows() > 0 && w_x[(anchor, j)] < 0.0 {
            for i in 0..w_x.nrows() {
                w_x[(i, j)] = -w_x[(i, j)];
            }
            for i in 0..w_y.nrows() {
                w_y[(i, j)] = -w_y[(i, j)];
            }
        }
    }
}

pub(crate) fn detect_ties(rho: &DVector<f64>, tolerance: f64) -> Vec<usize> {
    let scale = rho.get(0).map(|v| v.abs()).unwrap_or(0.0).max(1.0);
    (0..rho.len().saturating_sub(1))
        .filter(|&i| (rho[i] - rho[i + 1]).abs() <= tolerance * scale)
        .collect()
}

fn assemble(
    mut w_x: DMatrix<f64>,
    mut w_y: DMatrix<f64>,
    rho: DVector<f64>,
    x_mean: DVector<f64>,
    y_mean: DVector<f64>,
    config: &SolverConfig,
    clamped: bool,
) -> PairedSubspaceModel {
    fix_signs_paired(&mut w_x, &mut w_y);
    let tied_rho = detect_ties(&rho, config.eigen_tolerance);
    PairedSubspaceModel {
        w_x,
        w_y,
        rho,
        x_mean,
        y_mean,
        method: config.method,
        alpha: config.alpha,
        diagnostics: ModelDiagnostics {
            requested_k: config.k,
            k_clamped: clamped,
            tied_rho,
        },
    }
}
