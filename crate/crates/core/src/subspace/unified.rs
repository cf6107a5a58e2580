//! The block generalized eigenproblem `B^-1 A w = rho w` that subsumes
//! PCA, PLS and CCA through the choice of `A` and `B`:
//!
//! | method | A                        | B                          |
//! |--------|--------------------------|----------------------------|
//! | PCA    | `C_xx`                   | `I`                        |
//! | PLS    | `[0 C_xy; C_yx 0]`       | `I`                        |
//! | CCA    | `[0 C_xy; C_yx 0]`       | `diag(C*_xx, C*_yy)`       |
//!
//! This is the cross-validation path: it solves the stacked symmetric
//! problem directly instead of whitening the cross-covariance, and must
//! agree with [`solve_cca`](crate::subspace::solve_cca) on the spectrum.

use crate::error::{Error, Result, View};
use crate::subspace::solver::{detect_ties, fix_signs_paired, ModelDiagnostics};
use crate::subspace::{regularize, CovarianceBlocks, Method, PairedSubspaceModel, SolverConfig};
use nalgebra::{Cholesky, DMatrix, DVector};

/// The assembled `A`, `B` pair together with the source block dimensions.
#[derive(Debug, Clone)]
pub struct UnifiedEigenProblem {
    pub a_matrix: DMatrix<f64>,
    pub b_matrix: DMatrix<f64>,
    pub method: Method,
    d_x: usize,
    d_y: usize,
}

/// One solved eigenpair of `B^-1 A w = rho w`.
#[derive(Debug, Clone)]
pub struct StackedEigenPair {
    pub rho: f64,
    pub w: DVector<f64>,
}

impl UnifiedEigenProblem {
    /// Builds `A` and `B` for the requested method. CCA applies the
    /// shrinkage `alpha` to the diagonal blocks of `B`.
    pub fn from_blocks(blocks: &CovarianceBlocks, config: &SolverConfig) -> Result<Self> {
        let (d_x, d_y) = blocks.dims();
        match config.method {
            Method::Pca => Ok(Self {
                a_matrix: blocks.c_xx.clone(),
                b_matrix: DMatrix::identity(d_x, d_x),
                method: Method::Pca,
                d_x,
                d_y,
            }),
            Method::Pls | Method::Cca => {
                let dim = d_x + d_y;
                let mut a = DMatrix::zeros(dim, dim);
                a.view_mut((0, d_x), (d_x, d_y)).copy_from(&blocks.c_xy);
                a.view_mut((d_x, 0), (d_y, d_x))
                    .copy_from(&blocks.c_xy.transpose());

                let b = if config.method == Method::Pls {
                    DMatrix::identity(dim, dim)
                } else {
                    let reg = regularize(blocks, config.alpha)?;
                    let mut b = DMatrix::zeros(dim, dim);
                    b.view_mut((0, 0), (d_x, d_x)).copy_from(&reg.c_xx);
                    b.view_mut((d_x, d_x), (d_y, d_y)).copy_from(&reg.c_yy);
                    b
                };
                Ok(Self {
                    a_matrix: a,
                    b_matrix: b,
                    method: config.method,
                    d_x,
                    d_y,
                })
            }
        }
    }

    /// Solves for all eigenpairs with `rho > 0` (plus zero modes for PCA),
    /// sorted by descending `rho`.
    ///
    /// `B` is factored with Cholesky, turning the problem into an ordinary
    /// symmetric eigenproblem for `L^-1 A L^-T`; eigenvectors are mapped
    /// back through `L^-T` so they satisfy `B^-1 A w = rho w` directly.
    pub fn solve(&self) -> Result<Vec<StackedEigenPair>> {
        let chol = Cholesky::new(self.b_matrix.clone())
            .ok_or(Error::SingularCovariance { view: View::X })?;
        let l = chol.l();
        let half = l
            .solve_lower_triangular(&self.a_matrix)
            .ok_or(Error::SingularCovariance { view: View::X })?;
        let sym = l
            .solve_lower_triangular(&half.transpose())
            .ok_or(Error::SingularCovariance { view: View::Y })?
            .transpose();
        // Symmetrize away the roundoff asymmetry before the eigensolve.
        let sym = (&sym + sym.transpose()) * 0.5;

        let eig = sym.symmetric_eigen();
        let l_t = l.transpose();

        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("finite eigenvalues")
                .then(a.cmp(&b))
        });

        let keep_zero = self.method == Method::Pca;
        let mut pairs = Vec::new();
        for idx in order {
            let rho = eig.eigenvalues[idx];
            if rho <= 0.0 && !keep_zero {
                continue;
            }
            let v = eig.eigenvectors.column(idx).into_owned();
            let w = l_t
                .solve_upper_triangular(&v)
                .ok_or(Error::SingularCovariance { view: View::X })?;
            pairs.push(StackedEigenPair { rho, w });
        }
        Ok(pairs)
    }

    /// Splits a stacked eigenvector into its x and y view parts.
    pub fn split(&self, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let wx = DVector::from_fn(self.d_x, |i, _| w[i]);
        let wy = DVector::from_fn(self.d_y, |i, _| w[self.d_x + i]);
        (wx, wy)
    }
}

/// Solves PCA, PLS or CCA through the stacked block eigenproblem.
///
/// For CCA this must match `solve_cca` (same spectrum, same bases up to
/// per-column sign); for PLS the pairs are the singular structure of
/// `C_xy`; for PCA the eigenvectors of `C_xx` with an empty y side.
pub fn solve_unified(
    blocks: &CovarianceBlocks,
    config: &SolverConfig,
) -> Result<PairedSubspaceModel> {
    let problem = UnifiedEigenProblem::from_blocks(blocks, config)?;
    let pairs = problem.solve()?;
    let (d_x, d_y) = blocks.dims();

    let n_cap = blocks.n.saturating_sub(1);
    let limit = match config.method {
        Method::Pca => d_x.min(n_cap).min(pairs.len()),
        _ => d_x.min(d_y).min(n_cap).min(pairs.len()),
    };
    let k = config.k.min(limit);
    let clamped = k < config.k;

    // PCA is single-view: the y side of the model stays empty.
    let w_y_rows = if config.method == Method::Pca { 0 } else { d_y };
    let mut w_x = DMatrix::zeros(d_x, k);
    let mut w_y = DMatrix::zeros(w_y_rows, k);
    let mut rho = DVector::zeros(k);

    let reg = regularize(blocks, config.alpha)?;
    for (j, pair) in pairs.iter().take(k).enumerate() {
        rho[j] = pair.rho.max(0.0);
        match config.method {
            Method::Pca => {
                let v = &pair.w;
                let norm = v.norm();
                w_x.column_mut(j).copy_from(&(v / norm));
            }
            Method::Pls => {
                let (vx, vy) = problem.split(&pair.w);
                w_x.column_mut(j).copy_from(&(&vx / vx.norm()));
                w_y.column_mut(j).copy_from(&(&vy / vy.norm()));
            }
            Method::Cca => {
                let (vx, vy) = problem.split(&pair.w);
                let sx = (vx.dot(&(&reg.c_xx * &vx))).sqrt();
                let sy = (vy.dot(&(&reg.c_yy * &vy))).sqrt();
                w_x.column_mut(j).copy_from(&(&vx / sx));
                w_y.column_mut(j).copy_from(&(&vy / sy));
            }
        }
    }
    fix_signs_paired(&mut w_x, &mut w_y);

    // The stacked solve fixes signs per eigenvector, not per view pair;
    // re-align each y column so the cross term comes out non-negative.
    if config.method != Method::Pca {
        for j in 0..k {
            let cross = (w_x.column(j).transpose() * &blocks.c_xy * w_y.column(j))[(0, 0)];
            if cross < 0.0 {
                for i in 0..w_y.nrows() {
                    w_y[(i, j)] = -w_y[(i, j)];
                }
            }
        }
    }

    let y_mean = if config.method == Method::Pca {
        DVector::zeros(0)
    } else {
        blocks.y_mean.clone()
    };
    let tied_rho = detect_ties(&rho, config.eigen_tolerance);
    Ok(PairedSubspaceModel {
        w_x,
        w_y,
        rho,
        x_mean: blocks.x_mean.clone(),
        y_mean,
        method: config.method,
        alpha: config.alpha,
        diagnostics: ModelDiagnostics {
            requested_k: config.k,
            k_clamped: clamped,
            tied_rho,
        },
    })
}
