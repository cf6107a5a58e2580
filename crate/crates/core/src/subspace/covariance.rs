//! Block covariance structure of a coupled dataset.

use crate::error::{Error, Result};
use crate::subspace::CoupledDataset;
use nalgebra::{DMatrix, DVector};

/// Centered block covariance of a coupled dataset.
///
/// Stores the within-view blocks `C_xx`, `C_yy`, the cross-view block
/// `C_xy` (its transpose `C_yx` is implicit), the view means that were
/// subtracted, and the sample count. All blocks use divisor `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBlocks {
    pub c_xx: DMatrix<f64>,
    pub c_yy: DMatrix<f64>,
    pub c_xy: DMatrix<f64>,
    pub x_mean: DVector<f64>,
    pub y_mean: DVector<f64>,
    pub n: usize,
}

impl CovarianceBlocks {
    /// Feature dimensions `(d_x, d_y)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.c_xx.nrows(), self.c_yy.nrows())
    }

    /// `C_yx = C_xy^T`, materialized.
    pub fn c_yx(&self) -> DMatrix<f64> {
        self.c_xy.transpose()
    }

    /// Shrinkage-regularized copy: `C*_xx = C_xx + alpha I`,
    /// `C*_yy = C_yy + alpha I`; the cross block is untouched.
    pub fn regularized(&self, alpha: f64) -> Result<CovarianceBlocks> {
        regularize(self, alpha)
    }
}

/// Computes the block covariance of a coupled dataset.
///
/// Means are the arithmetic column means of each view; blocks come from the
/// mean-centered columns with divisor `n`. The within-view blocks are
/// symmetrized explicitly so downstream Cholesky factorizations never see
/// rounding asymmetry.
pub fn compute_covariance_blocks(data: &CoupledDataset) -> Result<CovarianceBlocks> {
    let n = data.n();
    if n < 2 {
        return Err(Error::EmptyDataset { n });
    }
    if let Some((view, column)) = data.find_non_finite() {
        return Err(Error::NonFiniteInput { view, column });
    }

    let (xc, x_mean) = center(data.x_view());
    let (yc, y_mean) = center(data.y_view());

    let inv_n = 1.0 / n as f64;
    let c_xx = symmetrize(&xc * xc.transpose() * inv_n);
    let c_yy = symmetrize(&yc * yc.transpose() * inv_n);
    let c_xy = &xc * yc.transpose() * inv_n;

    Ok(CovarianceBlocks {
        c_xx,
        c_yy,
        c_xy,
        x_mean,
        y_mean,
        n,
    })
}

/// Diagonal shrinkage (`C* = C + alpha I`) on both within-view blocks.
pub fn regularize(blocks: &CovarianceBlocks, alpha: f64) -> Result<CovarianceBlocks> {
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::NegativeAlpha { alpha });
    }
    if alpha == 0.0 {
        return Ok(blocks.clone());
    }
    let mut out = blocks.clone();
    for i in 0..out.c_xx.nrows() {
        out.c_xx[(i, i)] += alpha;
    }
    for i in 0..out.c_yy.nrows() {
        out.c_yy[(i, i)] += alpha;
    }
    Ok(out)
}

/// Centers the columns of `m`, returning the centered matrix and the mean.
pub(crate) fn center(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = m.ncols();
    let mut mean = DVector::zeros(m.nrows());
    for col in m.column_iter() {
        mean += col;
    }
    mean /= n as f64;
    let mut centered = m.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    (centered, mean)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let mt = m.transpose();
    (m + mt) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{Error, View};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn dataset(x: DMatrix<f64>, y: DMatrix<f64>) -> CoupledDataset {
        let n = x.ncols();
        CoupledDataset::new(x, y, (0..n as u32).collect(), (0.0, 30.0)).unwrap()
    }

    #[test]
    fn symmetric_two_point_case() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let data = dataset(x.clone(), x);
        let blocks = compute_covariance_blocks(&data).unwrap();
        assert_relative_eq!(blocks.c_xx[(0, 0)], 1.0);
        assert_relative_eq!(blocks.c_yy[(0, 0)], 1.0);
        assert_relative_eq!(blocks.c_xy[(0, 0)], 1.0);
        assert_relative_eq!(blocks.x_mean[0], 0.0);
        assert_relative_eq!(blocks.y_mean[0], 0.0);
        assert_eq!(blocks.n, 2);
    }

    #[test]
    fn identical_columns_have_zero_variance() {
        let col = [2.0, -3.0, 0.5];
        let x = DMatrix::from_fn(3, 4, |r, _| col[r]);
        let y = DMatrix::from_fn(2, 4, |r, c| (r + c) as f64);
        let data = dataset(x, y);
        let blocks = compute_covariance_blocks(&data).unwrap();
        assert!(blocks.c_xx.iter().all(|&v| v == 0.0));
        for (i, &v) in col.iter().enumerate() {
            assert_relative_eq!(blocks.x_mean[i], v);
        }
    }

    #[test]
    fn matches_elementwise_double_loop_oracle() {
        // Deterministic pseudo-random 5x20 / 4x20 views.
        let x = DMatrix::from_fn(5, 20, |r, c| ((r * 31 + c * 17) as f64 * 0.37).sin());
        let y = DMatrix::from_fn(4, 20, |r, c| ((r * 13 + c * 7) as f64 * 0.53).cos());
        let data = dataset(x.clone(), y.clone());
        let blocks = compute_covariance_blocks(&data).unwrap();

        let n = 20usize;
        let mean = |m: &DMatrix<f64>, r: usize| -> f64 {
            (0..n).map(|c| m[(r, c)]).sum::<f64>() / n as f64
        };
        for i in 0..5 {
            for j in 0..4 {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += (x[(i, c)] - mean(&x, i)) * (y[(j, c)] - mean(&y, j));
                }
                assert_relative_eq!(blocks.c_xy[(i, j)], acc / n as f64, epsilon = 1e-12);
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += (x[(i, c)] - mean(&x, i)) * (x[(j, c)] - mean(&x, j));
                }
                assert_relative_eq!(blocks.c_xx[(i, j)], acc / n as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_single_sample() {
        let x = DMatrix::from_row_slice(1, 1, &[1.0]);
        let data = dataset(x.clone(), x);
        assert!(matches!(
            compute_covariance_blocks(&data),
            Err(Error::EmptyDataset { n: 1 })
        ));
    }

    #[test]
    fn names_the_non_finite_column() {
        let mut y = DMatrix::from_element(2, 3, 1.0);
        y[(1, 2)] = f64::NAN;
        let x = DMatrix::from_fn(2, 3, |r, c| (r + c) as f64);
        let data = dataset(x, y);
        match compute_covariance_blocks(&data) {
            Err(Error::NonFiniteInput { view, column }) => {
                assert_eq!(view, View::Y);
                assert_eq!(column, 2);
            }
            other => panic!("expected NonFiniteInput, got {other:?}"),
        }
    }

    #[test]
    fn regularize_zero_alpha_is_identity() {
        let x = DMatrix::from_fn(3, 5, |r, c| (r as f64 - c as f64) * 0.3);
        let data = dataset(x.clone(), x);
        let blocks = compute_covariance_blocks(&data).unwrap();
        let reg = regularize(&blocks, 0.0).unwrap();
        assert_eq!(reg, blocks);
    }

    #[test]
    fn regularize_adds_to_the_diagonal() {
        let blocks = CovarianceBlocks {
            c_xx: DMatrix::zeros(2, 2),
            c_yy: DMatrix::from_row_slice(1, 1, &[1.0]),
            c_xy: DMatrix::zeros(2, 1),
            x_mean: nalgebra::DVector::zeros(2),
            y_mean: nalgebra::DVector::zeros(1),
            n: 2,
        };
        let reg = regularize(&blocks, 1e-6).unwrap();
        assert_relative_eq!(reg.c_xx[(0, 0)], 1e-6);
        assert_relative_eq!(reg.c_xx[(1, 1)], 1e-6);
        assert_relative_eq!(reg.c_xx[(0, 1)], 0.0);

        let reg = regularize(&blocks, 0.5).unwrap();
        assert_relative_eq!(reg.c_yy[(0, 0)], 1.5);
        // Cross block never changes.
        assert!(reg.c_xy.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn regularize_rejects_negative_alpha() {
        let x = DMatrix::from_fn(2, 3, |r, c| (r * c) as f64);
        let data = dataset(x.clone(), x);
        let blocks = compute_covariance_blocks(&data).unwrap();
        assert!(matches!(
            regularize(&blocks, -0.1),
            Err(Error::NegativeAlpha { .. })
        ));
    }
}
