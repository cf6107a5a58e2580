//! Identity-coupled two-view datasets.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Identity-paired feature matrices for two views.
///
/// Column `i` of the x-view and column `i` of the y-view are two observations
/// of the same subject (`subject_ids[i]`), e.g. the same face seen under two
/// poses. Feature vectors are stored one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledDataset {
    x_view: DMatrix<f64>,
    y_view: DMatrix<f64>,
    subject_ids: Vec<u32>,
    pose_labels: (f64, f64),
}

impl CoupledDataset {
    /// Builds a coupled dataset, checking that both views have the same
    /// number of columns and that every column carries a subject id.
    ///
    /// `pose_labels` are the yaw tags (degrees) of the x-view and y-view.
    pub fn new(
        x_view: DMatrix<f64>,
        y_view: DMatrix<f64>,
        subject_ids: Vec<u32>,
        pose_labels: (f64, f64),
    ) -> Result<Self> {
        if x_view.ncols() != y_view.ncols() {
            return Err(Error::CouplingMismatch {
                reason: format!(
                    "x-view has {} columns, y-view has {}",
                    x_view.ncols(),
                    y_view.ncols()
                ),
            });
        }
        if subject_ids.len() != x_view.ncols() {
            return Err(Error::CouplingMismatch {
                reason: format!(
                    "{} subject ids for {} sample pairs",
                    subject_ids.len(),
                    x_view.ncols()
                ),
            });
        }
        Ok(Self {
            x_view,
            y_view,
            subject_ids,
            pose_labels,
        })
    }

    pub fn x_view(&self) -> &DMatrix<f64> {
        &self.x_view
    }

    pub fn y_view(&self) -> &DMatrix<f64> {
        &self.y_view
    }

    pub fn subject_ids(&self) -> &[u32] {
        &self.subject_ids
    }

    pub fn pose_labels(&self) -> (f64, f64) {
        self.pose_labels
    }

    /// Number of coupled sample pairs.
    pub fn n(&self) -> usize {
        self.x_view.ncols()
    }

    /// Feature dimensions `(d_x, d_y)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.x_view.nrows(), self.y_view.nrows())
    }

    /// Returns the column index of the first non-finite entry, if any.
    pub fn find_non_finite(&self) -> Option<(crate::error::View, usize)> {
        for (view, m) in [
            (crate::error::View::X, &self.x_view),
            (crate::error::View::Y, &self.y_view),
        ] {
            for col in 0..m.ncols() {
                if m.column(col).iter().any(|v| !v.is_finite()) {
                    return Some((view, col));
                }
            }
        }
        None
    }

    /// New dataset keeping only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let x = self.x_view.select_columns(cols.iter());
        let y = self.y_view.select_columns(cols.iter());
        let ids = cols.iter().map(|&c| self.subject_ids[c]).collect();
        Self {
            x_view: x,
            y_view: y,
            subject_ids: ids,
            pose_labels: self.pose_labels,
        }
    }
}
