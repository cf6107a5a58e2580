//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which of the two coupled views an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    X,
    Y,
}

impl std::fmt::Display for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            View::X => write!(f, "x"),
            View::Y => write!(f, "y"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset has {n} sample pair(s); at least 2 are required")]
    EmptyDataset { n: usize },

    #[error("non-finite value in {view}-view column {column}")]
    NonFiniteInput { view: View, column: usize },

    #[error("coupled views disagree: {reason}")]
    CouplingMismatch { reason: String },

    #[error("regularization alpha must be non-negative, got {alpha}")]
    NegativeAlpha { alpha: f64 },

    #[error("{view}-view covariance is singular; raise alpha above 0 to regularize")]
    SingularCovariance { view: View },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("retained={retained} exceeds the PCA limit min(d, n-1)={limit}")]
    RetainedTooLarge { retained: usize, limit: usize },

    #[error("degenerate landmarks: mouth center coincides with the eye midpoint")]
    DegenerateLandmarks,

    #[error("landmark {name} at ({x}, {y}) lies outside the {width}x{height} image")]
    OutOfBoundsLandmark {
        name: String,
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },

    #[error("unknown landmark name {name:?}")]
    UnknownLandmark { name: String },

    #[error("invalid parameter: {reason}")]
    InvalidParams { reason: String },

    #[error("invalid generator spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("cannot fuse an empty score list")]
    EmptyScores,

    #[error("gallery is empty")]
    EmptyGallery,

    #[error("region mismatch: {reason}")]
    RegionMismatch { reason: String },

    #[error("insufficient subjects: {reason}")]
    InsufficientSubjects { reason: String },

    #[error("manifest is missing required column {column:?}")]
    MissingColumn { column: String },

    #[error("manifest row {row}: {reason}")]
    BadManifestRow { row: usize, reason: String },

    #[error("not a valid model file: {reason}")]
    InvalidModelFile { reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: String,
        #[source]
        source: image::ImageError,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
