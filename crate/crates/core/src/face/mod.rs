//! Face image handling: canonical-frame normalization from five landmarks,
//! holistic intensity features and landmark-centered Gabor magnitude
//! features, plus the CSV manifest format for datasets on disk.

mod canvas;
mod features;
mod gabor;
mod holistic;
mod landmarks;
mod manifest;
mod normalize;
mod pipeline;

pub use canvas::Canvas;
pub use features::{FeatureLayout, FeatureVector, Region, RegionFeatures};
pub use gabor::{
    build_gabor_bank, extract_local_gabor, wave_vector as gabor_wave_vector, GaborBank,
    GaborKernel, GaborParams, GABOR_KERNELS, GABOR_ORIENTATIONS, GABOR_SCALES, LOCAL_FEATURE_LEN,
    LOCAL_GRID, LOCAL_STRIDE, LOCAL_WINDOW,
};
pub use holistic::{extract_holistic, resize_area, HOLISTIC_FEATURE_LEN, HOLISTIC_H, HOLISTIC_W};
pub use landmarks::{FaceSample, Landmark, LandmarkSet, Point};
pub use manifest::{
    load_face_samples, read_manifest, write_manifest, ManifestRecord, SubjectTable,
    MANIFEST_COLUMNS,
};
pub use normalize::{
    normalize_face, NormalizedFace, SimilarityTransform, CANVAS_H, CANVAS_W, EYE_MID_ANCHOR,
    MOUTH_ANCHOR,
};
pub use pipeline::extract_region_features;
