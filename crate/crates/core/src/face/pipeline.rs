//! One-call feature extraction: normalize a sample and pull the holistic
//! vector plus all five local Gabor vectors.

use crate::error::Result;
use crate::face::{
    extract_holistic, extract_local_gabor, normalize_face, FaceSample, GaborBank, Landmark,
    RegionFeatures,
};

/// Extracts the six region features (holistic + five landmarks) of a sample.
pub fn extract_region_features(sample: &FaceSample, bank: &GaborBank) -> Result<RegionFeatures> {
    let normalized = normalize_face(sample)?;
    let mut features = RegionFeatures::new();
    features.insert(extract_holistic(&normalized));
    for lm in Landmark::ALL {
        features.insert(extract_local_gabor(&normalized, bank, lm));
    }
    Ok(features)
}
