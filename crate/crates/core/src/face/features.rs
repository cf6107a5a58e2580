//! Feature vectors and the per-region feature bundles consumed by the
//! matcher.

use crate::error::{Error, Result};
use crate::face::Landmark;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Layout tag of a feature vector. The two image layouts have fixed
/// lengths (45x56 = 2520 and 7x7x40 = 1960); `Raw` covers synthetic
/// vectors of arbitrary dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureLayout {
    Holistic2520,
    LocalGabor1960,
    Raw(usize),
}

impl FeatureLayout {
    pub fn len(&self) -> usize {
        match self {
            FeatureLayout::Holistic2520 => 2520,
            FeatureLayout::LocalGabor1960 => 1960,
            FeatureLayout::Raw(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A face region a classifier can be attached to: the whole face or a
/// window centered on one landmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Holistic,
    Landmark(Landmark),
}

impl Region {
    /// The canonical six regions: holistic plus the five landmarks.
    pub const ALL: [Region; 6] = [
        Region::Holistic,
        Region::Landmark(Landmark::LeftEye),
        Region::Landmark(Landmark::RightEye),
        Region::Landmark(Landmark::NoseTip),
        Region::Landmark(Landmark::LeftMouthCorner),
        Region::Landmark(Landmark::RightMouthCorner),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Region::Holistic => "holistic",
            Region::Landmark(lm) => lm.name(),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        if name == "holistic" {
            Ok(Region::Holistic)
        } else {
            Ok(Region::Landmark(Landmark::from_name(name)?))
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A flat real feature vector with its layout tag and origin region.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: DVector<f64>,
    pub layout: FeatureLayout,
    pub origin: Region,
    /// Set when a landmark window had to be clipped at the canvas border;
    /// the matcher drops clamped regions from fusion.
    pub clamped: bool,
}

impl FeatureVector {
    pub fn new(values: DVector<f64>, layout: FeatureLayout, origin: Region) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                context: format!("feature vector for {origin}"),
                expected: layout.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            layout,
            origin,
            clamped: false,
        })
    }

    pub fn raw(values: DVector<f64>, origin: Region) -> Self {
        let layout = FeatureLayout::Raw(values.len());
        Self {
            values,
            layout,
            origin,
            clamped: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }
}

/// Features of one face, keyed by region.
#[derive(Debug, Clone, Default)]
pub struct RegionFeatures {
    map: BTreeMap<Region, FeatureVector>,
}

impl RegionFeatures {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, feature: FeatureVector) {
        self.map.insert(feature.origin, feature);
    }

    pub fn get(&self, region: Region) -> Option<&FeatureVector> {
        self.map.get(&region)
    }

    pub fn regions(&self) -> impl Iterator<Item = Region> + '_ {
        self.map.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Convenience constructor for a single raw-vector region.
    pub fn single_raw(region: Region, values: DVector<f64>) -> Self {
        let mut rf = Self::new();
        rf.insert(FeatureVector::raw(values, region));
        rf
    }
}
