//! The five facial landmarks and landmark-annotated source images.

use crate::error::{Error, Result};
use image::GrayImage;
use serde::{Deserialize, Serialize};

/// A point in pixel coordinates, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// The five named landmarks used throughout the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Landmark {
    LeftEye,
    RightEye,
    NoseTip,
    LeftMouthCorner,
    RightMouthCorner,
}

impl Landmark {
    pub const ALL: [Landmark; 5] = [
        Landmark::LeftEye,
        Landmark::RightEye,
        Landmark::NoseTip,
        Landmark::LeftMouthCorner,
        Landmark::RightMouthCorner,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Landmark::LeftEye => "left_eye",
            Landmark::RightEye => "right_eye",
            Landmark::NoseTip => "nose_tip",
            Landmark::LeftMouthCorner => "left_mouth",
            Landmark::RightMouthCorner => "right_mouth",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "left_eye" => Ok(Landmark::LeftEye),
            "right_eye" => Ok(Landmark::RightEye),
            "nose_tip" => Ok(Landmark::NoseTip),
            "left_mouth" => Ok(Landmark::LeftMouthCorner),
            "right_mouth" => Ok(Landmark::RightMouthCorner),
            other => Err(Error::UnknownLandmark { name: other.into() }),
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

impl std::fmt::Display for Landmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Positions of all five landmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    points: [Point; 5],
}

impl LandmarkSet {
    pub fn new(
        left_eye: Point,
        right_eye: Point,
        nose_tip: Point,
        left_mouth: Point,
        right_mouth: Point,
    ) -> Self {
        Self {
            points: [left_eye, right_eye, nose_tip, left_mouth, right_mouth],
        }
    }

    pub fn get(&self, lm: Landmark) -> Point {
        self.points[lm.index()]
    }

    pub fn set(&mut self, lm: Landmark, p: Point) {
        self.points[lm.index()] = p;
    }

    /// Midpoint of the two eye centers.
    pub fn eye_midpoint(&self) -> Point {
        let l = self.get(Landmark::LeftEye);
        let r = self.get(Landmark::RightEye);
        Point::new((l.x + r.x) / 2.0, (l.y + r.y) / 2.0)
    }

    /// Midpoint of the two mouth corners.
    pub fn mouth_center(&self) -> Point {
        let l = self.get(Landmark::LeftMouthCorner);
        let r = self.get(Landmark::RightMouthCorner);
        Point::new((l.x + r.x) / 2.0, (l.y + r.y) / 2.0)
    }

    /// Applies a point mapping to every landmark.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Self {
        let mut out = *self;
        for lm in Landmark::ALL {
            out.set(lm, f(self.get(lm)));
        }
        out
    }
}

/// A source image with its five landmarks, subject label and pose tag.
#[derive(Debug, Clone)]
pub struct FaceSample {
    pub image: GrayImage,
    pub landmarks: LandmarkSet,
    pub subject_id: u32,
    pub pose_deg: f64,
}

impl FaceSample {
    /// Builds a sample, checking that every landmark is inside the image
    /// and that the eye centers are distinct.
    pub fn new(
        image: GrayImage,
        landmarks: LandmarkSet,
        subject_id: u32,
        pose_deg: f64,
    ) -> Result<Self> {
        let (w, h) = image.dimensions();
        for lm in Landmark::ALL {
            let p = landmarks.get(lm);
            if !p.x.is_finite() || !p.y.is_finite() || p.x < 0.0 || p.y < 0.0
                || p.x > (w as f64 - 1.0)
                || p.y > (h as f64 - 1.0)
            {
                return Err(Error::OutOfBoundsLandmark {
                    name: lm.name().into(),
                    x: p.x,
                    y: p.y,
                    width: w,
                    height: h,
                });
            }
        }
        let le = landmarks.get(Landmark::LeftEye);
        let re = landmarks.get(Landmark::RightEye);
        if le.distance(&re) < 1e-9 {
            return Err(Error::InvalidParams {
                reason: "eye centers coincide".into(),
            });
        }
        Ok(Self {
            image,
            landmarks,
            subject_id,
            pose_deg,
        })
    }
}
