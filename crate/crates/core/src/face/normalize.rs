//! Landmark-based normalization into the 204x256 canonical frame.
//!
//! A similarity transform (rotation, isotropic scale, translation — no
//! shear) maps the eye midpoint and the mouth center onto fixed anchors.
//! The 80-pixel vertical gap between the anchors is the scale unit.

use crate::error::{Error, Result};
use crate::face::{Canvas, FaceSample, LandmarkSet, Point};

pub const CANVAS_W: usize = 204;
pub const CANVAS_H: usize = 256;

/// Canonical position of the eye midpoint in the 204x256 frame.
pub const EYE_MID_ANCHOR: (f64, f64) = (102.0, 96.0);
/// Canonical position of the mouth center in the 204x256 frame.
pub const MOUTH_ANCHOR: (f64, f64) = (102.0, 176.0);

/// `t = a * s + b` over complex coordinates: rotation+scale `a`,
/// translation `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
}

impl SimilarityTransform {
    /// The transform sending `s1 -> t1` and `s2 -> t2`. Fails when the two
    /// source points coincide.
    pub fn from_two_points(s1: Point, s2: Point, t1: Point, t2: Point) -> Result<Self> {
        let ds = (s2.x - s1.x, s2.y - s1.y);
        let dt = (t2.x - t1.x, t2.y - t1.y);
        let denom = ds.0 * ds.0 + ds.1 * ds.1;
        if denom < 1e-18 {
            return Err(Error::DegenerateLandmarks);
        }
        // a = dt / ds in complex arithmetic.
        let a_re = (dt.0 * ds.0 + dt.1 * ds.1) / denom;
        let a_im = (dt.1 * ds.0 - dt.0 * ds.1) / denom;
        let b_re = t1.x - (a_re * s1.x - a_im * s1.y);
        let b_im = t1.y - (a_re * s1.y + a_im * s1.x);
        Ok(Self {
            a_re,
            a_im,
            b_re,
            b_im,
        })
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.a_re * p.x - self.a_im * p.y + self.b_re,
            self.a_re * p.y + self.a_im * p.x + self.b_im,
        )
    }

    /// Inverse mapping (canvas -> source).
    pub fn apply_inverse(&self, p: Point) -> Point {
        let num = (p.x - self.b_re, p.y - self.b_im);
        let denom = self.a_re * self.a_re + self.a_im * self.a_im;
        Point::new(
            (num.0 * self.a_re + num.1 * self.a_im) / denom,
            (num.1 * self.a_re - num.0 * self.a_im) / denom,
        )
    }

    pub fn scale(&self) -> f64 {
        (self.a_re * self.a_re + self.a_im * self.a_im).sqrt()
    }

    pub fn rotation(&self) -> f64 {
        self.a_im.atan2(self.a_re)
    }
}

/// A face resampled into the canonical 204x256 frame.
#[derive(Debug, Clone)]
pub struct NormalizedFace {
    pub canvas: Canvas,
    pub mapped_landmarks: LandmarkSet,
    pub transform: SimilarityTransform,
}

/// Normalizes a face sample into the canonical frame.
///
/// The eye midpoint goes to [`EYE_MID_ANCHOR`], the mouth center to
/// [`MOUTH_ANCHOR`]; pixels are resampled with bilinear interpolation and
/// regions outside the source image fill with 0.
pub fn normalize_face(sample: &FaceSample) -> Result<NormalizedFace> {
    let eye_mid = sample.landmarks.eye_midpoint();
    let mouth = sample.landmarks.mouth_center();
    if eye_mid.distance(&mouth) < 1e-9 {
        return Err(Error::DegenerateLandmarks);
    }
    let transform = SimilarityTransform::from_two_points(
        eye_mid,
        mouth,
        Point::new(EYE_MID_ANCHOR.0, EYE_MID_ANCHOR.1),
        Point::new(MOUTH_ANCHOR.0, MOUTH_ANCHOR.1),
    )?;

    let src = Canvas::from_gray_image(&sample.image);
    let canvas = Canvas::from_fn(CANVAS_W, CANVAS_H, |x, y| {
        let s = transform.apply_inverse(Point::new(x as f64, y as f64));
        src.sample_bilinear(s.x, s.y)
    });

    let mapped_landmarks = sample.landmarks.map(|p| transform.apply(p));
    Ok(NormalizedFace {
        canvas,
        mapped_landmarks,
        transform,
    })
}
