//! Complex Gabor kernel bank (5 scales x 8 orientations) and the
//! landmark-window magnitude features.
//!
//! Kernels follow the usual face-recognition form
//!
//! ```text
//! psi(z) = (|k|^2 / sigma^2) exp(-|k|^2 |z|^2 / (2 sigma^2))
//!          * (exp(i k.z) - exp(-sigma^2 / 2))
//! k(nu, mu) = (k_max / f^nu) (cos(pi mu / 8), sin(pi mu / 8))
//! ```
//!
//! with `k_max = pi/2`, `f = sqrt(2)`, `sigma = 2 pi` and a 31x31 support.
//! The `exp(-sigma^2/2)` term cancels the DC response in the continuum;
//! the residual discrete mean left by truncating the support is subtracted
//! explicitly so every kernel is exactly zero-sum.

use crate::error::{Error, Result};
use crate::face::{FeatureLayout, FeatureVector, Landmark, NormalizedFace, Region};
use nalgebra::DVector;
use std::f64::consts::PI;

pub const GABOR_SCALES: usize = 5;
pub const GABOR_ORIENTATIONS: usize = 8;
pub const GABOR_KERNELS: usize = GABOR_SCALES * GABOR_ORIENTATIONS;

/// Side length of the sampling window (and of the kernel support).
pub const LOCAL_WINDOW: usize = 31;
/// Subsampling stride inside the window.
pub const LOCAL_STRIDE: usize = 5;
/// Samples per axis after striding: indices 0, 5, ..., 30.
pub const LOCAL_GRID: usize = 7;
/// 7 x 7 x 40.
pub const LOCAL_FEATURE_LEN: usize = LOCAL_GRID * LOCAL_GRID * GABOR_KERNELS;

/// Construction parameters of the bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    /// Peak spatial frequency (radians per pixel) at scale 0.
    pub k_max: f64,
    /// Frequency ratio between consecutive scales.
    pub freq_ratio: f64,
    /// Gaussian envelope parameter.
    pub sigma: f64,
    /// Support half-width; the kernel spans `(2r+1) x (2r+1)` taps.
    pub radius: usize,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self {
            k_max: PI / 2.0,
            freq_ratio: std::f64::consts::SQRT_2,
            sigma: 2.0 * PI,
            radius: (LOCAL_WINDOW - 1) / 2,
        }
    }
}

/// One complex kernel of the bank.
#[derive(Debug, Clone)]
pub struct GaborKernel {
    pub scale: usize,
    pub orientation: usize,
    radius: i64,
    size: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl GaborKernel {
    fn build(nu: usize, mu: usize, params: &GaborParams) -> Self {
        let radius = params.radius as i64;
        let size = 2 * params.radius + 1;
        let (kx, ky) = wave_vector(nu, mu, params);
        let k_sq = kx * kx + ky * ky;
        let sigma_sq = params.sigma * params.sigma;
        let dc_term = (-sigma_sq / 2.0).exp();

        let mut re = vec![0.0; size * size];
        let mut im = vec![0.0; size * size];
        for v in -radius..=radius {
            for u in -radius..=radius {
                let z_sq = (u * u + v * v) as f64;
                let envelope = (k_sq / sigma_sq) * (-k_sq * z_sq / (2.0 * sigma_sq)).exp();
                let phase = kx * u as f64 + ky * v as f64;
                let idx = ((v + radius) * size as i64 + (u + radius)) as usize;
                re[idx] = envelope * (phase.cos() - dc_term);
                im[idx] = envelope * phase.sin();
            }
        }

        // Remove the residual discrete mean left by support truncation.
        let n = (size * size) as f64;
        let mean_re = re.iter().sum::<f64>() / n;
        let mean_im = im.iter().sum::<f64>() / n;
        for r in re.iter_mut() {
            *r -= mean_re;
        }
        for i in im.iter_mut() {
            *i -= mean_im;
        }

        Self {
            scale: nu,
            orientation: mu,
            radius,
            size,
            re,
            im,
        }
    }

    /// Complex tap at offset `(u, v)` from the kernel center.
    pub fn tap(&self, u: i64, v: i64) -> (f64, f64) {
        let idx = ((v + self.radius) * self.size as i64 + (u + self.radius)) as usize;
        (self.re[idx], self.im[idx])
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// Sum of the complex taps (should be ~0) and the L1 norm.
    pub fn dc_and_l1(&self) -> (f64, f64) {
        let sum_re: f64 = self.re.iter().sum();
        let sum_im: f64 = self.im.iter().sum();
        let l1: f64 = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| (r * r + i * i).sqrt())
            .sum();
        ((sum_re * sum_re + sum_im * sum_im).sqrt(), l1)
    }

    /// Convolution response at `(cx, cy)` on a zero-padded raster.
    pub fn response_at(&self, canvas: &crate::face::Canvas, cx: i64, cy: i64) -> (f64, f64) {
        let mut acc_re = 0.0;
        let mut acc_im = 0.0;
        for v in -self.radius..=self.radius {
            for u in -self.radius..=self.radius {
                let pixel = canvas.get_or_zero(cx - u, cy - v);
                if pixel != 0.0 {
                    let (kr, ki) = self.tap(u, v);
                    acc_re += pixel * kr;
                    acc_im += pixel * ki;
                }
            }
        }
        (acc_re, acc_im)
    }
}

/// Wave vector of kernel `(nu, mu)`.
pub fn wave_vector(nu: usize, mu: usize, params: &GaborParams) -> (f64, f64) {
    let magnitude = params.k_max / params.freq_ratio.powi(nu as i32);
    let angle = PI * mu as f64 / GABOR_ORIENTATIONS as f64;
    (magnitude * angle.cos(), magnitude * angle.sin())
}

/// The full 40-kernel bank, scale-major order (`index = nu * 8 + mu`).
#[derive(Debug, Clone)]
pub struct GaborBank {
    pub params: GaborParams,
    kernels: Vec<GaborKernel>,
}

impl GaborBank {
    pub fn kernels(&self) -> &[GaborKernel] {
        &self.kernels
    }

    pub fn kernel(&self, nu: usize, mu: usize) -> &GaborKernel {
        &self.kernels[nu * GABOR_ORIENTATIONS + mu]
    }
}

/// Builds the 40-kernel bank.
pub fn build_gabor_bank(params: &GaborParams) -> Result<GaborBank> {
    if params.sigma <= 0.0 || !params.sigma.is_finite() {
        return Err(Error::InvalidParams {
            reason: format!("gabor sigma must be positive, got {}", params.sigma),
        });
    }
    if params.freq_ratio <= 1.0 || !params.freq_ratio.is_finite() {
        return Err(Error::InvalidParams {
            reason: format!("gabor frequency ratio must exceed 1, got {}", params.freq_ratio),
        });
    }
    if params.k_max <= 0.0 || params.radius == 0 {
        return Err(Error::InvalidParams {
            reason: "gabor k_max and radius must be positive".into(),
        });
    }
    let mut kernels = Vec::with_capacity(GABOR_KERNELS);
    for nu in 0..GABOR_SCALES {
        for mu in 0..GABOR_ORIENTATIONS {
            kernels.push(GaborKernel::build(nu, mu, params));
        }
    }
    Ok(GaborBank {
        params: *params,
        kernels,
    })
}

/// Extracts the 1960-dimensional local Gabor magnitude vector at a landmark.
///
/// The 31x31 window centered on the (rounded) landmark is convolved with
/// each kernel under zero padding; each response plane is sampled at
/// stride 5 (a 7x7 grid, row-major) and the complex magnitudes are
/// concatenated kernel-major. Windows that had to clip at the canvas
/// border are marked `clamped`.
pub fn extract_local_gabor(
    face: &NormalizedFace,
    bank: &GaborBank,
    landmark: Landmark,
) -> FeatureVector {
    let p = face.mapped_landmarks.get(landmark);
    let cx = p.x.round() as i64;
    let cy = p.y.round() as i64;
    let r = (LOCAL_WINDOW as i64 - 1) / 2;

    let clamped = cx - r < 0
        || cy - r < 0
        || cx + r >= face.canvas.width() as i64
        || cy + r >= face.canvas.height() as i64;

    // Copy the window once; everything below works in window coordinates.
    let mut window = [[0.0f64; LOCAL_WINDOW]; LOCAL_WINDOW];
    for (wy, row) in window.iter_mut().enumerate() {
        for (wx, cell) in row.iter_mut().enumerate() {
            *cell = face
                .canvas
                .get_or_zero(cx - r + wx as i64, cy - r + wy as i64);
        }
    }

    let mut values = DVector::zeros(LOCAL_FEATURE_LEN);
    let mut out = 0;
    for kernel in bank.kernels() {
        let kr = kernel.radius();
        for sy in (0..LOCAL_WINDOW).step_by(LOCAL_STRIDE) {
            for sx in (0..LOCAL_WINDOW).step_by(LOCAL_STRIDE) {
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                for v in -kr..=kr {
                    let wy = sy as i64 - v;
                    if wy < 0 || wy >= LOCAL_WINDOW as i64 {
                        continue;
                    }
                    for u in -kr..=kr {
                        let wx = sx as i64 - u;
                        if wx < 0 || wx >= LOCAL_WINDOW as i64 {
                            continue;
                        }
                        let pixel = window[wy as usize][wx as usize];
                        let (tr, ti) = kernel.tap(u, v);
                        acc_re += pixel * tr;
                        acc_im += pixel * ti;
                    }
                }
                values[out] = (acc_re * acc_re + acc_im * acc_im).sqrt();
                out += 1;
            }
        }
    }
    debug_assert_eq!(out, LOCAL_FEATURE_LEN);

    let mut feature = FeatureVector {
        values,
        layout: FeatureLayout::LocalGabor1960,
        origin: Region::Landmark(landmark),
        clamped: false,
    };
    feature.clamped = clamped;
    feature
}
