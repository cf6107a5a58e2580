//! Holistic intensity feature: the canonical frame resized to 45x56 with
//! an area-average (box) filter and flattened row-major.

use crate::face::{Canvas, FeatureLayout, FeatureVector, NormalizedFace, Region};
use nalgebra::DVector;

pub const HOLISTIC_W: usize = 45;
pub const HOLISTIC_H: usize = 56;
pub const HOLISTIC_FEATURE_LEN: usize = HOLISTIC_W * HOLISTIC_H;

/// Exact area-average resize. Each target pixel is the mean of the source
/// rectangle it covers, with fractional edge pixels weighted by overlap.
/// Separable, so the two axes are handled by successive 1-D passes.
pub fn resize_area(src: &Canvas, target_w: usize, target_h: usize) -> Canvas {
    assert!(target_w > 0 && target_h > 0);
    let horizontal = box_weights(src.width(), target_w);
    let vertical = box_weights(src.height(), target_h);

    // Horizontal pass: src.height rows, target_w columns.
    let mut mid = vec![0.0f64; src.height() * target_w];
    for y in 0..src.height() {
        for (tx, span) in horizontal.iter().enumerate() {
            let mut acc = 0.0;
            for (offset, w) in span.weights.iter().enumerate() {
                acc += w * src.get(span.start + offset, y);
            }
            mid[y * target_w + tx] = acc;
        }
    }

    // Vertical pass.
    Canvas::from_fn(target_w, target_h, |x, ty| {
        let span = &vertical[ty];
        let mut acc = 0.0;
        for (offset, w) in span.weights.iter().enumerate() {
            acc += w * mid[(span.start + offset) * target_w + x];
        }
        acc
    })
}

struct BoxSpan {
    start: usize,
    weights: Vec<f64>,
}

/// Overlap weights of each target cell against the source cells, each
/// span normalized to sum 1 so constants are preserved exactly.
fn box_weights(src_len: usize, dst_len: usize) -> Vec<BoxSpan> {
    let ratio = src_len as f64 / dst_len as f64;
    (0..dst_len)
        .map(|t| {
            let lo = t as f64 * ratio;
            let hi = (t + 1) as f64 * ratio;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src_len) - 1;
            let mut weights = Vec::with_capacity(last - first + 1);
            for s in first..=last {
                let cell_lo = s as f64;
                let cell_hi = cell_lo + 1.0;
                let overlap = (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0);
                weights.push(overlap);
            }
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            BoxSpan {
                start: first,
                weights,
            }
        })
        .collect()
}

/// Extracts the 2520-dimensional holistic feature from a normalized face.
pub fn extract_holistic(face: &NormalizedFace) -> FeatureVector {
    let small = resize_area(&face.canvas, HOLISTIC_W, HOLISTIC_H);
    let mut values = DVector::zeros(HOLISTIC_FEATURE_LEN);
    for y in 0..HOLISTIC_H {
        for x in 0..HOLISTIC_W {
            values[y * HOLISTIC_W + x] = small.get(x, y);
        }
    }
    FeatureVector {
        values,
        layout: FeatureLayout::Holistic2520,
        origin: Region::Holistic,
        clamped: false,
    }
}
