//! Feature-extraction tests: normalization fixed points and round trips,
//! Gabor bank frequency selectivity, holistic resize oracles, manifest IO.

use crossview_core::face::{
    build_gabor_bank, extract_holistic, extract_local_gabor, normalize_face, read_manifest,
    resize_area, write_manifest, Canvas, FaceSample, GaborParams, Landmark, LandmarkSet,
    ManifestRecord, Point, CANVAS_H, CANVAS_W, EYE_MID_ANCHOR, GABOR_ORIENTATIONS, GABOR_SCALES,
    HOLISTIC_FEATURE_LEN, LOCAL_FEATURE_LEN, MOUTH_ANCHOR,
};
use crossview_core::Error;
use image::GrayImage;

/// Landmarks already sitting on the canonical anchors: eye midpoint at
/// (102, 96), mouth center at (102, 176), axis-aligned.
fn canonical_landmarks() -> LandmarkSet {
    LandmarkSet::new(
        Point::new(EYE_MID_ANCHOR.0 - 30.0, EYE_MID_ANCHOR.1),
        Point::new(EYE_MID_ANCHOR.0 + 30.0, EYE_MID_ANCHOR.1),
        Point::new(102.0, 140.0),
        Point::new(MOUTH_ANCHOR.0 - 22.0, MOUTH_ANCHOR.1),
        Point::new(MOUTH_ANCHOR.0 + 22.0, MOUTH_ANCHOR.1),
    )
}

fn textured_image(w: u32, h: u32) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        let v = 0.5
            + 0.2 * ((x as f64) * 0.23).sin()
            + 0.2 * ((y as f64) * 0.31 + 1.0).cos()
            + 0.1 * ((x + y) as f64 * 0.11).sin();
        image::Luma([(v.clamp(0.0, 1.0) * 255.0).round() as u8])
    })
}

#[test]
fn normalization_is_identity_at_canonical_anchors() {
    let img = textured_image(CANVAS_W as u32, CANVAS_H as u32);
    let sample = FaceSample::new(img.clone(), canonical_landmarks(), 0, 0.0).unwrap();
    let normalized = normalize_face(&sample).unwrap();

    assert!((normalized.transform.scale() - 1.0).abs() < 1e-12);
    assert!(normalized.transform.rotation().abs() < 1e-12);

    let src = Canvas::from_gray_image(&img);
    assert!(
        normalized.canvas.mean_abs_diff(&src) < 1e-6,
        "identity normalization must reproduce the input"
    );

    // Mapped anchors land on the canonical coordinates.
    let em = normalized.mapped_landmarks.eye_midpoint();
    let mc = normalized.mapped_landmarks.mouth_center();
    assert!((em.x - EYE_MID_ANCHOR.0).abs() < 0.5 && (em.y - EYE_MID_ANCHOR.1).abs() < 0.5);
    assert!((mc.x - MOUTH_ANCHOR.0).abs() < 0.5 && (mc.y - MOUTH_ANCHOR.1).abs() < 0.5);
}

#[test]
fn normalization_undoes_rotation_and_scale() {
    // Render the same face pattern twice: once upright, once rotated 10
    // degrees and scaled 1.3x, with landmarks transformed the same way.
    let angle = 10f64.to_radians();
    let scale = 1.3;
    let (cx, cy) = (256.0, 256.0);
    let pattern = |x: f64, y: f64| -> f64 {
        0.5 + 0.25 * (x * 0.21).sin() + 0.25 * (y * 0.17).cos()
    };

    let upright = GrayImage::from_fn(512, 512, |x, y| {
        image::Luma([(pattern(x as f64, y as f64).clamp(0.0, 1.0) * 255.0).round() as u8])
    });
    // Rotated image: pixel (x, y) shows the pattern at the inverse-mapped
    // point, i.e. the image content is the upright pattern rotated+scaled.
    let inverse = |x: f64, y: f64| -> (f64, f64) {
        let (dx, dy) = (x - cx, y - cy);
        let c = angle.cos();
        let s = angle.sin();
        ((c * dx + s * dy) / scale + cx, (-s * dx + c * dy) / scale + cy)
    };
    let rotated = GrayImage::from_fn(512, 512, |x, y| {
        let (sx, sy) = inverse(x as f64, y as f64);
        image::Luma([(pattern(sx, sy).clamp(0.0, 1.0) * 255.0).round() as u8])
    });
    let forward = |p: Point| -> Point {
        let c = angle.cos();
        let s = angle.sin();
        let (dx, dy) = (p.x - cx, p.y - cy);
        Point::new(
            cx + scale * (c * dx - s * dy),
            cy + scale * (s * dx + c * dy),
        )
    };

    let upright_landmarks = LandmarkSet::new(
        Point::new(cx - 35.0, cy - 40.0),
        Point::new(cx + 35.0, cy - 40.0),
        Point::new(cx, cy + 5.0),
        Point::new(cx - 25.0, cy + 45.0),
        Point::new(cx + 25.0, cy + 45.0),
    );
    let rotated_landmarks = upright_landmarks.map(forward);

    let a = normalize_face(&FaceSample::new(upright, upright_landmarks, 0, 0.0).unwrap()).unwrap();
    let b = normalize_face(&FaceSample::new(rotated, rotated_landmarks, 0, 0.0).unwrap()).unwrap();

    let diff = a.canvas.mean_abs_diff(&b.canvas);
    assert!(
        diff <= 0.02,
        "rotated+scaled face differs from upright after normalization: {diff}"
    );
}

#[test]
fn normalization_rejects_degenerate_landmarks() {
    let img = textured_image(200, 200);
    // Mouth center placed exactly on the eye midpoint.
    let landmarks = LandmarkSet::new(
        Point::new(70.0, 100.0),
        Point::new(130.0, 100.0),
        Point::new(100.0, 100.0),
        Point::new(80.0, 100.0),
        Point::new(120.0, 100.0),
    );
    let sample = FaceSample::new(img, landmarks, 0, 0.0).unwrap();
    assert!(matches!(
        normalize_face(&sample),
        Err(Error::DegenerateLandmarks)
    ));
}

#[test]
fn out_of_bounds_landmarks_are_rejected_by_name() {
    let img = textured_image(100, 100);
    let landmarks = LandmarkSet::new(
        Point::new(30.0, 40.0),
        Point::new(70.0, 40.0),
        Point::new(50.0, 60.0),
        Point::new(35.0, 120.0), // below the image
        Point::new(65.0, 80.0),
    );
    match FaceSample::new(img, landmarks, 0, 0.0) {
        Err(Error::OutOfBoundsLandmark { name, .. }) => assert_eq!(name, "left_mouth"),
        other => panic!("expected OutOfBoundsLandmark, got {other:?}"),
    }
}

#[test]
fn normalization_is_idempotent_up_to_resampling() {
    let img = textured_image(300, 360);
    let landmarks = LandmarkSet::new(
        Point::new(110.0, 130.0),
        Point::new(190.0, 124.0),
        Point::new(152.0, 180.0),
        Point::new(120.0, 230.0),
        Point::new(180.0, 236.0),
    );
    let sample = FaceSample::new(img, landmarks, 0, 0.0).unwrap();
    let once = normalize_face(&sample).unwrap();

    let again = FaceSample::new(
        once.canvas.to_gray_image(),
        once.mapped_landmarks,
        0,
        0.0,
    )
    .unwrap();
    let twice = normalize_face(&again).unwrap();
    let diff = once.canvas.mean_abs_diff(&twice.canvas);
    assert!(diff <= 0.01, "second normalization pass moved pixels by {diff}");
}

#[test]
fn gabor_kernels_are_dc_free() {
    let bank = build_gabor_bank(&GaborParams::default()).unwrap();
    assert_eq!(bank.kernels().len(), 40);
    for kernel in bank.kernels() {
        let (dc, l1) = kernel.dc_and_l1();
        assert!(
            dc <= 1e-10 * l1,
            "kernel ({}, {}) has DC {dc} vs L1 {l1}",
            kernel.scale,
            kernel.orientation
        );
    }
}

#[test]
fn gabor_rejects_bad_params() {
    let mut p = GaborParams::default();
    p.sigma = 0.0;
    assert!(build_gabor_bank(&p).is_err());
    let mut p = GaborParams::default();
    p.freq_ratio = 1.0;
    assert!(build_gabor_bank(&p).is_err());
}

/// Complex plane wave at the wave vector of kernel (nu, mu), evaluated by
/// direct convolution: the matched kernel must respond strongest among all
/// 40. This is the frequency-selectivity oracle for the whole bank.
#[test]
fn each_kernel_peaks_on_its_own_plane_wave() {
    let params = GaborParams::default();
    let bank = build_gabor_bank(&params).unwrap();
    for nu in 0..GABOR_SCALES {
        for mu in 0..GABOR_ORIENTATIONS {
            let (kx, ky) = crossview_core::face::gabor_wave_vector(nu, mu, &params);
            // Direct complex response of each kernel to exp(i k.z):
            // sum_z psi(z) exp(i k.(-z)) evaluated over the kernel support
            // equals the response of the convolution at the origin of an
            // infinite plane wave.
            let mut best = (0, 0);
            let mut best_mag = f64::NEG_INFINITY;
            for (idx, kernel) in bank.kernels().iter().enumerate() {
                let r = kernel.radius();
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                for v in -r..=r {
                    for u in -r..=r {
                        let (tr, ti) = kernel.tap(u, v);
                        // Plane wave sampled at -z (convolution flips).
                        let phase = -(kx * u as f64 + ky * v as f64);
                        let (wr, wi) = (phase.cos(), phase.sin());
                        acc_re += tr * wr - ti * wi;
                        acc_im += tr * wi + ti * wr;
                    }
                }
                let mag = (acc_re * acc_re + acc_im * acc_im).sqrt();
                if mag > best_mag {
                    best_mag = mag;
                    best = (idx / GABOR_ORIENTATIONS, idx % GABOR_ORIENTATIONS);
                }
            }
            assert_eq!(
                best,
                (nu, mu),
                "kernel ({nu}, {mu}) was out-responded by {best:?}"
            );
        }
    }
}

#[test]
fn holistic_feature_is_constant_on_constant_canvas() {
    let face = synthetic_normalized_face(|_, _| 0.5);
    let feature = extract_holistic(&face);
    assert_eq!(feature.len(), HOLISTIC_FEATURE_LEN);
    assert_eq!(feature.len(), 2520);
    for v in feature.values.iter() {
        assert!((v - 0.5).abs() < 1e-12);
    }
}

/// Builds a NormalizedFace directly from a canvas function (bypassing the
/// warp) so feature extraction can be tested in isolation.
fn synthetic_normalized_face(f: impl Fn(usize, usize) -> f64) -> crossview_core::face::NormalizedFace {
    let canvas = Canvas::from_fn(CANVAS_W, CANVAS_H, |x, y| f(x, y));
    let landmarks = canonical_landmarks();
    crossview_core::face::NormalizedFace {
        canvas,
        mapped_landmarks: landmarks,
        transform: crossview_core::face::SimilarityTransform {
            a_re: 1.0,
            a_im: 0.0,
            b_re: 0.0,
            b_im: 0.0,
        },
    }
}

#[test]
fn area_resize_round_trips_at_integer_ratio() {
    // A 45x56 pattern, replicated 4x in both axes, then area-averaged
    // back: exact recovery at integer ratios.
    let small = Canvas::from_fn(45, 56, |x, y| ((x * 7 + y * 13) % 29) as f64 / 29.0);
    let big = Canvas::from_fn(180, 224, |x, y| small.get(x / 4, y / 4));
    let back = resize_area(&big, 45, 56);
    let mut max_err = 0.0f64;
    for y in 0..56 {
        for x in 0..45 {
            max_err = max_err.max((back.get(x, y) - small.get(x, y)).abs());
        }
    }
    assert!(max_err <= 1e-6, "integer-ratio round trip error {max_err}");
}

#[test]
fn area_resize_matches_overlap_integral_oracle() {
    // Fractional 204x256 -> 45x56 against a direct per-pixel overlap
    // integral (no separability, no incremental weights).
    let src = Canvas::from_fn(CANVAS_W, CANVAS_H, |x, y| {
        0.5 + 0.3 * ((x as f64) * 0.37).sin() * ((y as f64) * 0.23).cos()
    });
    let fast = resize_area(&src, 45, 56);
    let rx = CANVAS_W as f64 / 45.0;
    let ry = CANVAS_H as f64 / 56.0;
    for ty in 0..56 {
        for tx in 0..45 {
            let (x0, x1) = (tx as f64 * rx, (tx + 1) as f64 * rx);
            let (y0, y1) = (ty as f64 * ry, (ty + 1) as f64 * ry);
            let mut acc = 0.0;
            let mut area = 0.0;
            for sy in y0.floor() as usize..(y1.ceil() as usize).min(CANVAS_H) {
                for sx in x0.floor() as usize..(x1.ceil() as usize).min(CANVAS_W) {
                    let wx = (x1.min(sx as f64 + 1.0) - x0.max(sx as f64)).max(0.0);
                    let wy = (y1.min(sy as f64 + 1.0) - y0.max(sy as f64)).max(0.0);
                    acc += wx * wy * src.get(sx, sy);
                    area += wx * wy;
                }
            }
            let expected = acc / area;
            assert!(
                (fast.get(tx, ty) - expected).abs() < 1e-10,
                "separable resize disagrees with the 2-D overlap oracle at ({tx}, {ty})"
            );
        }
    }
}

#[test]
fn local_gabor_is_zero_on_constant_images() {
    let bank = build_gabor_bank(&GaborParams::default()).unwrap();
    let face = synthetic_normalized_face(|_, _| 0.7);
    for lm in Landmark::ALL {
        let feature = extract_local_gabor(&face, &bank, lm);
        assert_eq!(feature.len(), LOCAL_FEATURE_LEN);
        assert_eq!(feature.len(), 1960);
        assert!(!feature.clamped);
        let max = feature.values.iter().cloned().fold(0.0f64, f64::max);
        assert!(max <= 1e-10, "constant image produced response {max}");
    }
}

#[test]
fn local_gabor_peaks_at_the_matched_block() {
    let params = GaborParams::default();
    let bank = build_gabor_bank(&params).unwrap();
    let (nu, mu) = (2, 3);
    let (kx, ky) = crossview_core::face::gabor_wave_vector(nu, mu, &params);
    let (cx, cy) = (EYE_MID_ANCHOR.0, EYE_MID_ANCHOR.1);
    // Real cosine grating at the (2, 3) wave vector across the canvas.
    let face = synthetic_normalized_face(|x, y| {
        0.5 + 0.5 * (kx * (x as f64 - cx) + ky * (y as f64 - cy)).cos()
    });
    let feature = extract_local_gabor(&face, &bank, Landmark::LeftEye);
    assert!(feature.values.iter().all(|&v| v >= 0.0));

    let block_mean = |idx: usize| -> f64 {
        let start = idx * 49;
        (start..start + 49).map(|i| feature.values[i]).sum::<f64>() / 49.0
    };
    let matched = nu * GABOR_ORIENTATIONS + mu;
    let matched_mean = block_mean(matched);
    for idx in 0..40 {
        if idx != matched {
            assert!(
                block_mean(idx) < matched_mean,
                "block {idx} (mean {}) out-responded the matched block {matched} ({matched_mean})",
                block_mean(idx)
            );
        }
    }
}

#[test]
fn border_landmarks_are_flagged_as_clamped() {
    let bank = build_gabor_bank(&GaborParams::default()).unwrap();
    let face = synthetic_normalized_face(|x, y| ((x + y) % 7) as f64 / 7.0);
    let mut near_border = face.clone();
    near_border
        .mapped_landmarks
        .set(Landmark::NoseTip, Point::new(5.0, 5.0));
    let feature = extract_local_gabor(&near_border, &bank, Landmark::NoseTip);
    assert!(feature.clamped);
    let feature = extract_local_gabor(&face, &bank, Landmark::NoseTip);
    assert!(!feature.clamped);
}

#[test]
fn landmark_names_round_trip_and_reject_unknowns() {
    for lm in Landmark::ALL {
        assert_eq!(Landmark::from_name(lm.name()).unwrap(), lm);
    }
    assert!(matches!(
        Landmark::from_name("chin"),
        Err(Error::UnknownLandmark { .. })
    ));
}

#[test]
fn manifest_round_trips_and_validates_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.csv");
    let records = vec![
        ManifestRecord {
            image_path: "a/s0_p0.pgm".into(),
            subject_id: "s0".into(),
            pose_deg: 0.0,
            landmarks: canonical_landmarks(),
        },
        ManifestRecord {
            image_path: "a/s1_p30.pgm".into(),
            subject_id: "s1".into(),
            pose_deg: 30.0,
            landmarks: canonical_landmarks(),
        },
    ];
    write_manifest(&path, &records).unwrap();
    let loaded = read_manifest(&path).unwrap();
    assert_eq!(loaded, records);

    // Writing twice yields identical bytes.
    let path2 = dir.path().join("manifest2.csv");
    write_manifest(&path2, &records).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&path2).unwrap()
    );

    // A manifest missing a required column names it.
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "image_path,subject_id,pose_deg,lx_eye\n").unwrap();
    match read_manifest(&bad) {
        Err(Error::MissingColumn { column }) => assert_eq!(column, "ly_eye"),
        other => panic!("expected MissingColumn, got {other:?}"),
    }
}
