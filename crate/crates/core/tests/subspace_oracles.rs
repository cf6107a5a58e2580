//! Solver oracle tests: the CCA implementation (Cholesky whitening) is
//! checked against an independent symmetric-inverse-square-root route, the
//! stacked block eigenproblem, and brute-force residual identities.

use crossview_core::subspace::{
    compute_covariance_blocks, fit, max_principal_angle, pca_whiten, regularize, solve_cca,
    solve_unified, CoupledDataset, CovarianceBlocks, Method, PairedSubspaceModel, SolverConfig,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_dataset(rng: &mut ChaCha8Rng, d_x: usize, d_y: usize, n: usize) -> CoupledDataset {
    // Correlated views: shared latent factors plus independent noise.
    let q = d_x.min(d_y).max(2) / 2 + 1;
    let a_x = gaussian_matrix(rng, d_x, q);
    let a_y = gaussian_matrix(rng, d_y, q);
    let z = gaussian_matrix(rng, q, n);
    let x = &a_x * &z + gaussian_matrix(rng, d_x, n) * 0.5;
    let y = &a_y * &z + gaussian_matrix(rng, d_y, n) * 0.5;
    CoupledDataset::new(x, y, (0..n as u32).collect(), (0.0, 30.0)).unwrap()
}

/// Independent oracle: whiten with the symmetric inverse square root from
/// an eigendecomposition, then SVD. Shares no code with the solver path.
fn oracle_cca(
    blocks: &CovarianceBlocks,
    alpha: f64,
    k: usize,
) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let reg = regularize(blocks, alpha).unwrap();
    let isx = inv_sqrt_sym(&reg.c_xx);
    let isy = inv_sqrt_sym(&reg.c_yy);
    let whitened = &isx * &reg.c_xy * &isy;
    let svd = whitened.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let k = k.min(svd.singular_values.len());
    let rho = DVector::from_fn(k, |i, _| svd.singular_values[i]);
    let w_x = &isx * u.columns(0, k);
    let w_y = &isy * v_t.rows(0, k).transpose();
    (rho, w_x, w_y)
}

fn inv_sqrt_sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn cca_matches_whitened_svd_oracle_over_random_instances() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alphas = [1e-12, 1e-6, 1e-2];
    let mut instances = 0;
    while instances < 102 {
        let d_x = rng.random_range(2..=20);
        let d_y = rng.random_range(2..=20);
        let n = rng.random_range((d_x.max(d_y) + 2)..=200);
        let alpha = alphas[instances % alphas.len()];
        let data = random_dataset(&mut rng, d_x, d_y, n);
        let blocks = compute_covariance_blocks(&data).unwrap();

        let k = d_x.min(d_y);
        let config = SolverConfig::new(Method::Cca, alpha, k);
        let model = solve_cca(&blocks, &config).unwrap();
        let (rho_oracle, wx_oracle, _) = oracle_cca(&blocks, alpha, k);

        assert_eq!(model.k(), rho_oracle.len());
        for i in 0..model.k() {
            assert!(
                (model.rho[i] - rho_oracle[i]).abs() <= 1e-8,
                "rho[{i}] {} vs oracle {} (d_x={d_x}, d_y={d_y}, n={n}, alpha={alpha})",
                model.rho[i],
                rho_oracle[i]
            );
        }

        // Subspace agreement on every gap-separated prefix.
        for j in 1..model.k() {
            if model.rho[j - 1] - model.rho[j] > 1e-4 {
                let angle = max_principal_angle(
                    &model.w_x.columns(0, j).into_owned(),
                    &wx_oracle.columns(0, j).into_owned(),
                );
                assert!(
                    angle <= 1e-6,
                    "principal angle {angle} at prefix {j} (d_x={d_x}, d_y={d_y}, n={n})"
                );
            }
        }
        instances += 1;
    }
    assert!(
        start.elapsed().as_secs() < 30,
        "oracle sweep took {:?}",
        start.elapsed()
    );
}

#[test]
fn unified_framework_agrees_with_direct_solvers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..24 {
        let d_x = rng.random_range(2..=14);
        let d_y = rng.random_range(2..=14);
        let n = rng.random_range((d_x.max(d_y) + 2)..=120);
        let alpha = [1e-12, 1e-6, 1e-2][trial % 3];
        let data = random_dataset(&mut rng, d_x, d_y, n);
        let blocks = compute_covariance_blocks(&data).unwrap();
        let k = d_x.min(d_y);

        // CCA: stacked eigenproblem vs Cholesky+SVD.
        let config = SolverConfig::new(Method::Cca, alpha, k);
        let direct = solve_cca(&blocks, &config).unwrap();
        let stacked = solve_unified(&blocks, &config).unwrap();
        assert_eq!(direct.k(), stacked.k());
        for i in 0..direct.k() {
            assert!(
                (direct.rho[i] - stacked.rho[i]).abs() <= 1e-8,
                "unified CCA rho[{i}]: {} vs {}",
                stacked.rho[i],
                direct.rho[i]
            );
        }
        // Bases agree up to per-column sign wherever the spectrum is
        // simple.
        for j in 0..direct.k() {
            let gap_ok = (j == 0 || direct.rho[j - 1] - direct.rho[j] > 1e-4)
                && (j + 1 == direct.k() || direct.rho[j] - direct.rho[j + 1] > 1e-4);
            if gap_ok {
                let a = direct.w_x.column(j);
                let b = stacked.w_x.column(j);
                let diff = (a - b).norm().min((a + b).norm());
                assert!(diff <= 1e-6 * a.norm().max(1.0), "column {j} differs by {diff}");
            }
        }

        // PLS: stacked eigenproblem vs direct SVD of C_xy.
        let config = SolverConfig::new(Method::Pls, alpha, k);
        let stacked = solve_unified(&blocks, &config).unwrap();
        let svd = blocks.c_xy.clone().svd(false, false);
        for i in 0..stacked.k() {
            assert!(
                (stacked.rho[i] - svd.singular_values[i]).abs() <= 1e-8,
                "unified PLS rho[{i}]: {} vs svd {}",
                stacked.rho[i],
                svd.singular_values[i]
            );
        }

        // Residual of the generalized eigenproblem itself.
        let problem =
            crossview_core::subspace::UnifiedEigenProblem::from_blocks(&blocks, &config).unwrap();
        let pairs = problem.solve().unwrap();
        let norm_a = frobenius(&problem.a_matrix);
        for pair in pairs.iter().take(k) {
            let lhs = &problem.a_matrix * &pair.w;
            let rhs = &problem.b_matrix * &pair.w * pair.rho;
            assert!(
                (lhs - rhs).norm() <= 1e-8 * norm_a * pair.w.norm().max(1.0),
                "stacked eigen residual too large"
            );
        }
    }
}

#[test]
fn unified_pls_on_diagonal_cross_covariance() {
    let blocks = CovarianceBlocks {
        c_xx: DMatrix::identity(2, 2),
        c_yy: DMatrix::identity(2, 2),
        c_xy: DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]),
        x_mean: DVector::zeros(2),
        y_mean: DVector::zeros(2),
        n: 100,
    };
    let config = SolverConfig::new(Method::Pls, 0.0, 2);
    let model = solve_unified(&blocks, &config).unwrap();
    assert!((model.rho[0] - 3.0).abs() < 1e-10);
    assert!((model.rho[1] - 1.0).abs() < 1e-10);
    for j in 0..2 {
        for i in 0..2 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((model.w_x[(i, j)].abs() - expected).abs() < 1e-10);
            assert!((model.w_y[(i, j)].abs() - expected).abs() < 1e-10);
        }
    }
}

#[test]
fn unified_pca_on_diagonal_covariance() {
    let blocks = CovarianceBlocks {
        c_xx: DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]),
        c_yy: DMatrix::identity(2, 2),
        c_xy: DMatrix::zeros(2, 2),
        x_mean: DVector::zeros(2),
        y_mean: DVector::zeros(2),
        n: 100,
    };
    let config = SolverConfig::new(Method::Pca, 0.0, 1);
    let model = solve_unified(&blocks, &config).unwrap();
    assert!((model.rho[0] - 4.0).abs() < 1e-10);
    assert!((model.w_x[(0, 0)].abs() - 1.0).abs() < 1e-10);
    assert!(model.w_x[(1, 0)].abs() < 1e-10);
    // y side is empty for PCA.
    assert_eq!(model.w_y.nrows(), 0);
}

#[test]
fn coupling_relations_hold_for_every_retained_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..12 {
        let d_x = rng.random_range(3..=16);
        let d_y = rng.random_range(3..=16);
        let n = rng.random_range((d_x.max(d_y) + 3)..=150);
        let alpha = [1e-12, 1e-6, 1e-2][trial % 3];
        let data = random_dataset(&mut rng, d_x, d_y, n);
        let blocks = compute_covariance_blocks(&data).unwrap();
        let config = SolverConfig::new(Method::Cca, alpha, d_x.min(d_y));
        let model = solve_cca(&blocks, &config).unwrap();
        let reg = regularize(&blocks, alpha).unwrap();
        let scale = frobenius(&blocks.c_xy);

        for i in 0..model.k() {
            let wx = model.w_x.column(i).into_owned();
            let wy = model.w_y.column(i).into_owned();
            // With unit-variance normalization the lambda factors are 1.
            let r1 = (&blocks.c_xy * &wy - &reg.c_xx * &wx * model.rho[i]).norm();
            let r2 = (blocks.c_xy.transpose() * &wx - &reg.c_yy * &wy * model.rho[i]).norm();
            assert!(r1 <= 1e-6 * scale, "x-side residual {r1} vs scale {scale}");
            assert!(r2 <= 1e-6 * scale, "y-side residual {r2} vs scale {scale}");
            // Unit variance per basis vector.
            let vx = (wx.transpose() * &reg.c_xx * &wx)[(0, 0)];
            let vy = (wy.transpose() * &reg.c_yy * &wy)[(0, 0)];
            assert!((vx - 1.0).abs() <= 1e-8);
            assert!((vy - 1.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn self_coupled_views_reach_full_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x = gaussian_matrix(&mut rng, 10, 30);
    let data = CoupledDataset::new(x.clone(), x, (0..30).collect(), (0.0, 0.0)).unwrap();
    let blocks = compute_covariance_blocks(&data).unwrap();
    let config = SolverConfig::new(Method::Cca, 1e-12, 10);
    let model = solve_cca(&blocks, &config).unwrap();
    for i in 0..model.k() {
        assert!(
            model.rho[i] >= 1.0 - 1e-6,
            "rho[{i}] = {} on identical views",
            model.rho[i]
        );
        assert!(model.rho[i] <= 1.0 + 1e-8);
    }
    // The two bases coincide (same view on both sides).
    let diff = (&model.w_x - &model.w_y).norm();
    assert!(diff <= 1e-5 * model.w_x.norm(), "w_x vs w_y differ by {diff}");
}

#[test]
fn independent_noise_has_no_spurious_correlation() {
    // Null bound computed by a small Monte-Carlo oracle with a different
    // seed, then frozen against the spec's 0.1 cap.
    let null_bound = {
        let mut worst: f64 = 0.0;
        for trial in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let x = gaussian_matrix(&mut rng, 4, 10_000);
            let y = gaussian_matrix(&mut rng, 4, 10_000);
            let data = CoupledDataset::new(x, y, (0..10_000).collect(), (0.0, 30.0)).unwrap();
            let blocks = compute_covariance_blocks(&data).unwrap();
            let config = SolverConfig::new(Method::Cca, 1e-6, 4);
            let model = solve_cca(&blocks, &config).unwrap();
            worst = worst.max(model.rho[0]);
        }
        worst * 1.5
    };
    assert!(null_bound <= 0.1, "null oracle bound {null_bound} exceeds 0.1");

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let x = gaussian_matrix(&mut rng, 4, 10_000);
    let y = gaussian_matrix(&mut rng, 4, 10_000);
    let data = CoupledDataset::new(x, y, (0..10_000).collect(), (0.0, 30.0)).unwrap();
    let blocks = compute_covariance_blocks(&data).unwrap();
    let config = SolverConfig::new(Method::Cca, 1e-6, 4);
    let model = solve_cca(&blocks, &config).unwrap();
    for i in 0..model.k() {
        assert!(model.rho[i] <= null_bound.min(0.1));
    }
}

#[test]
fn dual_route_matches_primal_route() {
    // More dimensions than samples forces the economy-SVD route in fit();
    // compare against solve_cca on the same covariance blocks.
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let data = random_dataset(&mut rng, 30, 25, 12);
    let config = SolverConfig::new(Method::Cca, 1e-6, 8);

    let dual = fit(&data, &config).unwrap();
    let blocks = compute_covariance_blocks(&data).unwrap();
    let primal = solve_cca(&blocks, &config).unwrap();

    assert_eq!(dual.k(), primal.k());
    for i in 0..dual.k() {
        assert!(
            (dual.rho[i] - primal.rho[i]).abs() <= 1e-8,
            "dual rho[{i}] {} vs primal {}",
            dual.rho[i],
            primal.rho[i]
        );
    }
    for j in 0..dual.k() {
        let gap_ok = (j == 0 || primal.rho[j - 1] - primal.rho[j] > 1e-4)
            && (j + 1 == primal.k() || primal.rho[j] - primal.rho[j + 1] > 1e-4);
        if gap_ok {
            let diff = (dual.w_x.column(j) - primal.w_x.column(j)).norm();
            assert!(diff <= 1e-6, "dual/primal column {j} differs by {diff}");
        }
    }

    // PLS dual route against the primal SVD of C_xy.
    let config = SolverConfig::new(Method::Pls, 0.0, 8);
    let dual = fit(&data, &config).unwrap();
    let svd = blocks.c_xy.clone().svd(false, false);
    for i in 0..dual.k() {
        assert!((dual.rho[i] - svd.singular_values[i]).abs() <= 1e-8);
    }
}

#[test]
fn linear_invariance_in_the_small_alpha_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let d_x = 8;
    let d_y = 6;
    let n = 400;
    let data = random_dataset(&mut rng, d_x, d_y, n);

    // Well-conditioned invertible transforms: orthogonal times a bounded
    // diagonal.
    let t_x = random_well_conditioned(&mut rng, d_x);
    let t_y = random_well_conditioned(&mut rng, d_y);
    let transformed = CoupledDataset::new(
        &t_x * data.x_view(),
        &t_y * data.y_view(),
        data.subject_ids().to_vec(),
        data.pose_labels(),
    )
    .unwrap();

    let config = SolverConfig::new(Method::Cca, 1e-12, d_x.min(d_y));
    let base = fit(&data, &config).unwrap();
    let moved = fit(&transformed, &config).unwrap();
    for i in 0..base.k() {
        assert!(
            (base.rho[i] - moved.rho[i]).abs() <= 1e-5,
            "rho[{i}] moved from {} to {} under linear maps",
            base.rho[i],
            moved.rho[i]
        );
    }

    // Projection-score ranking over a fixed gallery/probe set is unchanged.
    let gallery: Vec<DVector<f64>> = (0..6).map(|c| data.x_view().column(c).into_owned()).collect();
    let probe: DVector<f64> = data.y_view().column(7).into_owned();
    let rank = |model: &PairedSubspaceModel, gallery: &[DVector<f64>], probe: &DVector<f64>| {
        let py = model.project_y(probe).unwrap();
        let mut scored: Vec<(usize, f64)> = gallery
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let px = model.project_x(g).unwrap();
                (i, crossview_core::recognition::score(&px, &py).value)
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        scored.into_iter().map(|(i, _)| i).collect::<Vec<_>>()
    };
    let base_rank = rank(&base, &gallery, &probe);
    let moved_gallery: Vec<DVector<f64>> = gallery.iter().map(|g| &t_x * g).collect();
    let moved_probe = &t_y * &probe;
    let moved_rank = rank(&moved, &moved_gallery, &moved_probe);
    assert_eq!(base_rank, moved_rank);
}

fn random_well_conditioned(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let q = gaussian_matrix(rng, d, d).qr().q();
    let diag = DMatrix::from_diagonal(&DVector::from_fn(d, |_, _| rng.random_range(0.5..2.0)));
    q * diag
}

#[test]
fn deterministic_and_byte_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let data = random_dataset(&mut rng, 9, 7, 60);
    let blocks = compute_covariance_blocks(&data).unwrap();
    let config = SolverConfig::new(Method::Cca, 1e-6, 5);

    let a = solve_cca(&blocks, &config).unwrap();
    let b = solve_cca(&blocks, &config).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes(), "identical inputs, different bytes");

    // Round trip through the container preserves every byte.
    let bytes = a.to_bytes();
    let loaded = PairedSubspaceModel::from_bytes(&bytes).unwrap();
    assert_eq!(loaded.to_bytes(), bytes);
    assert_eq!(loaded.digest(), a.digest());
}

#[test]
fn singular_covariance_reports_which_view_and_suggests_alpha() {
    // Rank-deficient x view (a zero row) with alpha = 0.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut x = gaussian_matrix(&mut rng, 4, 50);
    for c in 0..50 {
        x[(3, c)] = x[(0, c)]; // duplicated row => singular covariance
    }
    let y = gaussian_matrix(&mut rng, 3, 50);
    let data = CoupledDataset::new(x, y, (0..50).collect(), (0.0, 30.0)).unwrap();
    let blocks = compute_covariance_blocks(&data).unwrap();
    let config = SolverConfig::new(Method::Cca, 0.0, 3);
    let err = solve_cca(&blocks, &config).unwrap_err();
    let message = err.to_string();
    assert!(message.contains("raise alpha"), "unhelpful message: {message}");

    // The same data solves fine with shrinkage.
    let config = SolverConfig::new(Method::Cca, 1e-6, 3);
    assert!(solve_cca(&blocks, &config).is_ok());
}

#[test]
fn oversized_k_is_clamped_and_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let data = random_dataset(&mut rng, 5, 4, 40);
    let blocks = compute_covariance_blocks(&data).unwrap();
    let config = SolverConfig::new(Method::Cca, 1e-6, 99);
    let model = solve_cca(&blocks, &config).unwrap();
    assert_eq!(model.k(), 4);
    assert!(model.diagnostics.k_clamped);
    assert_eq!(model.diagnostics.requested_k, 99);

    // n - 1 also caps k.
    let data = random_dataset(&mut rng, 10, 10, 6);
    let config = SolverConfig::new(Method::Cca, 1e-6, 10);
    let model = fit(&data, &config).unwrap();
    assert_eq!(model.k(), 5);
    assert!(model.diagnostics.k_clamped);
}

#[test]
fn pca_whiten_round_trips_and_decorrelates() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let data = random_dataset(&mut rng, 6, 5, 80);

    // Full-rank retention reconstructs exactly. retained = 5 keeps only 5
    // of the 6 x-view axes, so the lossless check runs on the y view,
    // where 5 of 5 are kept.
    let (_, proj) = pca_whiten(&data, 5).unwrap();
    for c in 0..8 {
        let y: DVector<f64> = data.y_view().column(c).into_owned();
        let back = proj.reconstruct_y(&proj.apply_y(&y));
        assert!((back - &y).norm() < 1e-10, "lossless PCA round trip failed");
    }

    // Rank-2 data with retained = 2 captures everything.
    let basis = gaussian_matrix(&mut rng, 7, 2);
    let coeff = gaussian_matrix(&mut rng, 2, 40);
    let low_rank = &basis * &coeff;
    let rank2 = CoupledDataset::new(
        low_rank.clone(),
        low_rank,
        (0..40).collect(),
        (0.0, 30.0),
    )
    .unwrap();
    let (_, proj2) = pca_whiten(&rank2, 2).unwrap();
    for c in 0..10 {
        let x: DVector<f64> = rank2.x_view().column(c).into_owned();
        let back = proj2.reconstruct_x(&proj2.apply_x(&x));
        assert!((back - &x).norm() < 1e-10, "rank-2 residual energy too high");
    }

    // Projected covariance is diagonal.
    let (reduced, _) = pca_whiten(&data, 4).unwrap();
    let blocks = compute_covariance_blocks(&reduced).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(
                    blocks.c_xx[(i, j)].abs() <= 1e-8 * blocks.c_xx[(0, 0)].max(1.0),
                    "projected covariance not diagonal at ({i}, {j})"
                );
            }
        }
    }

    // Limit enforcement.
    assert!(pca_whiten(&data, 6).is_err());
}
