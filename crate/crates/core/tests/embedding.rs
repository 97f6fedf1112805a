mod common;

use common::{central_difference, direct_sq_dists, matrix_rel_err, rng, uniform_matrix};
use corrmv::datagen::{gen_point_set_views, PointSetConfig};
use corrmv::embedding::{
    cmds, cmvree_gradient, f0_objective, f_objective, mvree_subgradient, ree_fit,
    ree_fit_observed, DissimilarityViews, EmbedConfig, KernelProfile, ReeLoss,
};
use corrmv::eval::procrustes_rmse;
use corrmv::linalg::SortedEigen;
use corrmv::loss::KernelSize;
use nalgebra::DMatrix;

/// `D_ij = B_ii + B_jj - B_ij - B_ji`, written out for an unsymmetric `B`.
fn dists_of(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            b[(i, i)] + b[(j, j)] - b[(i, j)] - b[(j, i)]
        }
    })
}

fn two_noisy_views(seed: u64, n: usize) -> (DissimilarityViews, DMatrix<f64>) {
    let mut r = rng(seed);
    let pts = uniform_matrix(&mut r, n, 2, 0.0, 3.0);
    let clean = direct_sq_dists(&pts);
    let noise = |r: &mut _| {
        let e = uniform_matrix(r, n, n, -1.0, 1.0);
        let mut d = &clean + (&e + e.transpose());
        d.apply(|x| *x = x.max(0.0));
        d.fill_diagonal(0.0);
        d
    };
    let a = noise(&mut r);
    let b = noise(&mut r);
    (DissimilarityViews::new(vec![a, b], None).unwrap(), pts)
}

#[test]
fn correntropy_gradient_is_half_the_full_sum_derivative() {
    for (seed, alpha) in [(1u64, 1.5), (2, 2.0), (3, 1.5), (4, 2.0)] {
        let (views, pts) = two_noisy_views(seed, 5);
        let b = &pts * pts.transpose() + DMatrix::identity(5, 5) * 0.3;
        let sigma = KernelSize::new(1.7).unwrap();
        let f = |v: &[f64]| {
            let bm = DMatrix::from_column_slice(5, 5, v);
            f_objective(&views, &dists_of(&bm), sigma, alpha).unwrap()
        };
        let flat: Vec<f64> = b.iter().copied().collect();
        let fd = DMatrix::from_fn(5, 5, |i, j| central_difference(&f, &flat, i + 5 * j, 1e-5));
        let g = cmvree_gradient(&views, &dists_of(&b), sigma, alpha).unwrap();
        let err = matrix_rel_err(&g, &(fd * 0.5));
        assert!(err < 1e-5, "alpha {alpha}: {err}");
    }
}

#[test]
fn l1_subgradient_is_half_the_full_sum_derivative_away_from_kinks() {
    let (views, pts) = two_noisy_views(5, 5);
    let b = &pts * pts.transpose() + DMatrix::identity(5, 5) * 0.3;
    let f = |v: &[f64]| {
        let bm = DMatrix::from_column_slice(5, 5, v);
        f0_objective(&views, &dists_of(&bm)).unwrap()
    };
    let flat: Vec<f64> = b.iter().copied().collect();
    let fd = DMatrix::from_fn(5, 5, |i, j| central_difference(&f, &flat, i + 5 * j, 1e-7));
    let g = mvree_subgradient(&views, &dists_of(&b)).unwrap();
    assert!(matrix_rel_err(&g, &(fd * 0.5)) < 1e-6);
}

#[test]
fn classical_scaling_recovers_exact_distances() {
    let mut r = rng(21);
    let pts = uniform_matrix(&mut r, 20, 3, -2.0, 2.0);
    let delta = direct_sq_dists(&pts);
    let res = cmds(&delta, 3).unwrap();
    let back = direct_sq_dists(&res.x_k());
    assert!((back - &delta).amax() < 1e-8);
    assert!(procrustes_rmse(&res.x_k(), &pts, None).unwrap() < 1e-8);
}

#[test]
fn iterates_stay_positive_semidefinite() {
    let data = gen_point_set_views(&PointSetConfig::standard(3)).unwrap();
    let mut c = EmbedConfig::correntropy(0.1, 2);
    c.sigma = Some(KernelProfile::PointSet.sigma());
    c.max_iter = 60;
    for (cfg, loss) in [(c, ReeLoss::Correntropy), (EmbedConfig { max_iter: 60, ..EmbedConfig::l1(0.05, 2) }, ReeLoss::L1)] {
        let mut worst = f64::INFINITY;
        ree_fit_observed(&data.views, &cfg, loss, |_, b| {
            let e = SortedEigen::new(b);
            worst = worst.min(e.min() / e.max().max(1e-300));
        })
        .unwrap();
        assert!(worst >= -1e-8, "{worst}");
    }
}

#[test]
fn correntropy_trace_rises_with_small_steps() {
    let data = gen_point_set_views(&PointSetConfig::standard(8)).unwrap();
    let mut cfg = EmbedConfig::correntropy(0.01, 2);
    cfg.sigma = Some(KernelProfile::PointSet.sigma());
    cfg.max_iter = 100;
    let res = ree_fit(&data.views, &cfg, ReeLoss::Correntropy).unwrap();
    let tail = &res.trace.objective[10..];
    assert!(tail.windows(2).all(|w| w[1] >= w[0] - 1e-10));
}

#[test]
fn exact_views_are_a_fixed_point() {
    let mut r = rng(31);
    let pts = uniform_matrix(&mut r, 12, 2, 0.0, 4.0);
    let delta = direct_sq_dists(&pts);
    let views = DissimilarityViews::new(vec![delta.clone(), delta.clone()], None).unwrap();
    let mut cfg = EmbedConfig::correntropy(0.1, 2);
    cfg.max_iter = 20;
    cfg.sigma = Some(KernelSize::new(1.0).unwrap());
    let res = ree_fit(&views, &cfg, ReeLoss::Correntropy).unwrap();
    assert!(procrustes_rmse(&res.x_k(), &pts, None).unwrap() < 1e-8);
    let last = res.trace.last().unwrap();
    assert!((last - 2.0 * 144.0).abs() < 1e-8);
}

#[test]
fn embedding_is_equivariant_under_point_permutation() {
    let (views, _) = two_noisy_views(41, 10);
    let perm: Vec<usize> = (0..10).map(|i| (i * 3 + 1) % 10).collect();
    let moved = views.permuted(&perm);
    for (cfg, loss) in [
        (EmbedConfig { max_iter: 30, sigma: Some(KernelSize::new(2.0).unwrap()), ..EmbedConfig::correntropy(0.05, 2) }, ReeLoss::Correntropy),
        (EmbedConfig { max_iter: 30, ..EmbedConfig::l1(0.02, 2) }, ReeLoss::L1),
    ] {
        let a = ree_fit(&views, &cfg, loss).unwrap();
        let b = ree_fit(&moved, &cfg, loss).unwrap();
        let expected = DMatrix::from_fn(10, 10, |i, j| a.gram[(perm[i], perm[j])]);
        assert!(matrix_rel_err(&b.gram, &expected) < 1e-8);
        for (t, u) in a.trace.objective.iter().zip(&b.trace.objective) {
            assert!((t - u).abs() <= 1e-9 * t.abs().max(1.0));
        }
    }
}
