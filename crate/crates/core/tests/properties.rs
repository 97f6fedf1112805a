use corrmv::embedding::psd_project;
use corrmv::eval::{procrustes_rmse, retrieval_topk};
use corrmv::linalg::{pairwise_sq_dists, SortedEigen};
use corrmv::loss::{cauchy_loss, correntropy_weight, gc_loss, hq_g, CauchyScale, GgdParams, KernelSize};
use nalgebra::{DMatrix, Rotation2};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0f64..5.0, rows * cols)
        .prop_map(move |v| DMatrix::from_column_slice(rows, cols, &v))
}

proptest! {
    #[test]
    fn gc_loss_is_bounded_even_and_monotone(
        e in -50.0f64..50.0, alpha in 0.5f64..4.0, beta in 0.2f64..5.0,
    ) {
        let p = GgdParams::new(alpha, beta).unwrap();
        let l = gc_loss(e, &p);
        prop_assert!(l >= 0.0 && l <= p.gamma());
        prop_assert_eq!(l, gc_loss(-e, &p));
        prop_assert!(gc_loss(e.abs() * 1.5 + 1e-3, &p) >= l);
    }

    #[test]
    fn cauchy_loss_grows_without_bound(e in 1.0f64..1e3, c in 0.1f64..10.0) {
        let s = CauchyScale::new(c).unwrap();
        prop_assert!(cauchy_loss(10.0 * e, s) > cauchy_loss(e, s));
        prop_assert_eq!(cauchy_loss(e, s), cauchy_loss(-e, s));
    }

    #[test]
    fn weight_maximizes_half_quadratic_bound(r2 in 0.0f64..20.0, sigma in 0.3f64..4.0, t in 0.01f64..0.99) {
        let s = KernelSize::new(sigma).unwrap();
        let b = r2 / s.two_var();
        let a = correntropy_weight(r2, s);
        let best = b * a - hq_g(a);
        prop_assert!((best - (-b).exp()).abs() < 1e-12);
        prop_assert!(b * -t - hq_g(-t) <= best + 1e-12);
    }

    #[test]
    fn psd_projection_is_psd_idempotent_and_nearest(m in matrix(5, 5)) {
        let sym = (&m + m.transpose()) * 0.5;
        let p = psd_project(&sym).unwrap();
        let eig = SortedEigen::new(&p);
        prop_assert!(eig.min() >= -1e-10 * eig.max().abs().max(1.0));
        let again = psd_project(&p).unwrap();
        prop_assert!((&again - &p).amax() < 1e-9);
        // Any PSD matrix is at least as far from `sym` as the projection.
        let other = &m * m.transpose();
        prop_assert!((&sym - &p).norm() <= (&sym - other).norm() + 1e-9);
    }

    #[test]
    fn retrieval_ignores_monotone_transforms(pts in matrix(12, 2), scale in 0.1f64..10.0) {
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let d = pairwise_sq_dists(&pts);
        let base = retrieval_topk(&d, &labels, 3).unwrap();
        let warped = d.map(|x| scale * x.sqrt() + x.powi(3));
        let moved = retrieval_topk(&warped, &labels, 3).unwrap();
        prop_assert_eq!(base.total, moved.total);
        prop_assert!(base.total <= 12 * 3);
    }

    #[test]
    fn procrustes_ignores_rigid_motions(
        est in matrix(8, 2), reference in matrix(8, 2),
        angle in 0.0f64..6.3, tx in -3.0f64..3.0, ty in -3.0f64..3.0, flip in any::<bool>(),
    ) {
        let base = procrustes_rmse(&est, &reference, None).unwrap();
        let mut rot = *Rotation2::new(angle).matrix();
        if flip {
            rot.set_column(0, &(-rot.column(0)));
        }
        let rot = DMatrix::from_column_slice(2, 2, rot.as_slice());
        let mut moved = &est * rot;
        for mut row in moved.row_iter_mut() {
            row[0] += tx;
            row[1] += ty;
        }
        let after = procrustes_rmse(&moved, &reference, None).unwrap();
        prop_assert!((base - after).abs() < 1e-9 * base.max(1.0));
        let mut shifted_ref = reference.clone();
        shifted_ref.column_mut(0).add_scalar_mut(tx);
        let after_ref = procrustes_rmse(&est, &shifted_ref, None).unwrap();
        prop_assert!((base - after_ref).abs() < 1e-9 * base.max(1.0));
    }
}
