mod common;

use common::{coordinate_minimize, matrix_rel_err, rng, uniform_matrix};
use corrmv::datagen::gen_planted_multiview;
use corrmv::features::{
    cemv_fit, cemv_update_w, cemv_update_x, cmv_fit, cmv_update_w, cmv_update_x, l2mv_fit,
    AuxWeights, CmvConfig, MultiViewFeatureSet,
};
use nalgebra::DMatrix;

struct Instance {
    fs: MultiViewFeatureSet,
    w: Vec<DMatrix<f64>>,
    x: DMatrix<f64>,
    a: DMatrix<f64>,
    a_entry: Vec<DMatrix<f64>>,
}

fn small_instance(seed: u64, n: usize, d: usize, dims: &[usize]) -> Instance {
    let mut r = rng(seed);
    let views: Vec<DMatrix<f64>> = dims.iter().map(|&dv| uniform_matrix(&mut r, dv, n, -2.0, 2.0)).collect();
    let w = dims.iter().map(|&dv| uniform_matrix(&mut r, dv, d, -1.0, 1.0)).collect();
    let x = uniform_matrix(&mut r, d, n, -1.0, 1.0);
    let a = uniform_matrix(&mut r, dims.len(), n, -1.0, -0.05);
    let a_entry = dims.iter().map(|&dv| uniform_matrix(&mut r, dv, n, -1.0, -0.05)).collect();
    Instance {
        fs: MultiViewFeatureSet::new(views).unwrap(),
        w,
        x,
        a,
        a_entry,
    }
}

fn unflatten(v: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v)
}

fn flatten(ms: &[DMatrix<f64>]) -> Vec<f64> {
    ms.iter().flat_map(|m| m.iter().copied()).collect()
}

fn split_maps(v: &[f64], dims: &[usize], d: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    let mut off = 0;
    for &dv in dims {
        out.push(unflatten(&v[off..off + dv * d], dv, d));
        off += dv * d;
    }
    out
}

const C1: f64 = 0.3;
const C2: f64 = 0.2;

#[test]
fn cmv_latent_update_minimizes_block_objective() {
    for seed in 0..5 {
        let inst = small_instance(seed, 4, 2, &[3, 2]);
        let (d, n) = inst.x.shape();
        let f = |v: &[f64]| {
            let x = unflatten(v, d, n);
            let mut total = C2 * x.norm_squared();
            for (vi, (z, w)) in inst.fs.views().iter().zip(&inst.w).enumerate() {
                for i in 0..n {
                    let r = z.column(i) - w * x.column(i);
                    total += -inst.a[(vi, i)] * r.norm_squared();
                }
            }
            total
        };
        let oracle = unflatten(&coordinate_minimize(f, &vec![0.0; d * n], 1e-13), d, n);
        let got = cmv_update_x(&inst.fs, &inst.w, &inst.a, C2).unwrap();
        assert!(matrix_rel_err(&got, &oracle) < 1e-5, "seed {seed}");
    }
}

#[test]
fn cmv_map_update_minimizes_block_objective() {
    for seed in 0..5 {
        let inst = small_instance(seed, 4, 3, &[3, 2]);
        let dims = inst.fs.view_dims();
        let d = inst.x.nrows();
        let f = |v: &[f64]| {
            let w = split_maps(v, &dims, d);
            let mut total = 0.0;
            for (vi, (z, wv)) in inst.fs.views().iter().zip(&w).enumerate() {
                total += C1 * wv.norm_squared();
                for i in 0..inst.x.ncols() {
                    let r = z.column(i) - wv * inst.x.column(i);
                    total += -inst.a[(vi, i)] * r.norm_squared();
                }
            }
            total
        };
        let oracle = split_maps(&coordinate_minimize(f, &flatten(&inst.w), 1e-13), &dims, d);
        let got = cmv_update_w(&inst.fs, &inst.x, &inst.a, C1).unwrap();
        for (g, o) in got.iter().zip(&oracle) {
            assert!(matrix_rel_err(g, o) < 1e-5, "seed {seed}");
        }
    }
}

#[test]
fn cemv_latent_update_minimizes_block_objective() {
    for seed in 0..5 {
        let inst = small_instance(seed + 10, 4, 2, &[3, 1]);
        let (d, n) = inst.x.shape();
        let f = |v: &[f64]| {
            let x = unflatten(v, d, n);
            let mut total = C2 * x.norm_squared();
            for ((z, w), a) in inst.fs.views().iter().zip(&inst.w).zip(&inst.a_entry) {
                let res = z - w * &x;
                let dv = z.nrows() as f64;
                total += res.iter().zip(a.iter()).map(|(r, a)| -a * r * r).sum::<f64>() / dv;
            }
            total
        };
        let oracle = unflatten(&coordinate_minimize(f, &vec![0.0; d * n], 1e-13), d, n);
        let got = cemv_update_x(&inst.fs, &inst.w, &inst.a_entry, C2).unwrap();
        assert!(matrix_rel_err(&got, &oracle) < 1e-5, "seed {seed}");
    }
}

#[test]
fn cemv_row_update_minimizes_block_objective() {
    for seed in 0..5 {
        let inst = small_instance(seed + 20, 4, 3, &[2, 3]);
        let dims = inst.fs.view_dims();
        let d = inst.x.nrows();
        let f = |v: &[f64]| {
            let w = split_maps(v, &dims, d);
            let mut total = 0.0;
            for ((z, wv), a) in inst.fs.views().iter().zip(&w).zip(&inst.a_entry) {
                let res = z - wv * &inst.x;
                total += C1 * wv.norm_squared();
                total += res.iter().zip(a.iter()).map(|(r, a)| -a * r * r).sum::<f64>();
            }
            total
        };
        let oracle = split_maps(&coordinate_minimize(f, &flatten(&inst.w), 1e-13), &dims, d);
        let got = cemv_update_w(&inst.fs, &inst.x, &inst.a_entry, C1).unwrap();
        for (g, o) in got.iter().zip(&oracle) {
            assert!(matrix_rel_err(g, o) < 1e-5, "seed {seed}");
        }
    }
}

fn random_set(seed: u64, n: usize, dims: &[usize]) -> MultiViewFeatureSet {
    let mut r = rng(seed);
    MultiViewFeatureSet::new(dims.iter().map(|&dv| uniform_matrix(&mut r, dv, n, -1.0, 1.0)).collect()).unwrap()
}

#[test]
fn traces_are_non_decreasing_and_bounded() {
    for seed in 0..5 {
        let fs = random_set(seed, 30, &[5, 4]);
        let mut cfg = CmvConfig::new(3, 1.0).unwrap();
        cfg.seed = seed;
        cfg.rel_tol = 0.0;
        cfg.max_outer = 15;
        for model in [cmv_fit(&fs, &cfg).unwrap(), cemv_fit(&fs, &cfg).unwrap()] {
            assert_eq!(model.trace.iterations(), 15);
            assert!(model.trace.max_decrease() <= 1e-10);
            assert!(model.trace.objective.iter().all(|&r| r <= 60.0));
        }
    }
}

#[test]
fn noiseless_planted_model_is_reconstructed() {
    let planted = gen_planted_multiview(60, 3, &[6, 5], 4).unwrap();
    let mut cfg = CmvConfig::new(3, 10.0).unwrap();
    cfg.c1 = 1e-6;
    cfg.c2 = 1e-6;
    cfg.max_outer = 100;
    cfg.rel_tol = 1e-12;
    let model = cmv_fit(&planted.features, &cfg).unwrap();
    for (res, z) in model.mean_residual(&planted.features).iter().zip(planted.features.views()) {
        let energy = z.norm_squared() / z.ncols() as f64;
        assert!(res / energy < 1e-6, "relative residual {}", res / energy);
    }
    if let AuxWeights::PerInstance(a) = &model.weights {
        assert!(a.iter().all(|&x| x < -0.999));
    }
}

#[test]
fn identical_views_match_single_view_with_halved_latent_penalty() {
    let z = random_set(7, 25, &[4]).into_views().remove(0);
    let pair = MultiViewFeatureSet::duplicated(z.clone()).unwrap();
    let single = MultiViewFeatureSet::new(vec![z]).unwrap();
    let mut cfg = CmvConfig::new(2, 0.8).unwrap();
    cfg.max_outer = 20;
    let both = cmv_fit(&pair, &cfg).unwrap();
    let mut half = cfg.clone();
    half.c2 = cfg.c2 / 2.0;
    let one = cmv_fit(&single, &half).unwrap();
    assert!(matrix_rel_err(&both.x, &one.x) < 1e-8);
    assert!(matrix_rel_err(&both.w[0], &one.w[0]) < 1e-8);
    assert!(matrix_rel_err(&both.w[1], &both.w[0]) < 1e-12);
    let AuxWeights::PerInstance(a) = &both.weights else { panic!() };
    assert!((a.row(0) - a.row(1)).amax() < 1e-12);
    assert_eq!(both.trace.iterations(), one.trace.iterations());
}

#[test]
fn entrywise_solver_reduces_to_instance_solver_for_scalar_views() {
    let fs = random_set(9, 20, &[1, 1, 1]);
    let mut cfg = CmvConfig::new(1, 0.7).unwrap();
    cfg.max_outer = 10;
    cfg.rel_tol = 0.0;
    let a = cmv_fit(&fs, &cfg).unwrap();
    let b = cemv_fit(&fs, &cfg).unwrap();
    assert!(matrix_rel_err(&a.x, &b.x) < 1e-9);
    for (t, u) in a.trace.objective.iter().zip(&b.trace.objective) {
        assert!((t - u).abs() < 1e-9 * t.abs());
    }
}

#[test]
fn huge_kernel_size_matches_squared_error_baseline() {
    let fs = random_set(11, 30, &[4, 3]);
    let mut cfg = CmvConfig::new(2, 1e6).unwrap();
    // At this kernel size successive objective values round to the same
    // float, so a single long outer iteration is compared.
    cfg.max_outer = 1;
    cfg.max_inner = 20;
    let c = cmv_fit(&fs, &cfg).unwrap();
    let l = l2mv_fit(&fs, &cfg).unwrap();
    let err = matrix_rel_err(&c.x, &l.x);
    assert!(err < 1e-8, "{err}");
}

#[test]
fn solvers_are_equivariant_under_instance_permutation() {
    let fs = random_set(13, 24, &[4, 3]);
    let perm: Vec<usize> = (0..24).map(|i| (i * 7 + 3) % 24).collect();
    let shuffled = fs.permuted(&perm);
    let mut cfg = CmvConfig::new(2, 1.0).unwrap();
    cfg.max_outer = 8;
    cfg.rel_tol = 0.0;
    for fit in [cmv_fit, cemv_fit] {
        let base = fit(&fs, &cfg).unwrap();
        let moved = fit(&shuffled, &cfg).unwrap();
        let expected = DMatrix::from_fn(base.x.nrows(), 24, |r, i| base.x[(r, perm[i])]);
        assert!(matrix_rel_err(&moved.x, &expected) < 1e-8);
        for (a, b) in base.w.iter().zip(&moved.w) {
            assert!(matrix_rel_err(b, a) < 1e-8);
        }
    }
}
