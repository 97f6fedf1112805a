//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimizes `f` by cyclic coordinate descent. Each coordinate step fits a
/// parabola through three probes and jumps to its vertex, which is exact
/// for quadratic objectives. Stops once a full sweep moves no coordinate by
/// more than `tol`.
pub fn coordinate_minimize(f: impl Fn(&[f64]) -> f64, x0: &[f64], tol: f64) -> Vec<f64> {
    let mut x = x0.to_vec();
    for _ in 0..200_000 {
        let mut moved = 0.0f64;
        for k in 0..x.len() {
            let h = 1e-2 * x[k].abs().max(1.0);
            let t = x[k];
            x[k] = t - h;
            let fm = f(&x);
            x[k] = t + h;
            let fp = f(&x);
            x[k] = t;
            let f0 = f(&x);
            let curv = (fp - 2.0 * f0 + fm) / (h * h);
            if curv <= 0.0 {
                continue;
            }
            let slope = (fp - fm) / (2.0 * h);
            let step = -slope / curv;
            x[k] = t + step;
            moved = moved.max(step.abs());
        }
        if moved <= tol {
            break;
        }
    }
    x
}

/// Central difference of `f` at `x` along coordinate `k`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    p[k] += h;
    let fp = f(&p);
    p[k] -= 2.0 * h;
    let fm = f(&p);
    (fp - fm) / (2.0 * h)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// Squared Euclidean distances between the rows of `x`, entry by entry.
pub fn direct_sq_dists(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        (0..x.ncols()).map(|k| (x[(i, k)] - x[(j, k)]).powi(2)).sum()
    })
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Largest entrywise error relative to the largest magnitude in `expected`.
pub fn matrix_rel_err(actual: &DMatrix<f64>, expected: &DMatrix<f64>) -> f64 {
    (actual - expected).amax() / expected.amax().max(1e-12)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
