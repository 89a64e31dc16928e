#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w2d_core::calculus::SymMat;
use w2d_core::{Grid, GridFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform values in `[-1, 1)` on the closed unit ball.
pub fn noise_field(grid: &Grid, seed: u64) -> GridFunction {
    let mut r = rng(seed);
    let ball = grid.unit_ball();
    let values = (0..grid.len())
        .map(|i| {
            if ball.get(i) {
                r.gen_range(-1.0..1.0)
            } else {
                f64::NAN
            }
        })
        .collect();
    GridFunction::new(ball, values).unwrap()
}

/// Values quantized to multiples of 1/8 so that ties are frequent.
pub fn tie_field(grid: &Grid, seed: u64) -> GridFunction {
    let mut r = rng(seed);
    let ball = grid.unit_ball();
    let values = (0..grid.len())
        .map(|i| {
            if ball.get(i) {
                r.gen_range(-8i32..8) as f64 / 8.0
            } else {
                f64::NAN
            }
        })
        .collect();
    GridFunction::new(ball, values).unwrap()
}

/// A random smooth field: a quadratic plus a few plane waves.
pub fn smooth_field(grid: &Grid, seed: u64) -> GridFunction {
    let mut r = rng(seed);
    let dim = grid.dim();
    let waves: Vec<([f64; 3], f64, f64)> = (0..3)
        .map(|_| {
            let k = [
                r.gen_range(-4.0..4.0),
                r.gen_range(-4.0..4.0),
                r.gen_range(-4.0..4.0),
            ];
            (k, r.gen_range(0.0..6.3), r.gen_range(-0.5..0.5))
        })
        .collect();
    let q = random_sym(&mut r, dim, 1.0);
    let field = move |x: &[f64]| {
        let mut v = 0.5 * q.bilinear(x, x);
        for (k, ph, a) in &waves {
            let t: f64 = x.iter().zip(k).map(|(a, b)| a * b).sum();
            v += a * (t + ph).sin();
        }
        v
    };
    w2d_core::grid::sample(&field, grid).unwrap()
}

pub fn random_sym(r: &mut impl Rng, dim: usize, scale: f64) -> SymMat {
    let mut m = SymMat::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            m.set(i, j, r.gen_range(-scale..scale));
        }
    }
    m
}

/// `A Aᵀ` for a random `A`: positive semidefinite.
pub fn random_psd(r: &mut impl Rng, dim: usize, scale: f64) -> SymMat {
    let a: Vec<f64> = (0..dim * dim).map(|_| r.gen_range(-scale..scale)).collect();
    let mut m = SymMat::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let v = (0..dim).map(|k| a[i * dim + k] * a[j * dim + k]).sum();
            m.set(i, j, v);
        }
    }
    m
}
