mod common;

use common::{noise_field, rng};
use proptest::prelude::*;
use rand::Rng;
use w2d_core::gf1;
use w2d_core::grid::{ball_mask, make_grid, measure};
use w2d_core::{Grid, Mask};

fn random_mask(grid: &Grid, seed: u64, density: f64) -> Mask {
    let mut r = rng(seed);
    Mask::from_bits(
        *grid,
        (0..grid.len()).map(|_| r.gen_bool(density)).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_monotone_and_additive(dim in 1usize..=3, seed in any::<u64>(), d in 0.05f64..0.95) {
        let grid = make_grid(dim, 9).unwrap();
        let a = random_mask(&grid, seed, d);
        let b = random_mask(&grid, seed ^ 0x5555, d);
        let both = a.intersection(&b).unwrap();
        prop_assert!(measure(&both) <= measure(&a));
        let only_b = b.difference(&a).unwrap();
        let union = a.union(&b).unwrap();
        let sum = measure(&a) + measure(&only_b);
        prop_assert!((measure(&union) - sum).abs() <= 1e-12 * sum.max(1.0));
        prop_assert_eq!(union.count(), a.count() + only_b.count());
    }

    #[test]
    fn ball_masks_nested(dim in 1usize..=3, cx in -1.0f64..1.0, cy in -1.0f64..1.0, cz in -1.0f64..1.0,
                         r1 in 0.0f64..1.5, dr in 0.0f64..1.0) {
        let grid = make_grid(dim, 17).unwrap();
        let c = [cx, cy, cz];
        let small = ball_mask(&grid, &c[..dim], r1);
        let big = ball_mask(&grid, &c[..dim], r1 + dr);
        prop_assert!(small.is_subset_of(&big));
    }

    #[test]
    fn gf1_round_trip_is_bit_exact(dim in 1usize..=3, seed in any::<u64>()) {
        let grid = make_grid(dim, if dim == 3 { 9 } else { 17 }).unwrap();
        let u = noise_field(&grid, seed).map(|v| v * 1e-7 + v.powi(3)).unwrap();
        let text = gf1::to_string(&u);
        let back = gf1::from_str(&text).unwrap();
        prop_assert_eq!(back.grid(), u.grid());
        prop_assert_eq!(back.domain(), u.domain());
        for (a, b) in back.values().iter().zip(u.values()) {
            prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
}

#[test]
fn ball_count_nine_nodes() {
    // independent enumeration of |x| ≤ 1 on the 9×9 grid
    let h = 0.25;
    let mut count = 0;
    for i in 0..9 {
        for j in 0..9 {
            let (x, y) = (-1.0 + i as f64 * h, -1.0 + j as f64 * h);
            if x * x + y * y <= 1.0 {
                count += 1;
            }
        }
    }
    let grid = make_grid(2, 9).unwrap();
    assert_eq!(ball_mask(&grid, &[0.0, 0.0], 1.0).count(), count);
    assert_eq!(count, 49);
}

#[test]
fn tiny_radius_keeps_center_only() {
    let grid = make_grid(2, 17).unwrap();
    let m = ball_mask(&grid, &[0.25, -0.5], 0.4 * grid.spacing());
    assert_eq!(
        m.ones().collect::<Vec<_>>(),
        vec![grid.linear_index(&[10, 4, 0])]
    );
}

#[test]
fn full_box_measure_convention() {
    for n in [9usize, 33] {
        let grid = make_grid(2, n).unwrap();
        let full = Mask::full(grid);
        let side = n as f64 * grid.spacing();
        assert!((measure(&full) - side * side).abs() < 1e-12);
        assert!((side - (2.0 + 2.0 / (n as f64 - 1.0))).abs() < 1e-15);
    }
}

#[test]
fn unit_ball_area_converges() {
    let mut errs = Vec::new();
    for n in [65usize, 129, 257, 513] {
        let grid = make_grid(2, n).unwrap();
        let err = (grid.unit_ball().measure() - std::f64::consts::PI).abs();
        // rasterization error at most one cell layer along the perimeter
        assert!(
            err <= 2.0 * std::f64::consts::PI * grid.spacing(),
            "N={n} err={err}"
        );
        errs.push(err);
    }
    assert!(errs[3] < errs[0]);
    let g = make_grid(2, 257).unwrap();
    assert!((g.unit_ball().measure() / std::f64::consts::PI - 1.0).abs() < 0.02);
    let g = make_grid(2, 513).unwrap();
    assert!((g.unit_ball().measure() / std::f64::consts::PI - 1.0).abs() < 0.01);
}

#[test]
fn singular_origin_clamp() {
    let grid = make_grid(2, 65).unwrap();
    let u = w2d_core::grid::sample(&|x: &[f64]| (x[0] * x[0] + x[1] * x[1]).powf(-0.25), &grid)
        .unwrap();
    let h = grid.spacing();
    assert!((u.get(grid.origin_index()).unwrap() - h.powf(-0.5)).abs() < 1e-12);
}
