//! Node-centred lattice balls and line prefix sums.
//!
//! A lattice ball of radius `m h` around node `c` holds the nodes `x` with
//! `|x - c|² ≤ (m h)²`, tested exactly in integer lattice units. Sums over
//! such balls are evaluated with prefix sums along the fastest axis, so one
//! ball costs one subtraction per lattice row.

use crate::grid::{Grid, Mask};

/// Row decomposition of a lattice ball of radius `m` cells.
#[derive(Clone, Debug)]
pub struct LatticeBall {
    radius_cells: usize,
    /// Offsets along the leading `n - 1` axes and the half width along the
    /// last axis.
    rows: Vec<([isize; 2], isize)>,
    count: usize,
}

fn isqrt(v: i64) -> i64 {
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

impl LatticeBall {
    pub fn new(dim: usize, radius_cells: usize) -> Self {
        let m = radius_cells as i64;
        let mut rows = Vec::new();
        match dim {
            1 => rows.push(([0, 0], m as isize)),
            2 => {
                for d0 in -m..=m {
                    rows.push(([d0 as isize, 0], isqrt(m * m - d0 * d0) as isize));
                }
            }
            _ => {
                for d0 in -m..=m {
                    for d1 in -m..=m {
                        let rest = m * m - d0 * d0 - d1 * d1;
                        if rest >= 0 {
                            rows.push(([d0 as isize, d1 as isize], isqrt(rest) as isize));
                        }
                    }
                }
            }
        }
        let count = rows.iter().map(|&(_, w)| (2 * w + 1) as usize).sum();
        LatticeBall {
            radius_cells,
            rows,
            count,
        }
    }

    pub fn radius_cells(&self) -> usize {
        self.radius_cells
    }

    /// Number of lattice points in the full (unclipped) ball.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Full-ball measure `count · h^n`.
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.count as f64 * grid.cell_measure()
    }

    /// Whether every node of the ball around `center` lies in the open
    /// unit ball, i.e. `|c| + m h ≤ 1 - h`.
    pub fn fits_in_unit_ball(&self, grid: &Grid, center: usize) -> bool {
        let c = grid.center() as i64 - 1;
        let m = self.radius_cells as i64;
        m <= c && grid.lattice_norm_sq(center) <= (c - m) * (c - m)
    }
}

/// Prefix sums of a per-node quantity along the last axis.
#[derive(Clone, Debug)]
pub struct LinePrefix {
    grid: Grid,
    sums: Vec<f64>,
}

impl LinePrefix {
    pub fn new(grid: &Grid, value: impl Fn(usize) -> f64) -> Self {
        let n = grid.nodes_per_axis();
        let lines = grid.len() / n;
        let mut sums = Vec::with_capacity(lines * (n + 1));
        for line in 0..lines {
            let mut acc = 0.0;
            sums.push(0.0);
            for k in 0..n {
                acc += value(line * n + k);
                sums.push(acc);
            }
        }
        LinePrefix { grid: *grid, sums }
    }

    pub fn from_mask(mask: &Mask) -> Self {
        Self::new(mask.grid(), |i| if mask.get(i) { 1.0 } else { 0.0 })
    }

    /// Sum of the quantity over the part of `ball` (centred at node `center`)
    /// that lies inside the grid box.
    pub fn ball_sum(&self, center: usize, ball: &LatticeBall) -> f64 {
        let g = &self.grid;
        let n = g.nodes_per_axis() as isize;
        let dim = g.dim();
        let c = g.multi_index(center);
        let last = c[dim - 1] as isize;
        let mut total = 0.0;
        for &(lead, w) in &ball.rows {
            let mut line = 0isize;
            let mut inside = true;
            for a in 0..dim - 1 {
                let m = c[a] as isize + lead[a];
                if m < 0 || m >= n {
                    inside = false;
                    break;
                }
                line = line * n + m;
            }
            if !inside {
                continue;
            }
            let lo = (last - w).max(0);
            let hi = (last + w).min(n - 1);
            if lo > hi {
                continue;
            }
            let base = (line * (n + 1)) as usize;
            total += self.sums[base + hi as usize + 1] - self.sums[base + lo as usize];
        }
        total
    }
}

/// A lattice ball `(center node, radius in cells)` from the finite family
/// used for ball scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeBall {
    pub center: usize,
    pub radius_cells: usize,
}

/// All balls with node centres and radii `h, 2h, …` whose nodes lie in the
/// open unit ball. Returns one table per radius alongside the centres.
pub fn unit_ball_family(grid: &Grid) -> Vec<(LatticeBall, Vec<usize>)> {
    let domain = grid.unit_ball();
    (1..=grid.center())
        .map(|m| {
            let ball = LatticeBall::new(grid.dim(), m);
            let centers = domain
                .ones()
                .filter(|&c| ball.fits_in_unit_ball(grid, c))
                .collect();
            (ball, centers)
        })
        .filter(|(_, c): &(LatticeBall, Vec<usize>)| !c.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ball_mask, make_grid};

    #[test]
    fn counts_match_rasterized_balls() {
        for dim in 1..=3 {
            let g = make_grid(dim, 17).unwrap();
            for m in 0..=8 {
                let b = LatticeBall::new(dim, m);
                let mask = ball_mask(&g, &[0.0; 3][..dim], m as f64 * g.spacing());
                assert_eq!(b.count(), mask.count(), "dim {dim} m {m}");
            }
        }
    }

    #[test]
    fn clipped_sums_match_masks() {
        let g = make_grid(2, 17).unwrap();
        let field = |i: usize| (i % 7) as f64 + 0.5;
        let pre = LinePrefix::new(&g, field);
        for center in [0, 5, g.origin_index(), g.len() - 3] {
            for m in [1, 3, 9, 20] {
                let b = LatticeBall::new(2, m);
                let p = g.point(center);
                let mask = ball_mask(&g, &p[..2], m as f64 * g.spacing());
                let direct: f64 = mask.ones().map(field).sum();
                assert!((pre.ball_sum(center, &b) - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn family_balls_stay_inside() {
        let g = make_grid(2, 17).unwrap();
        let ball = g.open_unit_ball();
        for (b, centers) in unit_ball_family(&g) {
            for c in centers {
                let p = g.point(c);
                let m = ball_mask(&g, &p[..2], b.radius_cells() as f64 * g.spacing());
                assert!(m.is_subset_of(&ball));
            }
        }
    }
}
