//! Discrete Hardy–Littlewood maximal function, Vitali selection and the
//! (θ, Θ)-type covering lemma check.

use crate::balls::{unit_ball_family, LatticeBall, LinePrefix, NodeBall};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{ball_mask, Grid, GridFunction, Mask, Point};

/// `M(g)(x) = max_r |B_r(x)|^{-1} Σ_{B_r(x) ∩ Ω} |g| h^n` over radii
/// `r ∈ {h, 2h, …, 2}`, where `Ω` is the domain of `g` and `|B_r(x)|` is the
/// measure of the full lattice ball, not of its intersection with `Ω`.
pub fn maximal_function(g: &GridFunction) -> GridFunction {
    let grid = *g.grid();
    let prefix = LinePrefix::new(&grid, |i| {
        if g.domain().get(i) {
            g.values()[i].abs()
        } else {
            0.0
        }
    });
    let total: f64 = g.domain_values().map(|(_, v)| v.abs()).sum();
    let max_cells = grid.nodes_per_axis() - 1;
    let balls: Vec<LatticeBall> = (1..=max_cells)
        .map(|m| LatticeBall::new(grid.dim(), m))
        .collect();
    let values = exec::map_range(grid.len(), |x| {
        if !g.domain().get(x) {
            return f64::NAN;
        }
        let mut best = 0.0f64;
        for ball in &balls {
            let vol = ball.count() as f64;
            // no larger ball can beat the current best
            if total / vol <= best {
                break;
            }
            best = best.max(prefix.ball_sum(x, ball) / vol);
        }
        best
    });
    GridFunction::from_partial(grid, values)
}

/// Average of `|g|` over the lattice ball of radius `m h` at `x`, normalized
/// by the full ball (the individual terms of the maximal function).
pub fn ball_average(g: &GridFunction, x: usize, radius_cells: usize) -> f64 {
    let grid = *g.grid();
    let ball = LatticeBall::new(grid.dim(), radius_cells);
    let p = grid.point(x);
    let mask = ball_mask(
        &grid,
        &p[..grid.dim()],
        radius_cells as f64 * grid.spacing(),
    );
    let s: f64 = mask
        .ones()
        .filter(|&i| g.domain().get(i))
        .map(|i| g.values()[i].abs())
        .sum();
    s / ball.count() as f64
}

/// Both sides of the weak type (1,1) inequality at one level `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weak11 {
    pub t: f64,
    /// `|{x ∈ Ω : M(g)(x) > t}|`.
    pub level_measure: f64,
    /// `t^{-1} ‖g‖_{L¹}`.
    pub bound: f64,
    /// `t |{M(g) > t}| / ‖g‖_{L¹}` (zero when `g ≡ 0`).
    pub constant: f64,
}

/// Weak (1,1) comparison using a precomputed maximal function.
pub fn weak11_from_maximal(mg: &GridFunction, g: &GridFunction, t: f64) -> Result<Weak11> {
    if !(t > 0.0) {
        return Err(Error::param("t", format!("must be positive, got {t}")));
    }
    let h_n = g.grid().cell_measure();
    let l1 = g.lp_norm(1.0);
    let level = mg.domain_values().filter(|&(_, v)| v > t).count() as f64 * h_n;
    Ok(Weak11 {
        t,
        level_measure: level,
        bound: l1 / t,
        constant: if l1 > 0.0 { t * level / l1 } else { 0.0 },
    })
}

pub fn weak11_check(g: &GridFunction, t: f64) -> Result<Weak11> {
    weak11_from_maximal(&maximal_function(g), g, t)
}

/// `sup_t t |{M(g) > t}| / ‖g‖_{L¹}` over all levels. The supremum is
/// approached just below the attained values of `M(g)`, so it is evaluated
/// at each distinct value `v` as `v · |{M(g) ≥ v}|`.
pub fn weak11_constant(mg: &GridFunction, g: &GridFunction) -> f64 {
    let l1 = g.lp_norm(1.0);
    if l1 == 0.0 {
        return 0.0;
    }
    let h_n = g.grid().cell_measure();
    let mut vals: Vec<f64> = mg.domain_values().map(|(_, v)| v).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut best = 0.0f64;
    let mut k = 0;
    while k < vals.len() {
        let v = vals[k];
        while k < vals.len() && vals[k] == v {
            k += 1;
        }
        // vals[..k] are all >= v
        best = best.max(v * k as f64 * h_n / l1);
    }
    best
}

/// A closed ball in `ℝ^n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: &[f64], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(
                "radius",
                format!("must be positive, got {radius}"),
            ));
        }
        let mut c = [0.0; 3];
        c[..center.len()].copy_from_slice(center);
        Ok(Ball { center: c, radius })
    }

    pub fn distance_between_centers(&self, other: &Ball) -> f64 {
        self.center
            .iter()
            .zip(other.center.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Closed balls intersect iff the centres are at most `r₁ + r₂` apart.
    pub fn intersects(&self, other: &Ball) -> bool {
        self.distance_between_centers(other) <= self.radius + other.radius
    }

    pub fn dilate(&self, factor: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * factor,
        }
    }

    pub fn mask(&self, grid: &Grid) -> Mask {
        ball_mask(grid, &self.center[..grid.dim()], self.radius)
    }
}

/// Greedy Vitali selection: visit balls by decreasing radius (stable on
/// ties) and keep each one disjoint from everything kept so far. Returns the
/// indices of the kept balls in selection order.
pub fn vitali_select_indices(balls: &[Ball]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| balls[b].radius.total_cmp(&balls[a].radius));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&k| !balls[k].intersects(&balls[i])) {
            kept.push(i);
        }
    }
    kept
}

/// Pairwise disjoint subfamily whose 5× dilations cover every input ball.
pub fn vitali_select(balls: &[Ball]) -> Vec<Ball> {
    vitali_select_indices(balls)
        .into_iter()
        .map(|i| balls[i])
        .collect()
}

/// A ball of the scan family that violates hypothesis (ii).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringWitness {
    pub ball: NodeBall,
    pub density_e: f64,
    pub density_f: f64,
}

#[derive(Clone, Debug)]
pub struct CoveringReport {
    pub theta: f64,
    pub big_theta: f64,
    /// `|E| > θ |B₁|`.
    pub hypothesis_i_holds: bool,
    pub measure_e: f64,
    pub measure_ball: f64,
    /// Every scanned ball with `|B ∩ E| ≥ θ|B|` has `|B ∩ F| ≥ Θ|B|`.
    pub hypothesis_ii_holds: bool,
    /// First failing ball in scan order, if any.
    pub counterexample: Option<CoveringWitness>,
    /// Number of scanned balls where the premise of (ii) held.
    pub premise_balls: usize,
    pub balls_scanned: usize,
    /// `|B₁ ∖ F|`.
    pub lhs: f64,
    /// `(1 - (Θ - θ)/5^n) |B₁ ∖ E|`.
    pub rhs: f64,
    pub conclusion_holds: bool,
}

/// Checks the (θ, Θ) covering lemma on masks `E ⊆ F ⊆ B₁`.
///
/// Hypothesis (ii) is decided over the finite family of lattice balls with
/// node centres and radii `h, 2h, …` whose nodes lie in the open unit ball.
pub fn covering_lemma_check(
    e: &Mask,
    f: &Mask,
    theta: f64,
    big_theta: f64,
) -> Result<CoveringReport> {
    if !(theta > 0.0 && theta < big_theta && big_theta < 1.0) {
        return Err(Error::param(
            "theta",
            format!("need 0 < theta < Theta < 1, got {theta}, {big_theta}"),
        ));
    }
    e.grid().check_same(f.grid())?;
    let grid = *e.grid();
    let ball = grid.unit_ball();
    if !e.is_subset_of(f) {
        return Err(Error::NotSubset("E must be a subset of F".into()));
    }
    if !f.is_subset_of(&ball) {
        return Err(Error::NotSubset(
            "F must be a subset of the unit ball".into(),
        ));
    }

    let pe = LinePrefix::from_mask(e);
    let pf = LinePrefix::from_mask(f);
    let family = unit_ball_family(&grid);
    let per_radius: Vec<(usize, usize, Option<CoveringWitness>)> =
        exec::map_slice(&family, |(b, centers)| {
            let vol = b.count() as f64;
            let mut premise = 0;
            let mut witness = None;
            for &c in centers {
                let de = pe.ball_sum(c, b) / vol;
                if de >= theta {
                    premise += 1;
                    let df = pf.ball_sum(c, b) / vol;
                    if df < big_theta && witness.is_none() {
                        witness = Some(CoveringWitness {
                            ball: NodeBall {
                                center: c,
                                radius_cells: b.radius_cells(),
                            },
                            density_e: de,
                            density_f: df,
                        });
                    }
                }
            }
            (premise, centers.len(), witness)
        });
    let premise_balls = per_radius.iter().map(|r| r.0).sum();
    let balls_scanned = per_radius.iter().map(|r| r.1).sum();
    let counterexample = per_radius.iter().find_map(|r| r.2);

    let n = grid.dim() as i32;
    let measure_e = e.measure();
    let measure_ball = ball.measure();
    let lhs = ball.difference(f)?.measure();
    let rhs = (1.0 - (big_theta - theta) / 5f64.powi(n)) * ball.difference(e)?.measure();
    Ok(CoveringReport {
        theta,
        big_theta,
        hypothesis_i_holds: measure_e > theta * measure_ball,
        measure_e,
        measure_ball,
        hypothesis_ii_holds: counterexample.is_none(),
        counterexample,
        premise_balls,
        balls_scanned,
        lhs,
        rhs,
        conclusion_holds: lhs <= rhs,
    })
}

/// Rasterization slack `2h · |∂B₁|` for comparing the covering conclusion
/// on a grid.
pub fn covering_slack(grid: &Grid) -> f64 {
    let perimeter = match grid.dim() {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    };
    2.0 * grid.spacing() * perimeter
}
