//! Sliding paraboloids: inf-convolutions and contact sets.
//!
//! For an opening `κ > 0` and a vertex `y`, the concave paraboloid
//! `-κ/2 |x - y|² + C` slid up from below first touches the graph of `u` at
//! the minimizer `x₀` of `u(x) + κ/2 |x - y|²`, with height equal to the
//! minimum `m(y)`. The lower contact set `T⁻_κ(V)` collects the touching
//! points that lie in the open unit ball for vertices `y ∈ V`; the upper set
//! is `T⁺_κ(u, V) = T⁻_κ(-u, V)` and `T_κ = T⁻_κ ∩ T⁺_κ`.
//!
//! [`inf_convolution`] computes `m` exactly on the grid with one lower
//! envelope of parabolas per axis line (`O(N^n)` overall).
//! [`brute_force_contact`] is the exhaustive `O(N^{2n})` oracle.
//!
//! Ties between minimizers go to the smallest node index. Envelope values are
//! always reported as `u(x₀) + κ/2 |x₀ - y|²` evaluated with the integer
//! squared lattice distance, the same expression the oracle minimizes.

use crate::error::{Error, Result};
use crate::exact::cmp_cost;
use crate::exec;
use crate::grid::{Grid, GridFunction, Mask};

/// Marker for "no node".
pub const NO_NODE: usize = usize::MAX;

/// Largest grid the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

/// The paraboloid `-κ/2 |x - vertex|² + height`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Paraboloid {
    opening: f64,
    vertex: [f64; 3],
    height: f64,
}

impl Paraboloid {
    pub fn new(opening: f64, vertex: [f64; 3], height: f64) -> Result<Self> {
        check_kappa(opening)?;
        Ok(Paraboloid {
            opening,
            vertex,
            height,
        })
    }

    pub fn opening(&self) -> f64 {
        self.opening
    }

    pub fn vertex(&self) -> [f64; 3] {
        self.vertex
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let d2: f64 = x
            .iter()
            .zip(self.vertex.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        self.height - 0.5 * self.opening * d2
    }

    /// `-κ (x - y)`.
    pub fn gradient(&self, x: &[f64]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (k, xk) in x.iter().enumerate() {
            g[k] = -self.opening * (xk - self.vertex[k]);
        }
        g
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param(
            "kappa",
            format!("must be positive, got {kappa}"),
        ));
    }
    Ok(())
}

/// Result of an inf-convolution: the first-touch heights and touching nodes.
#[derive(Clone, Debug)]
pub struct InfConvolution {
    pub kappa: f64,
    /// `m(y) = min_x u(x) + κ/2 |x - y|²` on the closed-unit-ball nodes.
    pub envelope: GridFunction,
    /// Minimizing node per vertex node, [`NO_NODE`] off the vertex set.
    pub argmin: Vec<usize>,
}

fn lattice_dist_sq(grid: &Grid, a: usize, b: usize) -> i64 {
    let ma = grid.multi_index(a);
    let mb = grid.multi_index(b);
    (0..grid.dim())
        .map(|k| (ma[k] as i64 - mb[k] as i64).pow(2))
        .sum()
}

/// Lower envelope along one line. Candidate `q` has cost
/// `u[q] + w (d[q] + (q - j)²)` at position `j`; for every `j` writes the
/// position with the smallest cost, ties going to the smaller position, or
/// [`NO_NODE`] when the line has no candidates. All comparisons are exact.
fn lower_envelope(u: &[f64], d: &[i64], w: f64, out: &mut [usize]) {
    let n = u.len();
    let dist = |q: usize, j: usize| d[q] + (q as i64 - j as i64).pow(2);
    // q (> p) strictly cheaper than p at j
    let beats =
        |q: usize, p: usize, j: usize| cmp_cost(u[q], dist(q, j), u[p], dist(p, j), w).is_lt();
    // the set of such j is a ray; find its first element in [0, n]
    let first = |p: usize, q: usize| {
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if beats(q, p, mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    };
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<usize> = Vec::with_capacity(n);
    for q in 0..n {
        if !u[q].is_finite() {
            continue;
        }
        while let Some(&p) = v.last() {
            let s = first(p, q);
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
        if v.is_empty() {
            v.push(q);
            z.push(0);
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|x| *x = NO_NODE);
        return;
    }
    let mut k = 0;
    for (j, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] <= j {
            k += 1;
        }
        *o = v[k];
    }
}

/// Exact discrete inf-convolution `m(y) = min_x u(x) + κ/2 |x - y|²` over
/// the domain nodes of `u`, for every vertex `y` in the closed unit ball.
///
/// Uses separable lower-envelope passes, last axis first. Each node carries
/// its current minimizer and the integer squared distance accumulated so
/// far, so every comparison is between exact costs and ties resolve to the
/// smallest node index.
pub fn inf_convolution(u: &GridFunction, kappa: f64) -> Result<InfConvolution> {
    check_kappa(kappa)?;
    let grid = *u.grid();
    let n = grid.nodes_per_axis();
    let h = grid.spacing();
    let w = 0.5 * kappa * h * h;

    let mut cand: Vec<f64> = u
        .values()
        .iter()
        .map(|&v| if v.is_finite() { v } else { f64::INFINITY })
        .collect();
    let mut dist: Vec<i64> = vec![0; grid.len()];
    let mut arg: Vec<usize> = (0..grid.len())
        .map(|i| if u.domain().get(i) { i } else { NO_NODE })
        .collect();

    for axis in (0..grid.dim()).rev() {
        let stride = grid.stride(axis);
        let block = stride * n;
        let starts: Vec<usize> = (0..grid.len() / block)
            .flat_map(|outer| (0..stride).map(move |inner| outer * block + inner))
            .collect();
        let lines = exec::map_slice(&starts, |&s| {
            let lu: Vec<f64> = (0..n).map(|k| cand[s + k * stride]).collect();
            let ld: Vec<i64> = (0..n).map(|k| dist[s + k * stride]).collect();
            let mut pos = vec![NO_NODE; n];
            lower_envelope(&lu, &ld, w, &mut pos);
            (pos, ld)
        });
        let mut next_cand = vec![f64::INFINITY; grid.len()];
        let mut next_dist = vec![0i64; grid.len()];
        let mut next_arg = vec![NO_NODE; grid.len()];
        for (&s, (pos, ld)) in starts.iter().zip(lines) {
            for (j, &q) in pos.iter().enumerate() {
                if q == NO_NODE {
                    continue;
                }
                let dst = s + j * stride;
                let src = s + q * stride;
                next_cand[dst] = cand[src];
                next_dist[dst] = ld[q] + (q as i64 - j as i64).pow(2);
                next_arg[dst] = arg[src];
            }
        }
        cand = next_cand;
        dist = next_dist;
        arg = next_arg;
    }

    let vertices = grid.unit_ball();
    let uv = u.values();
    let envelope: Vec<f64> = (0..grid.len())
        .map(|y| {
            if vertices.get(y) && arg[y] != NO_NODE {
                uv[arg[y]] + w * lattice_dist_sq(&grid, arg[y], y) as f64
            } else {
                f64::NAN
            }
        })
        .collect();
    for (y, a) in arg.iter_mut().enumerate() {
        if !vertices.get(y) {
            *a = NO_NODE;
        }
    }
    Ok(InfConvolution {
        kappa,
        envelope: GridFunction::from_partial(grid, envelope),
        argmin: arg,
    })
}

/// Touching node for one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexContact {
    pub vertex: usize,
    pub contact: usize,
    /// The touching node is not in the open unit ball (`|x₀| ≥ 1 - h/2`).
    pub boundary: bool,
}

#[derive(Clone, Debug)]
pub struct ContactResult {
    pub side: Side,
    pub kappa: f64,
    /// Touching nodes strictly inside the unit ball.
    pub contact_mask: Mask,
    /// One entry per vertex in `V`, in increasing vertex order.
    pub vertex_map: Vec<VertexContact>,
    /// First-touch heights `m(y)` (of `-u` for the plus side).
    pub envelope: GridFunction,
}

fn check_vertices(u: &GridFunction, vertices: &Mask) -> Result<()> {
    u.grid().check_same(vertices.grid())?;
    if !vertices.is_subset_of(&u.grid().unit_ball()) {
        return Err(Error::NotSubset(
            "vertex set must lie in the closed unit ball".into(),
        ));
    }
    Ok(())
}

fn assemble(
    grid: Grid,
    side: Side,
    kappa: f64,
    vertices: &Mask,
    argmin: &[usize],
    envelope: GridFunction,
) -> ContactResult {
    let mut contact_mask = Mask::empty(grid);
    let mut vertex_map = Vec::new();
    for y in vertices.ones() {
        let x = argmin[y];
        if x == NO_NODE {
            continue;
        }
        let boundary = !grid.is_interior(x);
        if !boundary {
            contact_mask.set(x, true);
        }
        vertex_map.push(VertexContact {
            vertex: y,
            contact: x,
            boundary,
        });
    }
    ContactResult {
        side,
        kappa,
        contact_mask,
        vertex_map,
        envelope,
    }
}

/// `T⁻_κ(u, V)`: interior first-touch points of concave paraboloids with
/// vertices in `V` slid up from below.
pub fn contact_set_minus(u: &GridFunction, kappa: f64, vertices: &Mask) -> Result<ContactResult> {
    check_vertices(u, vertices)?;
    let conv = inf_convolution(u, kappa)?;
    Ok(assemble(
        *u.grid(),
        Side::Minus,
        kappa,
        vertices,
        &conv.argmin,
        conv.envelope,
    ))
}

/// `T⁺_κ(u, V) = T⁻_κ(-u, V)`.
pub fn contact_set_plus(u: &GridFunction, kappa: f64, vertices: &Mask) -> Result<ContactResult> {
    let mut r = contact_set_minus(&u.negate(), kappa, vertices)?;
    r.side = Side::Plus;
    Ok(r)
}

pub fn contact_set_side(
    u: &GridFunction,
    kappa: f64,
    vertices: &Mask,
    side: Side,
) -> Result<ContactResult> {
    match side {
        Side::Minus => contact_set_minus(u, kappa, vertices),
        Side::Plus => contact_set_plus(u, kappa, vertices),
    }
}

/// `T_κ(u, V) = T⁻_κ(u, V) ∩ T⁺_κ(u, V)`.
pub fn contact_set(u: &GridFunction, kappa: f64, vertices: &Mask) -> Result<Mask> {
    let lo = contact_set_minus(u, kappa, vertices)?;
    let hi = contact_set_plus(u, kappa, vertices)?;
    lo.contact_mask.intersection(&hi.contact_mask)
}

/// Exhaustive oracle for [`contact_set_minus`] / [`contact_set_plus`]:
/// scans every (vertex, node) pair. Refuses grids above
/// [`BRUTE_FORCE_LIMIT`] nodes.
pub fn brute_force_contact(
    u: &GridFunction,
    kappa: f64,
    vertices: &Mask,
    side: Side,
) -> Result<ContactResult> {
    check_kappa(kappa)?;
    check_vertices(u, vertices)?;
    let grid = *u.grid();
    if grid.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            nodes: grid.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let v = match side {
        Side::Minus => u.clone(),
        Side::Plus => u.negate(),
    };
    let h = grid.spacing();
    let w = 0.5 * kappa * h * h;
    let nodes: Vec<(usize, f64)> = v.domain_values().collect();
    let ball = grid.unit_ball();
    let per_vertex: Vec<(usize, f64)> = exec::map_range(grid.len(), |y| {
        if !ball.get(y) {
            return (NO_NODE, f64::NAN);
        }
        let mut best = NO_NODE;
        let mut best_u = f64::INFINITY;
        let mut best_d = 0;
        for &(x, ux) in &nodes {
            let d = lattice_dist_sq(&grid, x, y);
            if best == NO_NODE || cmp_cost(ux, d, best_u, best_d, w).is_lt() {
                best = x;
                best_u = ux;
                best_d = d;
            }
        }
        (best, best_u + w * best_d as f64)
    });
    let argmin: Vec<usize> = per_vertex.iter().map(|p| p.0).collect();
    let envelope = GridFunction::from_partial(grid, per_vertex.iter().map(|p| p.1).collect());
    Ok(assemble(grid, side, kappa, vertices, &argmin, envelope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};

    fn half_sq(x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn lower_envelope_matches_scan() {
        let f = [3.0, f64::INFINITY, 0.5, 2.0, 0.25, 7.0, 1.0, 0.25];
        let d = [0, 0, 2, 1, 0, 0, 3, 0];
        let mut pos = [0; 8];
        lower_envelope(&f, &d, 0.3, &mut pos);
        for j in 0..8 {
            let cost = |i: usize| f[i] + 0.3 * (d[i] + (i as i64 - j as i64).pow(2)) as f64;
            let best = (0..8).filter(|&i| f[i].is_finite()).fold(NO_NODE, |a, i| {
                if a == NO_NODE || cost(i) < cost(a) {
                    i
                } else {
                    a
                }
            });
            assert_eq!(pos[j], best);
        }
    }

    #[test]
    fn zero_field_touches_at_vertex() {
        let g = make_grid(2, 17).unwrap();
        let u = GridFunction::constant(g, 0.0);
        let conv = inf_convolution(&u, 3.0).unwrap();
        for y in g.unit_ball().ones() {
            assert_eq!(conv.argmin[y], y);
            assert_eq!(conv.envelope.get(y).unwrap(), 0.0);
        }
    }

    #[test]
    fn half_square_envelope() {
        let g = make_grid(2, 33).unwrap();
        let u = sample(&half_sq, &g).unwrap();
        let conv = inf_convolution(&u, 1.0).unwrap();
        let h = g.spacing();
        for y in g.unit_ball().ones() {
            let py = g.point(y);
            let px = g.point(conv.argmin[y]);
            for k in 0..2 {
                assert!((px[k] - py[k] / 2.0).abs() <= 0.5 * h + 1e-12);
            }
            let r2 = py[0] * py[0] + py[1] * py[1];
            let m = conv.envelope.get(y).unwrap();
            // exact when y/2 is a node, otherwise within the node offset
            assert!(m >= r2 / 4.0 - 1e-14 && m <= r2 / 4.0 + h * h / 2.0 + 1e-14);
        }
    }

    #[test]
    fn rejects_bad_kappa() {
        let g = make_grid(1, 9).unwrap();
        let u = GridFunction::constant(g, 0.0);
        assert!(inf_convolution(&u, 0.0).is_err());
        assert!(inf_convolution(&u, -1.0).is_err());
        assert!(inf_convolution(&u, f64::NAN).is_err());
    }

    #[test]
    fn plus_is_minus_of_negation() {
        let g = make_grid(2, 17).unwrap();
        let u = sample(&|x: &[f64]| (3.0 * x[0]).sin() + x[1] * x[1], &g).unwrap();
        let v = g.unit_ball();
        let plus = contact_set_plus(&u, 2.0, &v).unwrap();
        let minus = contact_set_minus(&u.negate(), 2.0, &v).unwrap();
        assert_eq!(plus.contact_mask, minus.contact_mask);
        assert_eq!(plus.vertex_map, minus.vertex_map);
        assert_eq!(plus.side, Side::Plus);
    }

    #[test]
    fn empty_vertex_set() {
        let g = make_grid(2, 17).unwrap();
        let u = GridFunction::constant(g, 0.0);
        let r = contact_set_minus(&u, 1.0, &Mask::empty(g)).unwrap();
        assert!(r.contact_mask.is_empty());
        assert!(r.vertex_map.is_empty());
    }

    #[test]
    fn vertices_outside_ball_rejected() {
        let g = make_grid(2, 17).unwrap();
        let u = GridFunction::constant(g, 0.0);
        assert!(contact_set_minus(&u, 1.0, &Mask::full(g)).is_err());
    }

    #[test]
    fn zero_field_contacts_everywhere() {
        let g = make_grid(2, 17).unwrap();
        let u = GridFunction::constant(g, 0.0);
        let t = contact_set(&u, 5.0, &g.unit_ball()).unwrap();
        assert_eq!(t, g.open_unit_ball());
    }

    #[test]
    fn oracle_refuses_large_grids() {
        let g = make_grid(2, 513).unwrap();
        let u = GridFunction::constant(g, 0.0);
        assert!(matches!(
            brute_force_contact(&u, 1.0, &g.unit_ball(), Side::Minus),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn paraboloid_values() {
        let p = Paraboloid::new(2.0, [0.5, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(p.value(&[0.5, 0.0]), 1.0);
        assert_eq!(p.value(&[1.5, 0.0]), 0.0);
        assert_eq!(p.gradient(&[1.5, 0.0])[0], -2.0);
        assert!(Paraboloid::new(0.0, [0.0; 3], 0.0).is_err());
    }
}
