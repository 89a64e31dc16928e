//! Uniform grids over `[-1, 1]^n`, node masks and sampled fields.
//!
//! Nodes are stored in row-major order with axis 0 the slowest. The closed
//! unit ball is rasterized with the cell-center rule: a node belongs to a set
//! when its coordinate satisfies the set's defining inequality.

use crate::error::{Error, Result};
use crate::exec;

/// A point in up to three dimensions; unused trailing coordinates are zero.
pub type Point = [f64; 3];

/// Relative slack used when testing `|x - c| <= r` in floating point.
const BALL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    nodes_per_axis: usize,
    spacing: f64,
}

impl Grid {
    /// Builds a grid with `nodes_per_axis` nodes on each axis of `[-1, 1]^dim`.
    ///
    /// The node count must be odd (so that the origin is a node) and at
    /// least 9.
    pub fn new(dim: usize, nodes_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dim must be 1, 2 or 3 (got {dim})"
            )));
        }
        if nodes_per_axis % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "nodes_per_axis must be odd (got {nodes_per_axis})"
            )));
        }
        if nodes_per_axis < 9 {
            return Err(Error::InvalidGrid(format!(
                "nodes_per_axis must be at least 9 (got {nodes_per_axis})"
            )));
        }
        Ok(Grid {
            dim,
            nodes_per_axis,
            spacing: 2.0 / (nodes_per_axis - 1) as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    /// Node spacing `h = 2 / (N - 1)`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of nodes `N^n` in the bounding box.
    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume `h^n` carried by a single node.
    pub fn cell_measure(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Index of the central node along one axis.
    pub fn center(&self) -> usize {
        (self.nodes_per_axis - 1) / 2
    }

    pub fn origin_index(&self) -> usize {
        let c = self.center();
        self.linear_index(&[c, c, c])
    }

    /// Coordinate of the `i`-th node along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.spacing
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.nodes_per_axis.pow((self.dim - 1 - axis) as u32)
    }

    pub fn multi_index(&self, mut index: usize) -> [usize; 3] {
        let n = self.nodes_per_axis;
        let mut out = [0; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = index % n;
            index /= n;
        }
        out
    }

    pub fn linear_index(&self, multi: &[usize; 3]) -> usize {
        let mut index = 0;
        for &m in multi.iter().take(self.dim) {
            index = index * self.nodes_per_axis + m;
        }
        index
    }

    pub fn point(&self, index: usize) -> Point {
        let m = self.multi_index(index);
        let mut p = [0.0; 3];
        for axis in 0..self.dim {
            p[axis] = self.coord(m[axis]);
        }
        p
    }

    /// Squared distance from the origin in units of `h²`, exact in integers.
    pub fn lattice_norm_sq(&self, index: usize) -> i64 {
        let m = self.multi_index(index);
        let c = self.center() as i64;
        (0..self.dim).map(|a| (m[a] as i64 - c).pow(2)).sum()
    }

    /// Node reached from `index` by moving `offset` steps along `axis`.
    pub fn neighbor(&self, index: usize, axis: usize, offset: isize) -> Option<usize> {
        let m = self.multi_index(index)[axis] as isize + offset;
        if m < 0 || m >= self.nodes_per_axis as isize {
            return None;
        }
        let stride = self.stride(axis) as isize;
        Some((index as isize + offset * stride) as usize)
    }

    /// Rasterized closed unit ball: nodes with `|x| ≤ 1`.
    pub fn unit_ball(&self) -> Mask {
        let c = self.center() as i64;
        Mask::from_fn(*self, |i| self.lattice_norm_sq(i) <= c * c)
    }

    /// Rasterized open unit ball used for contact points: `|x| < 1 - h/2`.
    pub fn open_unit_ball(&self) -> Mask {
        let c = self.center() as i64;
        // |x| < 1 - h/2  <=>  4 * |m - c|^2 < (2c - 1)^2
        Mask::from_fn(*self, |i| 4 * self.lattice_norm_sq(i) < (2 * c - 1).pow(2))
    }

    /// Whether node `index` lies strictly inside the open unit ball.
    pub fn is_interior(&self, index: usize) -> bool {
        let c = self.center() as i64;
        4 * self.lattice_norm_sq(index) < (2 * c - 1).pow(2)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{}-d grid with {} nodes/axis vs {}-d grid with {} nodes/axis",
                self.dim, self.nodes_per_axis, other.dim, other.nodes_per_axis
            )));
        }
        Ok(())
    }
}

/// Convenience wrapper around [`Grid::new`].
pub fn make_grid(dim: usize, nodes_per_axis: usize) -> Result<Grid> {
    Grid::new(dim, nodes_per_axis)
}

/// Per-node boolean set over the grid box.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    grid: Grid,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(grid: Grid) -> Self {
        Mask {
            grid,
            bits: vec![false; grid.len()],
        }
    }

    pub fn full(grid: Grid) -> Self {
        Mask {
            grid,
            bits: vec![true; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> bool + Sync + Send) -> Self {
        Mask {
            grid,
            bits: exec::map_range(grid.len(), f),
        }
    }

    pub fn from_bits(grid: Grid, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "mask has {} entries, grid has {} nodes",
                bits.len(),
                grid.len()
            )));
        }
        Ok(Mask { grid, bits })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.bits[index] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Cell-counting measure: `(number of true nodes) · h^n`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_measure()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    fn zip_with(&self, other: &Mask, op: impl Fn(bool, bool) -> bool) -> Result<Mask> {
        self.grid.check_same(&other.grid)?;
        Ok(Mask {
            grid: self.grid,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn union(&self, other: &Mask) -> Result<Mask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Mask) -> Result<Mask> {
        self.zip_with(other, |a, b| a && b)
    }

    /// `self ∖ other`.
    pub fn difference(&self, other: &Mask) -> Result<Mask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Mask {
        Mask {
            grid: self.grid,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.grid == other.grid && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Checks that no node with `|x| > 1 + h/2` is set.
    pub fn is_within_unit_ball(&self) -> bool {
        let h = self.grid.spacing();
        let limit = (1.0 + 0.5 * h).powi(2);
        self.ones().all(|i| {
            let p = self.grid.point(i);
            p.iter().map(|x| x * x).sum::<f64>() <= limit
        })
    }
}

/// Rasterizes the closed ball `{x : |x - center| ≤ radius}`.
pub fn ball_mask(grid: &Grid, center: &[f64], radius: f64) -> Mask {
    let mut c = [0.0; 3];
    for (dst, src) in c.iter_mut().zip(center.iter()).take(grid.dim()) {
        *dst = *src;
    }
    let r2 = radius * radius;
    let g = *grid;
    Mask::from_fn(g, move |i| {
        let p = g.point(i);
        let d2: f64 = (0..g.dim()).map(|a| (p[a] - c[a]).powi(2)).sum();
        d2 <= r2 * (1.0 + BALL_TOL)
    })
}

/// `(number of true nodes) · h^n`.
///
/// For the full box this equals `(N h)^n = (2 + h)^n`, one half cell wider
/// on every side than `[-1, 1]^n`.
pub fn measure(mask: &Mask) -> f64 {
    mask.measure()
}

/// A scalar function that can be sampled at a point of `ℝ^n`.
///
/// Only the first `n` coordinates of `x` are meaningful.
pub trait Field {
    fn value(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + ?Sized> Field for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Scalar values on a grid, defined on a domain mask contained in the closed
/// unit ball. Nodes outside the domain hold `NaN`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    domain: Mask,
}

impl GridFunction {
    /// Builds a field from raw values. Values outside `domain` are replaced by
    /// `NaN`; non-finite values inside `domain` are rejected.
    pub fn new(domain: Mask, mut values: Vec<f64>) -> Result<Self> {
        let grid = *domain.grid();
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !domain.is_within_unit_ball() {
            return Err(Error::NotSubset(
                "domain extends outside the unit ball".into(),
            ));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if domain.get(i) {
                if !v.is_finite() {
                    return Err(Error::Undefined {
                        point: grid.point(i)[..grid.dim()].to_vec(),
                        reason: format!("non-finite value {v}"),
                    });
                }
            } else {
                *v = f64::NAN;
            }
        }
        Ok(GridFunction {
            grid,
            values,
            domain,
        })
    }

    /// Builds a field from values where `NaN` marks nodes outside the domain.
    pub(crate) fn from_partial(grid: Grid, values: Vec<f64>) -> Self {
        let domain = Mask {
            grid,
            bits: values.iter().map(|v| v.is_finite()).collect(),
        };
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { f64::NAN })
            .collect();
        GridFunction {
            grid,
            values,
            domain,
        }
    }

    /// The constant `c` on the closed unit ball.
    pub fn constant(grid: Grid, c: f64) -> Self {
        let domain = grid.unit_ball();
        let values = domain
            .bits()
            .iter()
            .map(|&b| if b { c } else { f64::NAN })
            .collect();
        GridFunction {
            grid,
            values,
            domain,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> &Mask {
        &self.domain
    }

    /// Raw node values, `NaN` outside the domain.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> Result<f64> {
        if index < self.values.len() && self.domain.get(index) {
            Ok(self.values[index])
        } else {
            Err(Error::OutsideDomain { index })
        }
    }

    /// Applies `f` on the domain, keeping the domain unchanged.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .zip(self.domain.bits())
            .map(|(&v, &d)| if d { f(v) } else { f64::NAN })
            .collect();
        GridFunction::new(self.domain.clone(), values)
    }

    pub fn scale(&self, c: f64) -> Self {
        let values = self.values.iter().map(|v| c * v).collect();
        GridFunction {
            grid: self.grid,
            values,
            domain: self.domain.clone(),
        }
    }

    pub fn negate(&self) -> Self {
        self.scale(-1.0)
    }

    /// Restricts the domain to `mask ∩ domain`.
    pub fn restrict(&self, mask: &Mask) -> Result<Self> {
        let domain = self.domain.intersection(mask)?;
        GridFunction::new(domain, self.values.clone())
    }

    pub fn domain_values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.domain.ones().map(move |i| (i, self.values[i]))
    }

    /// `max |u|` over the domain, zero for an empty domain.
    pub fn sup_norm(&self) -> f64 {
        self.domain_values().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// Discrete `L^p` norm `(Σ |u|^p h^n)^{1/p}` over the domain.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let h_n = self.grid.cell_measure();
        let s: f64 = self.domain_values().map(|(_, v)| v.abs().powf(p)).sum();
        (s * h_n).powf(1.0 / p)
    }

    /// Whether every domain value is zero.
    pub fn is_zero(&self) -> bool {
        self.domain_values().all(|(_, v)| v == 0.0)
    }
}

/// Evaluates `field` on the closed-unit-ball nodes of `grid`.
///
/// If the field is not finite at the origin (a singular radial family), the
/// origin node takes the value at radius `h` along the first axis. Any other
/// non-finite value is an error.
pub fn sample<F: Field + Sync + ?Sized>(field: &F, grid: &Grid) -> Result<GridFunction> {
    let domain = grid.unit_ball();
    let dim = grid.dim();
    let origin = grid.origin_index();
    let h = grid.spacing();
    let values: Vec<f64> = exec::map_range(grid.len(), |i| {
        if !domain.get(i) {
            return f64::NAN;
        }
        let p = grid.point(i);
        let v = field.value(&p[..dim]);
        if !v.is_finite() && i == origin {
            let mut q = [0.0; 3];
            q[0] = h;
            field.value(&q[..dim])
        } else {
            v
        }
    });
    if let Some(i) = domain.ones().find(|&i| !values[i].is_finite()) {
        return Err(Error::Undefined {
            point: grid.point(i)[..dim].to_vec(),
            reason: "field is not finite here".into(),
        });
    }
    GridFunction::new(domain, values)
}
