//! Finite differences, symmetric eigenvalues, Pucci extremal operators and
//! the singular operators built on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Grid, GridFunction, Mask};

/// Symmetric `n × n` matrix (`n ≤ 3`) in upper-triangle storage
/// `(00, 01, 02, 11, 12, 22)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat {
    dim: usize,
    upper: [f64; 6],
}

const fn slot(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim));
        SymMat {
            dim,
            upper: [0.0; 6],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, c);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from a row-major `dim × dim` array, symmetrizing it.
    pub fn from_rows(dim: usize, rows: &[f64]) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, 0.5 * (rows[i * dim + j] + rows[j * dim + i]));
            }
        }
        m
    }

    /// `a aᵀ`.
    pub fn outer(a: &[f64]) -> Self {
        let mut m = Self::zeros(a.len());
        for i in 0..a.len() {
            for j in i..a.len() {
                m.set(i, j, a[i] * a[j]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.upper[slot(i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut m = *self;
        m.upper.iter_mut().for_each(|v| *v *= c);
        m
    }

    pub fn add(&self, other: &SymMat) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = *self;
        m.upper
            .iter_mut()
            .zip(other.upper.iter())
            .for_each(|(a, b)| *a += b);
        m
    }

    /// `aᵀ X b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += a[i] * self.get(i, j) * b[j];
            }
        }
        s
    }

    pub fn eigenvalues(&self) -> Spectrum {
        sym_eigenvalues(self)
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum {
    dim: usize,
    values: [f64; 3],
}

impl Spectrum {
    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim]
    }
}

/// Eigenvalues of `x` in ascending order, by closed forms: trivial for
/// `n = 1`, the quadratic formula for `n = 2` and the trigonometric form of
/// Cardano's formula for `n = 3`.
pub fn sym_eigenvalues(x: &SymMat) -> Spectrum {
    let mut values = [0.0; 3];
    match x.dim {
        1 => values[0] = x.get(0, 0),
        2 => {
            let (a, b, c) = (x.get(0, 0), x.get(0, 1), x.get(1, 1));
            let mean = 0.5 * (a + c);
            let rad = (0.5 * (a - c)).hypot(b);
            values[0] = mean - rad;
            values[1] = mean + rad;
        }
        _ => {
            let off = x.get(0, 1).powi(2) + x.get(0, 2).powi(2) + x.get(1, 2).powi(2);
            let d = [x.get(0, 0), x.get(1, 1), x.get(2, 2)];
            if off == 0.0 {
                values = d;
            } else {
                let q = (d[0] + d[1] + d[2]) / 3.0;
                let p2 = (d[0] - q).powi(2) + (d[1] - q).powi(2) + (d[2] - q).powi(2) + 2.0 * off;
                let p = (p2 / 6.0).sqrt();
                // B = (X - qI) / p, r = det(B) / 2
                let b00 = (d[0] - q) / p;
                let b11 = (d[1] - q) / p;
                let b22 = (d[2] - q) / p;
                let b01 = x.get(0, 1) / p;
                let b02 = x.get(0, 2) / p;
                let b12 = x.get(1, 2) / p;
                let det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
                    + b02 * (b01 * b12 - b11 * b02);
                let r = (0.5 * det).clamp(-1.0, 1.0);
                let phi = r.acos() / 3.0;
                let hi = q + 2.0 * p * phi.cos();
                let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
                values = [lo, 3.0 * q - hi - lo, hi];
            }
        }
    }
    let dim = x.dim;
    values[..dim].sort_by(|a, b| a.total_cmp(b));
    Spectrum { dim, values }
}

/// Ellipticity bounds `0 < λ ≤ Λ < ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipticity {
    lambda: f64,
    big_lambda: f64,
}

impl Ellipticity {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param(
                "lambda",
                format!("must be positive, got {lambda}"),
            ));
        }
        if !(big_lambda >= lambda && big_lambda.is_finite()) {
            return Err(Error::param(
                "Lambda",
                format!("must satisfy lambda <= Lambda < inf, got {big_lambda}"),
            ));
        }
        Ok(Ellipticity { lambda, big_lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }
}

fn signed_sums(x: &SymMat) -> (f64, f64) {
    let mut neg = 0.0;
    let mut pos = 0.0;
    for &e in x.eigenvalues().as_slice() {
        if e < 0.0 {
            neg += e;
        } else if e > 0.0 {
            pos += e;
        }
    }
    (neg, pos)
}

/// `M⁺(X) = λ Σ_{e_i<0} e_i + Λ Σ_{e_i>0} e_i`.
pub fn pucci_plus(x: &SymMat, e: &Ellipticity) -> f64 {
    let (neg, pos) = signed_sums(x);
    e.lambda * neg + e.big_lambda * pos
}

/// `M⁻(X) = Λ Σ_{e_i<0} e_i + λ Σ_{e_i>0} e_i`.
pub fn pucci_minus(x: &SymMat, e: &Ellipticity) -> f64 {
    let (neg, pos) = signed_sums(x);
    e.big_lambda * neg + e.lambda * pos
}

/// Per-node vectors in `ℝ^n`, valid on `mask`.
#[derive(Clone, Debug)]
pub struct VecField {
    grid: Grid,
    data: Vec<[f64; 3]>,
    mask: Mask,
}

impl VecField {
    pub fn new(mask: Mask, data: Vec<[f64; 3]>) -> Self {
        VecField {
            grid: *mask.grid(),
            data,
            mask,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn get(&self, index: usize) -> Option<&[f64]> {
        self.mask
            .get(index)
            .then(|| &self.data[index][..self.grid.dim()])
    }

    pub fn norm(&self, index: usize) -> Option<f64> {
        self.get(index)
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
    }
}

/// Per-node symmetric matrices, valid on `mask`.
#[derive(Clone, Debug)]
pub struct SymMatField {
    grid: Grid,
    data: Vec<SymMat>,
    mask: Mask,
}

impl SymMatField {
    pub fn new(mask: Mask, data: Vec<SymMat>) -> Self {
        SymMatField {
            grid: *mask.grid(),
            data,
            mask,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn get(&self, index: usize) -> Option<&SymMat> {
        self.mask.get(index).then(|| &self.data[index])
    }

    /// Component `(i, j)` as a field on the valid mask.
    pub fn component(&self, i: usize, j: usize) -> GridFunction {
        let values = (0..self.grid.len())
            .map(|k| {
                if self.mask.get(k) {
                    self.data[k].get(i, j)
                } else {
                    f64::NAN
                }
            })
            .collect();
        GridFunction::from_partial(self.grid, values)
    }
}

/// A one-dimensional finite-difference stencil: node offsets and weights.
#[derive(Clone, Copy, Debug)]
struct Stencil {
    len: usize,
    offsets: [isize; 4],
    weights: [f64; 4],
}

impl Stencil {
    fn new(offsets: &[isize], weights: &[f64]) -> Self {
        let mut s = Stencil {
            len: offsets.len(),
            offsets: [0; 4],
            weights: [0.0; 4],
        };
        s.offsets[..offsets.len()].copy_from_slice(offsets);
        s.weights[..weights.len()].copy_from_slice(weights);
        s
    }

    fn terms(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.offsets[..self.len]
            .iter()
            .copied()
            .zip(self.weights[..self.len].iter().copied())
    }
}

fn available(u: &GridFunction, index: usize, axis: usize, offsets: &[isize]) -> bool {
    offsets.iter().all(|&o| {
        u.grid()
            .neighbor(index, axis, o)
            .is_some_and(|j| u.domain().get(j))
    })
}

/// Second-order first-derivative stencil along `axis` at `index`: central if
/// both neighbours are in the domain, otherwise one-sided three-point.
fn first_stencil(u: &GridFunction, index: usize, axis: usize) -> Option<Stencil> {
    let h = u.grid().spacing();
    let i2 = 0.5 / h;
    if available(u, index, axis, &[-1, 1]) {
        Some(Stencil::new(&[-1, 1], &[-i2, i2]))
    } else if available(u, index, axis, &[1, 2]) {
        Some(Stencil::new(&[0, 1, 2], &[-3.0 * i2, 4.0 * i2, -i2]))
    } else if available(u, index, axis, &[-1, -2]) {
        Some(Stencil::new(&[0, -1, -2], &[3.0 * i2, -4.0 * i2, i2]))
    } else {
        None
    }
}

/// Second-derivative stencil: central three-point, else one-sided four-point
/// (both second order).
fn second_stencil(u: &GridFunction, index: usize, axis: usize) -> Option<Stencil> {
    let h2 = 1.0 / (u.grid().spacing() * u.grid().spacing());
    if available(u, index, axis, &[-1, 1]) {
        Some(Stencil::new(&[-1, 0, 1], &[h2, -2.0 * h2, h2]))
    } else if available(u, index, axis, &[1, 2, 3]) {
        Some(Stencil::new(
            &[0, 1, 2, 3],
            &[2.0 * h2, -5.0 * h2, 4.0 * h2, -h2],
        ))
    } else if available(u, index, axis, &[-1, -2, -3]) {
        Some(Stencil::new(
            &[0, -1, -2, -3],
            &[2.0 * h2, -5.0 * h2, 4.0 * h2, -h2],
        ))
    } else {
        None
    }
}

fn node_gradient(u: &GridFunction, index: usize) -> Option<[f64; 3]> {
    if !u.domain().get(index) {
        return None;
    }
    let grid = u.grid();
    let vals = u.values();
    let mut g = [0.0; 3];
    for (axis, slot) in g.iter_mut().enumerate().take(grid.dim()) {
        let st = first_stencil(u, index, axis)?;
        *slot = st
            .terms()
            .map(|(o, w)| w * vals[grid.neighbor(index, axis, o).unwrap()])
            .sum();
    }
    Some(g)
}

fn node_hessian(u: &GridFunction, index: usize) -> Option<SymMat> {
    if !u.domain().get(index) {
        return None;
    }
    let grid = u.grid();
    let dim = grid.dim();
    let vals = u.values();
    let mut m = SymMat::zeros(dim);
    for a in 0..dim {
        let st = second_stencil(u, index, a)?;
        let v = st
            .terms()
            .map(|(o, w)| w * vals[grid.neighbor(index, a, o).unwrap()])
            .sum();
        m.set(a, a, v);
    }
    for a in 0..dim {
        for b in (a + 1)..dim {
            // tensor product of the first-derivative stencils; the central
            // pair gives the four-point cross stencil
            let sa = first_stencil(u, index, a)?;
            let sb = first_stencil(u, index, b)?;
            let mut v = 0.0;
            for (oa, wa) in sa.terms() {
                let ja = grid.neighbor(index, a, oa)?;
                for (ob, wb) in sb.terms() {
                    let j = grid.neighbor(ja, b, ob)?;
                    if !u.domain().get(j) {
                        return None;
                    }
                    v += wa * wb * vals[j];
                }
            }
            m.set(a, b, v);
        }
    }
    Some(m)
}

/// Finite-difference gradient: central differences where both neighbours
/// exist, one-sided second-order stencils next to the domain boundary. Nodes
/// without a complete stencil are left out of the mask.
pub fn gradient(u: &GridFunction) -> VecField {
    let grid = *u.grid();
    let per_node: Vec<Option<[f64; 3]>> = exec::map_range(grid.len(), |i| node_gradient(u, i));
    let mask = Mask::from_bits(grid, per_node.iter().map(Option::is_some).collect()).unwrap();
    VecField::new(
        mask,
        per_node
            .into_iter()
            .map(|g| g.unwrap_or([0.0; 3]))
            .collect(),
    )
}

/// Finite-difference Hessian; mixed partials use the standard four-point
/// cross stencil in the interior.
pub fn hessian(u: &GridFunction) -> SymMatField {
    let grid = *u.grid();
    let per_node: Vec<Option<SymMat>> = exec::map_range(grid.len(), |i| node_hessian(u, i));
    let mask = Mask::from_bits(grid, per_node.iter().map(Option::is_some).collect()).unwrap();
    let zero = SymMat::zeros(grid.dim());
    SymMatField::new(
        mask,
        per_node.into_iter().map(|m| m.unwrap_or(zero)).collect(),
    )
}

/// Gradient magnitude below which singular factors are not evaluated:
/// `max(10 h, 1e-8)`.
pub fn grad_floor(grid: &Grid) -> f64 {
    (10.0 * grid.spacing()).max(1e-8)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `Δ_p u` in nondivergence form
/// `|Du|^{p-2} (δ_ij - (2 - p) D_i u D_j u / |Du|²) D_ij u`.
pub fn p_laplacian_at(du: &[f64], d2u: &SymMat, p: f64) -> f64 {
    let g = norm(du);
    let quad = d2u.bilinear(du, du) / (g * g);
    g.powf(p - 2.0) * (d2u.trace() - (2.0 - p) * quad)
}

/// The p-Laplacian of `u` for `p ∈ (1, 2]`, defined where both derivative
/// stencils exist and `|Du| > grad_floor`.
pub fn p_laplacian(u: &GridFunction, p: f64) -> Result<GridFunction> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::param("p", format!("must lie in (1, 2], got {p}")));
    }
    let du = gradient(u);
    let d2u = hessian(u);
    let grid = *u.grid();
    let floor = grad_floor(&grid);
    let values = exec::map_range(grid.len(), |i| match (du.get(i), d2u.get(i)) {
        (Some(_), Some(m)) if p == 2.0 => m.trace(),
        (Some(g), Some(m)) if norm(g) > floor => p_laplacian_at(g, m, p),
        _ => f64::NAN,
    });
    Ok(GridFunction::from_partial(grid, values))
}

/// Residuals of the two singular inequalities, valid on `valid`.
#[derive(Clone, Debug)]
pub struct Residuals {
    /// `|Du|^{-γ} M⁻(D²u) - |Du|^{1-γ} - f`; the inequality asks for `≤ 0`.
    pub lower: GridFunction,
    /// `|Du|^{-γ} M⁺(D²u) + |Du|^{1-γ} - f`; the inequality asks for `≥ 0`.
    pub upper: GridFunction,
    /// Interior nodes where `|Du| ≤ grad_floor`, so no value is assigned.
    pub degenerate: Mask,
}

/// Lower and upper singular operators at one node.
pub fn singular_operators(du: &[f64], d2u: &SymMat, gamma: f64, e: &Ellipticity) -> (f64, f64) {
    let g = norm(du);
    let weight = g.powf(-gamma);
    let first = g.powf(1.0 - gamma);
    (
        weight * pucci_minus(d2u, e) - first,
        weight * pucci_plus(d2u, e) + first,
    )
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::param(
            "gamma",
            format!("must lie in [0, 1), got {gamma}"),
        ));
    }
    Ok(())
}

/// Pointwise residuals of `|Du|^{-γ}M⁻(D²u) - |Du|^{1-γ} ≤ f ≤ |Du|^{-γ}M⁺(D²u) + |Du|^{1-γ}`.
///
/// Nodes where `|Du| ≤ grad_floor` are flagged degenerate and carry no value.
pub fn singular_residuals(
    u: &GridFunction,
    f: &GridFunction,
    gamma: f64,
    e: &Ellipticity,
) -> Result<Residuals> {
    check_gamma(gamma)?;
    u.grid().check_same(f.grid())?;
    let grid = *u.grid();
    let du = gradient(u);
    let d2u = hessian(u);
    let floor = grad_floor(&grid);
    let per_node: Vec<(f64, f64, bool)> = exec::map_range(grid.len(), |i| {
        let (Some(g), Some(m)) = (du.get(i), d2u.get(i)) else {
            return (f64::NAN, f64::NAN, false);
        };
        let Ok(fi) = f.get(i) else {
            return (f64::NAN, f64::NAN, false);
        };
        if norm(g) <= floor {
            return (f64::NAN, f64::NAN, true);
        }
        let (lo, hi) = singular_operators(g, m, gamma, e);
        (lo - fi, hi - fi, false)
    });
    let degenerate = Mask::from_bits(grid, per_node.iter().map(|t| t.2).collect())?;
    Ok(Residuals {
        lower: GridFunction::from_partial(grid, per_node.iter().map(|t| t.0).collect()),
        upper: GridFunction::from_partial(grid, per_node.iter().map(|t| t.1).collect()),
        degenerate,
    })
}

pub(crate) fn validate_gamma(gamma: f64) -> Result<()> {
    check_gamma(gamma)
}
