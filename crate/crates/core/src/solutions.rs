//! Manufactured solutions with closed-form derivatives and right-hand sides,
//! the barrier profile `φ(t) = e^A e^{-A t²} - 1`, and a discrete
//! viscosity sub-test based on touching paraboloids.

use crate::calculus::{
    grad_floor, p_laplacian_at, pucci_minus, pucci_plus, validate_gamma, Ellipticity, SymMat,
    SymMatField, VecField,
};
use crate::contact::{contact_set_minus, Side};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{sample, Field, Grid, GridFunction, Mask};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Constant,
    Affine,
    Quadratic,
    RadialPower,
    Cone,
    SmoothBump,
    Barrier,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Affine => "affine",
            Family::Quadratic => "quadratic",
            Family::RadialPower => "radial_power",
            Family::Cone => "cone",
            Family::SmoothBump => "smooth_bump",
            Family::Barrier => "barrier",
        }
    }
}

/// A closed-form function on `ℝ^n` with exact first and second derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionSpec {
    /// `c`.
    Constant { c: f64 },
    /// `c + b·x`.
    Affine { c: f64, b: [f64; 3] },
    /// `½ xᵀ A x`.
    Quadratic { a: SymMat },
    /// `|x|^β`, `β ∈ (1, 2]`.
    RadialPower { beta: f64 },
    /// `|x|`.
    Cone,
    /// `exp(-|x|² / w²)`.
    SmoothBump { width: f64 },
    /// `φ(|x|)` with `φ(t) = e^A e^{-A t²} - 1`, `A > 1`.
    Barrier { a: f64 },
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn radial_hessian(dim: usize, x: &[f64], radial: f64, tangential: f64) -> SymMat {
    // tangential (I - x̂x̂ᵀ) + radial x̂x̂ᵀ
    let r = norm(x);
    let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
    SymMat::scalar(dim, tangential).add(&SymMat::outer(&unit).scale(radial - tangential))
}

impl SolutionSpec {
    pub fn radial_power(beta: f64) -> Result<Self> {
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(Error::param(
                "beta",
                format!("must lie in (1, 2], got {beta}"),
            ));
        }
        Ok(SolutionSpec::RadialPower { beta })
    }

    pub fn barrier(a: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::param("A", format!("must exceed 1, got {a}")));
        }
        Ok(SolutionSpec::Barrier { a })
    }

    pub fn smooth_bump(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::param(
                "width",
                format!("must be positive, got {width}"),
            ));
        }
        Ok(SolutionSpec::SmoothBump { width })
    }

    pub fn family(&self) -> Family {
        match self {
            SolutionSpec::Constant { .. } => Family::Constant,
            SolutionSpec::Affine { .. } => Family::Affine,
            SolutionSpec::Quadratic { .. } => Family::Quadratic,
            SolutionSpec::RadialPower { .. } => Family::RadialPower,
            SolutionSpec::Cone => Family::Cone,
            SolutionSpec::SmoothBump { .. } => Family::SmoothBump,
            SolutionSpec::Barrier { .. } => Family::Barrier,
        }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        match self {
            SolutionSpec::Constant { c } => *c,
            SolutionSpec::Affine { c, b } => c + x.iter().zip(b).map(|(a, b)| a * b).sum::<f64>(),
            SolutionSpec::Quadratic { a } => 0.5 * a.bilinear(x, x),
            SolutionSpec::RadialPower { beta } => norm(x).powf(*beta),
            SolutionSpec::Cone => norm(x),
            SolutionSpec::SmoothBump { width } => (-norm(x).powi(2) / (width * width)).exp(),
            SolutionSpec::Barrier { a } => barrier_profile(*a, norm(x)),
        }
    }

    /// Exact gradient, `None` where it does not exist (the cone vertex).
    pub fn gradient_at(&self, x: &[f64]) -> Option<[f64; 3]> {
        let mut g = [0.0; 3];
        let r = norm(x);
        match self {
            SolutionSpec::Constant { .. } => {}
            SolutionSpec::Affine { b, .. } => g[..x.len()].copy_from_slice(&b[..x.len()]),
            SolutionSpec::Quadratic { a } => {
                for (i, gi) in g.iter_mut().enumerate().take(x.len()) {
                    *gi = (0..x.len()).map(|j| a.get(i, j) * x[j]).sum();
                }
            }
            SolutionSpec::RadialPower { beta } => {
                if r > 0.0 {
                    let s = beta * r.powf(beta - 2.0);
                    for (gi, xi) in g.iter_mut().zip(x) {
                        *gi = s * xi;
                    }
                }
            }
            SolutionSpec::Cone => {
                if r == 0.0 {
                    return None;
                }
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi = xi / r;
                }
            }
            SolutionSpec::SmoothBump { width } => {
                let w2 = width * width;
                let s = -2.0 / w2 * (-r * r / w2).exp();
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi = s * xi;
                }
            }
            SolutionSpec::Barrier { a } => {
                let s = -2.0 * a * (a * (1.0 - r * r)).exp();
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi = s * xi;
                }
            }
        }
        Some(g)
    }

    /// Exact Hessian, `None` at singular points (origin for the cone and for
    /// `|x|^β` with `β < 2`).
    pub fn hessian_at(&self, x: &[f64]) -> Option<SymMat> {
        let dim = x.len();
        let r = norm(x);
        Some(match self {
            SolutionSpec::Constant { .. } | SolutionSpec::Affine { .. } => SymMat::zeros(dim),
            SolutionSpec::Quadratic { a } => *a,
            SolutionSpec::RadialPower { beta } => {
                if r == 0.0 {
                    if *beta == 2.0 {
                        return Some(SymMat::scalar(dim, 2.0));
                    }
                    return None;
                }
                let t = beta * r.powf(beta - 2.0);
                radial_hessian(dim, x, t * (beta - 1.0), t)
            }
            SolutionSpec::Cone => {
                if r == 0.0 {
                    return None;
                }
                radial_hessian(dim, x, 0.0, 1.0 / r)
            }
            SolutionSpec::SmoothBump { width } => {
                let w2 = width * width;
                let e = (-r * r / w2).exp();
                let mut xv = [0.0; 3];
                xv[..dim].copy_from_slice(x);
                SymMat::scalar(dim, -2.0 * e / w2).add(&SymMat::outer(x).scale(4.0 * e / (w2 * w2)))
            }
            SolutionSpec::Barrier { a } => {
                let e = (a * (1.0 - r * r)).exp();
                SymMat::scalar(dim, -2.0 * a * e).add(&SymMat::outer(x).scale(4.0 * a * a * e))
            }
        })
    }

    /// The right-hand side that makes one of the singular inequalities an
    /// equality: `|Du|^{-γ} M⁻(D²u) - |Du|^{1-γ}` for [`Side::Minus`] and
    /// `|Du|^{-γ} M⁺(D²u) + |Du|^{1-γ}` for [`Side::Plus`].
    ///
    /// Where `Du = 0` the value is `M(D²u)` for `γ = 0`, zero when
    /// `M(D²u) = 0`, and undefined otherwise.
    pub fn singular_rhs_at(
        &self,
        x: &[f64],
        gamma: f64,
        e: &Ellipticity,
        side: Side,
    ) -> Option<f64> {
        let g = self.gradient_at(x)?;
        let m = self.hessian_at(x)?;
        let op = match side {
            Side::Minus => pucci_minus(&m, e),
            Side::Plus => pucci_plus(&m, e),
        };
        let gn = norm(&g[..x.len()]);
        let first = gn.powf(1.0 - gamma);
        let lead = if gn == 0.0 {
            if op == 0.0 || gamma == 0.0 {
                op
            } else {
                return None;
            }
        } else {
            gn.powf(-gamma) * op
        };
        Some(match side {
            Side::Minus => lead - first,
            Side::Plus => lead + first,
        })
    }

    /// `Δ_p u` from the exact derivatives; `None` where `Du = 0` and
    /// `p < 2`.
    pub fn p_laplacian_at(&self, x: &[f64], p: f64) -> Option<f64> {
        let g = self.gradient_at(x)?;
        let m = self.hessian_at(x)?;
        if p == 2.0 {
            return Some(m.trace());
        }
        let g = &g[..x.len()];
        if norm(g) == 0.0 {
            return None;
        }
        Some(p_laplacian_at(g, &m, p))
    }
}

impl Field for SolutionSpec {
    fn value(&self, x: &[f64]) -> f64 {
        self.value_at(x)
    }
}

/// Closed radial form `Δ_p |x|^s = s^{p-1} (n + (s-1)(p-1) - 1) |x|^{(s-1)(p-1)-1}`.
pub fn radial_power_p_laplacian(s: f64, p: f64, dim: usize, r: f64) -> f64 {
    s.powf(p - 1.0)
        * (dim as f64 + (s - 1.0) * (p - 1.0) - 1.0)
        * r.powf((s - 1.0) * (p - 1.0) - 1.0)
}

/// Samples a pointwise quantity, using `∞` for undefined points so that the
/// origin clamp of [`sample`] applies.
fn sample_opt(grid: &Grid, f: impl Fn(&[f64]) -> Option<f64> + Sync) -> Result<GridFunction> {
    sample(&|x: &[f64]| f(x).unwrap_or(f64::INFINITY), grid)
}

/// Exact derivative fields of `spec` on the unit-ball nodes of `grid`.
/// Nodes where a derivative does not exist are left out of the masks.
pub fn exact_derivatives(spec: &SolutionSpec, grid: &Grid) -> (VecField, SymMatField) {
    let dim = grid.dim();
    let ball = grid.unit_ball();
    let grads: Vec<Option<[f64; 3]>> = exec::map_range(grid.len(), |i| {
        ball.get(i)
            .then(|| spec.gradient_at(&grid.point(i)[..dim]))
            .flatten()
    });
    let hess: Vec<Option<SymMat>> = exec::map_range(grid.len(), |i| {
        ball.get(i)
            .then(|| spec.hessian_at(&grid.point(i)[..dim]))
            .flatten()
    });
    let gmask = Mask::from_bits(*grid, grads.iter().map(Option::is_some).collect()).unwrap();
    let hmask = Mask::from_bits(*grid, hess.iter().map(Option::is_some).collect()).unwrap();
    let zero = SymMat::zeros(dim);
    (
        VecField::new(
            gmask,
            grads.into_iter().map(|g| g.unwrap_or([0.0; 3])).collect(),
        ),
        SymMatField::new(hmask, hess.into_iter().map(|m| m.unwrap_or(zero)).collect()),
    )
}

/// `|x|^β` sampled on a grid together with its exact derivatives.
#[derive(Clone, Debug)]
pub struct RadialPowerFields {
    pub beta: f64,
    pub u: GridFunction,
    pub du: VecField,
    pub d2u: SymMatField,
    spec: SolutionSpec,
}

impl RadialPowerFields {
    /// `f = Δ_p u` in closed radial form (origin clamped to radius `h`).
    pub fn f_p_laplace(&self, p: f64) -> Result<GridFunction> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::param("p", format!("must lie in (1, 2], got {p}")));
        }
        let grid = *self.u.grid();
        let beta = self.beta;
        sample_opt(&grid, |x| {
            let r = norm(x);
            if r == 0.0 && (p < 2.0 || beta < 2.0) {
                return None;
            }
            Some(radial_power_p_laplacian(beta, p, x.len(), r))
        })
    }

    /// The singular right-hand side for one side of the inequalities.
    pub fn f_singular(&self, gamma: f64, e: &Ellipticity, side: Side) -> Result<GridFunction> {
        validate_gamma(gamma)?;
        singular_rhs(&self.spec, self.u.grid(), gamma, e, side)
    }
}

pub fn radial_power(beta: f64, grid: &Grid) -> Result<RadialPowerFields> {
    let spec = SolutionSpec::radial_power(beta)?;
    let u = sample(&spec, grid)?;
    let (du, d2u) = exact_derivatives(&spec, grid);
    Ok(RadialPowerFields {
        beta,
        u,
        du,
        d2u,
        spec,
    })
}

/// Samples [`SolutionSpec::singular_rhs_at`] on the grid, clamping a
/// singular origin to radius `h`.
pub fn singular_rhs(
    spec: &SolutionSpec,
    grid: &Grid,
    gamma: f64,
    e: &Ellipticity,
    side: Side,
) -> Result<GridFunction> {
    validate_gamma(gamma)?;
    sample_opt(grid, |x| spec.singular_rhs_at(x, gamma, e, side))
}

/// Samples `Δ_p u` from exact derivatives, clamping a singular origin.
pub fn p_laplace_rhs(spec: &SolutionSpec, grid: &Grid, p: f64) -> Result<GridFunction> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::param("p", format!("must lie in (1, 2], got {p}")));
    }
    sample_opt(grid, |x| spec.p_laplacian_at(x, p))
}

/// `φ(t) = e^A e^{-A t²} - 1`.
pub fn barrier_profile(a: f64, t: f64) -> f64 {
    (a * (1.0 - t * t)).exp() - 1.0
}

/// `φ'(t) = -2 A t e^A e^{-A t²}`.
pub fn barrier_dt(a: f64, t: f64) -> f64 {
    -2.0 * a * t * (a * (1.0 - t * t)).exp()
}

/// `φ''(t) = e^A e^{-A t²} (4 A² t² - 2 A)`.
pub fn barrier_dtt(a: f64, t: f64) -> f64 {
    (a * (1.0 - t * t)).exp() * (4.0 * a * a * t * t - 2.0 * a)
}

/// Locates the sign change of `φ''` on `(0, 1)` by bisection.
pub fn barrier_inflection(a: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(Error::param("A", format!("must exceed 1, got {a}")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if barrier_dtt(a, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Default openings for [`viscosity_subtest`].
pub const DEFAULT_KAPPAS: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Clone, Debug)]
pub struct ViscosityReport {
    /// Contact points where the touching paraboloid violates the lower
    /// inequality for some opening.
    pub violations: Mask,
    /// (vertex, contact) pairs evaluated.
    pub checked: usize,
    /// Pairs skipped because the paraboloid gradient was below the floor
    /// while `γ > 0`.
    pub skipped_degenerate: usize,
}

/// Discrete viscosity test of `|Du|^{-γ} M⁻(D²u) - |Du|^{1-γ} ≤ f`.
///
/// At every interior contact point `x₀` of `T⁻_κ` with vertex `y`, the
/// touching paraboloid has gradient `-κ(x₀ - y)` and Hessian `-κI`; the
/// inequality is evaluated on it and `x₀` is marked when the left side
/// exceeds `f(x₀) + tol`.
pub fn viscosity_subtest(
    u: &GridFunction,
    f: &GridFunction,
    gamma: f64,
    e: &Ellipticity,
    kappas: &[f64],
    tol: f64,
) -> Result<ViscosityReport> {
    validate_gamma(gamma)?;
    u.grid().check_same(f.grid())?;
    if kappas.iter().any(|&k| !(k > 0.0)) || kappas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("kappa_list", "must be positive and ascending"));
    }
    let grid = *u.grid();
    let dim = grid.dim();
    let floor = grad_floor(&grid);
    let mut violations = Mask::empty(grid);
    let mut checked = 0;
    let mut skipped = 0;
    for &kappa in kappas {
        let res = contact_set_minus(u, kappa, &grid.unit_ball())?;
        let hess = SymMat::scalar(dim, -kappa);
        let m_minus = pucci_minus(&hess, e);
        for vc in res.vertex_map.iter().filter(|vc| !vc.boundary) {
            let px = grid.point(vc.contact);
            let py = grid.point(vc.vertex);
            let grad: Vec<f64> = (0..dim).map(|k| -kappa * (px[k] - py[k])).collect();
            let gn = norm(&grad);
            if gamma > 0.0 && gn < floor {
                skipped += 1;
                continue;
            }
            checked += 1;
            let lhs = gn.powf(-gamma) * m_minus - gn.powf(1.0 - gamma);
            let fx = f.get(vc.contact)?;
            if lhs > fx + tol {
                violations.set(vc.contact, true);
            }
        }
    }
    Ok(ViscosityReport {
        violations,
        checked,
        skipped_degenerate: skipped,
    })
}

/// A catalog entry with the pairings it supports.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: SolutionSpec,
    /// Short statement of the closed-form facts used as oracles.
    pub facts: &'static str,
    /// Values of `γ` for which `singular_rhs` is admissible.
    pub gammas: Vec<f64>,
    /// Values of `p` for which the p-Laplace right-hand side is admissible.
    pub p_values: Vec<f64>,
}

/// The manufactured families used across the test suites, for dimension `dim`.
pub fn family_catalog(dim: usize) -> Vec<CatalogEntry> {
    let general = [1.0, 0.5, -0.25, 0.5, -2.0, 0.75, -0.25, 0.75, 0.5];
    let mut rows = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            rows.push(general[3 * i + j]);
        }
    }
    let all_gammas = vec![0.0, 0.3, 0.6];
    let ps = vec![1.2, 1.5, 1.8, 2.0];
    vec![
        CatalogEntry {
            name: "constant".into(),
            spec: SolutionSpec::Constant { c: 0.25 },
            facts: "Du = 0, D²u = 0",
            gammas: all_gammas.clone(),
            p_values: vec![2.0],
        },
        CatalogEntry {
            name: "affine".into(),
            spec: SolutionSpec::Affine {
                c: 0.1,
                b: [0.3, -0.2, 0.1],
            },
            facts: "Du = b, D²u = 0",
            gammas: all_gammas.clone(),
            p_values: ps.clone(),
        },
        CatalogEntry {
            name: "quadratic_identity".into(),
            spec: SolutionSpec::Quadratic {
                a: SymMat::identity(dim),
            },
            facts: "u = |x|²/2, Du = x, D²u = I",
            gammas: all_gammas.clone(),
            p_values: ps.clone(),
        },
        CatalogEntry {
            name: "quadratic_general".into(),
            spec: SolutionSpec::Quadratic {
                a: SymMat::from_rows(dim, &rows),
            },
            facts: "u = xᵀAx/2, Du = Ax, D²u = A",
            gammas: vec![0.0],
            p_values: vec![2.0],
        },
        CatalogEntry {
            name: "radial_power_1.5".into(),
            spec: SolutionSpec::RadialPower { beta: 1.5 },
            facts: "D²u eigenvalues β(β-1)|x|^{β-2} (radial), β|x|^{β-2} (tangential)",
            gammas: all_gammas.clone(),
            p_values: ps.clone(),
        },
        CatalogEntry {
            name: "radial_power_2".into(),
            spec: SolutionSpec::RadialPower { beta: 2.0 },
            facts: "u = |x|², D²u = 2I",
            gammas: all_gammas.clone(),
            p_values: ps.clone(),
        },
        CatalogEntry {
            name: "cone".into(),
            spec: SolutionSpec::Cone,
            facts: "|Du| = 1 off 0, D²u eigenvalues 0 (radial) and 1/|x|; subdifferential at 0 is the closed unit ball",
            gammas: all_gammas.clone(),
            p_values: ps.clone(),
        },
        CatalogEntry {
            name: "smooth_bump".into(),
            spec: SolutionSpec::SmoothBump { width: 0.7 },
            facts: "u = exp(-|x|²/w²), Du = -2x u/w², D²u = u(4xxᵀ/w⁴ - 2I/w²)",
            gammas: vec![0.0],
            p_values: vec![2.0],
        },
        CatalogEntry {
            name: "barrier".into(),
            spec: SolutionSpec::Barrier { a: 2.0 },
            facts: "φ(1) = 0, φ(0) = e^A - 1, inflection at (2A)^{-1/2}",
            gammas: vec![0.0],
            p_values: vec![2.0],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn parameter_ranges() {
        assert!(SolutionSpec::radial_power(1.0).is_err());
        assert!(SolutionSpec::radial_power(2.1).is_err());
        assert!(SolutionSpec::radial_power(2.0).is_ok());
        assert!(SolutionSpec::barrier(1.0).is_err());
        assert!(radial_power(0.5, &make_grid(2, 9).unwrap()).is_err());
    }

    #[test]
    fn barrier_values() {
        for a in [1.5, 2.0, 7.0] {
            assert!(barrier_profile(a, 1.0).abs() < 1e-12);
            assert!((barrier_profile(a, 0.0) - (a.exp() - 1.0)).abs() < 1e-12);
            let t = barrier_inflection(a).unwrap();
            assert!((t - (2.0 * a).powf(-0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn quadratic_p2_rhs() {
        let g = make_grid(2, 17).unwrap();
        let f = radial_power(2.0, &g).unwrap().f_p_laplace(2.0).unwrap();
        for (_, v) in f.domain_values() {
            assert_eq!(v, 4.0);
        }
    }

    #[test]
    fn p_laplace_coefficient_s2() {
        // s = 2, p = 1.5, n = 2: 2^{0.5} (2 + 0.5 - 1) r^{-0.5} = 1.5 √2 r^{-1/2}
        let v = radial_power_p_laplacian(2.0, 1.5, 2, 0.25);
        assert!((v - 1.5 * 2f64.sqrt() * 2.0).abs() < 1e-12);
        let spec = SolutionSpec::RadialPower { beta: 2.0 };
        let w = spec.p_laplacian_at(&[0.25, 0.0], 1.5).unwrap();
        assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn cone_rhs_clamped() {
        let g = make_grid(2, 33).unwrap();
        let e = Ellipticity::new(1.0, 1.0).unwrap();
        let f = singular_rhs(&SolutionSpec::Cone, &g, 0.0, &e, Side::Minus).unwrap();
        let h = g.spacing();
        assert!((f.get(g.origin_index()).unwrap() - (1.0 / h - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn catalog_has_required_entries() {
        let cat = family_catalog(2);
        assert!(cat
            .iter()
            .any(|c| c.spec == SolutionSpec::RadialPower { beta: 1.5 }));
        assert!(cat
            .iter()
            .any(|c| matches!(c.spec, SolutionSpec::Quadratic { a } if a.get(0, 1) != 0.0)));
    }
}
