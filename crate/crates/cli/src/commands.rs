use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use w2d_core::calculus::{Ellipticity, SymMat};
use w2d_core::contact::{contact_set, contact_set_minus, contact_set_plus, Side};
use w2d_core::gf1::mask_to_field;
use w2d_core::grid::{make_grid, sample};
use w2d_core::maximal::{
    covering_lemma_check, covering_slack, maximal_function, weak11_constant, weak11_from_maximal,
};
use w2d_core::regularity::{
    decay_curve, density_check, estimate_ratio, fit_decay_exponent, fit_window, lp_sum, normalize,
    DecaySide, DensityParams,
};
use w2d_core::solutions::{p_laplace_rhs, singular_rhs, SolutionSpec};
use w2d_core::{Grid, GridFunction, Mask};

use crate::artifacts::Run;
use crate::{
    ContactArgs, CoverArgs, DecayArgs, DensityArgs, EllipticityArgs, FamilyArg, GenArgs, LpsumArgs,
    MaximalArgs, RhsSideArg, SideArg, VerifyArgs,
};

fn ellipticity(a: &EllipticityArgs) -> Result<Ellipticity> {
    Ok(Ellipticity::new(a.lambda, a.big_lambda)?)
}

fn decay_side(s: SideArg) -> DecaySide {
    match s {
        SideArg::Minus => DecaySide::Minus,
        SideArg::Plus => DecaySide::Plus,
        SideArg::Both => DecaySide::Both,
    }
}

fn padded(v: &[f64], dim: usize, what: &str) -> Result<[f64; 3]> {
    if v.len() != dim {
        bail!("--{what} needs {dim} values, got {}", v.len());
    }
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

fn spec_for(a: &GenArgs) -> Result<SolutionSpec> {
    let dim = a.dim;
    Ok(match a.family {
        FamilyArg::Constant => SolutionSpec::Constant { c: a.c },
        FamilyArg::Affine => SolutionSpec::Affine {
            c: a.c,
            b: padded(&a.b, dim, "b")?,
        },
        FamilyArg::Quadratic => {
            let m = if a.matrix.is_empty() {
                SymMat::identity(dim)
            } else {
                if a.matrix.len() != dim * dim {
                    bail!(
                        "--matrix needs {} values, got {}",
                        dim * dim,
                        a.matrix.len()
                    );
                }
                for i in 0..dim {
                    for j in 0..i {
                        if a.matrix[i * dim + j] != a.matrix[j * dim + i] {
                            bail!("--matrix must be symmetric");
                        }
                    }
                }
                SymMat::from_rows(dim, &a.matrix)
            };
            SolutionSpec::Quadratic { a: m }
        }
        FamilyArg::RadialPower => SolutionSpec::radial_power(a.beta)?,
        FamilyArg::Cone => SolutionSpec::Cone,
        FamilyArg::SmoothBump => SolutionSpec::smooth_bump(a.width)?,
        FamilyArg::Barrier => SolutionSpec::barrier(a.a)?,
        FamilyArg::Noise => unreachable!("noise has no closed form"),
    })
}

fn noise(grid: &Grid, amplitude: f64, seed: u64) -> Result<GridFunction> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        bail!("--amplitude must be positive, got {amplitude}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball = grid.unit_ball();
    let values = (0..grid.len())
        .map(|i| {
            if ball.get(i) {
                rng.gen_range(-amplitude..amplitude)
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok(GridFunction::new(ball, values)?)
}

pub fn gen(a: &GenArgs, run: &mut Run) -> Result<()> {
    let grid = make_grid(a.dim, a.n)?;
    let wants_rhs = a.rhs_p.is_some() || a.rhs_gamma.is_some();
    if wants_rhs != a.rhs_out.is_some() {
        bail!("--rhs-out goes together with --rhs-p or --rhs-gamma");
    }
    if let FamilyArg::Noise = a.family {
        if wants_rhs {
            bail!("the noise family has no right-hand side");
        }
        return run.write_field(&a.out, &noise(&grid, a.amplitude, a.seed)?);
    }
    let spec = spec_for(a)?;
    // compute everything before writing anything
    let u = sample(&spec, &grid)?;
    let rhs = if let Some(p) = a.rhs_p {
        Some(p_laplace_rhs(&spec, &grid, p)?)
    } else if let Some(gamma) = a.rhs_gamma {
        let side = match a.rhs_side {
            RhsSideArg::Minus => Side::Minus,
            RhsSideArg::Plus => Side::Plus,
        };
        Some(singular_rhs(
            &spec,
            &grid,
            gamma,
            &ellipticity(&a.ellipticity)?,
            side,
        )?)
    } else {
        None
    };
    run.write_field(&a.out, &u)?;
    if let (Some(f), Some(path)) = (rhs, &a.rhs_out) {
        run.write_field(path, &f)?;
    }
    Ok(())
}

fn read_mask(run: &mut Run, path: &Path) -> Result<Mask> {
    let field = run.read_field(path)?;
    let grid = *field.grid();
    Ok(Mask::from_fn(grid, |i| {
        field.domain().get(i) && field.values()[i] != 0.0
    }))
}

#[derive(Serialize)]
struct ContactReport {
    kappa: f64,
    side: SideArg,
    vertices: usize,
    contact_nodes: usize,
    contact_measure: f64,
    interior_measure: f64,
    complement_measure: f64,
    boundary_contacts: Option<usize>,
}

pub fn contact(a: &ContactArgs, run: &mut Run) -> Result<()> {
    let u = run.read_field(&a.input)?;
    let grid = *u.grid();
    let vertices = match &a.vertices {
        Some(p) => read_mask(run, p)?,
        None => grid.unit_ball(),
    };
    let (mask, envelope, boundary) = match a.side {
        SideArg::Both => {
            if a.envelope.is_some() {
                bail!("--envelope is only defined for one side");
            }
            (contact_set(&u, a.kappa, &vertices)?, None, None)
        }
        SideArg::Minus | SideArg::Plus => {
            let r = if let SideArg::Minus = a.side {
                contact_set_minus(&u, a.kappa, &vertices)?
            } else {
                contact_set_plus(&u, a.kappa, &vertices)?
            };
            let b = r.vertex_map.iter().filter(|v| v.boundary).count();
            (r.contact_mask, Some(r.envelope), Some(b))
        }
    };
    let open = grid.open_unit_ball();
    let report = ContactReport {
        kappa: a.kappa,
        side: a.side,
        vertices: vertices.count(),
        contact_nodes: mask.count(),
        contact_measure: mask.measure(),
        interior_measure: open.measure(),
        complement_measure: open.difference(&mask)?.measure(),
        boundary_contacts: boundary,
    };
    run.write_field(&a.out, &mask_to_field(&mask))?;
    if let (Some(path), Some(env)) = (&a.envelope, envelope) {
        run.write_field(path, &env)?;
    }
    if let Some(path) = &a.report {
        run.write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Level {
    t: f64,
    level_measure: f64,
    bound: f64,
    constant: f64,
}

#[derive(Serialize)]
struct MaximalReport {
    l1_norm: f64,
    sup_maximal: f64,
    weak11_constant: f64,
    /// `5^n`, the covering constant behind the weak (1,1) bound.
    reference_constant: f64,
    levels: Vec<Level>,
}

pub fn maximal(a: &MaximalArgs, run: &mut Run) -> Result<()> {
    let g = run.read_field(&a.input)?;
    let mg = maximal_function(&g);
    let abs = g.map(f64::abs)?;
    let levels =
        a.t.iter()
            .map(|&t| {
                let w = weak11_from_maximal(&mg, &abs, t)?;
                Ok(Level {
                    t,
                    level_measure: w.level_measure,
                    bound: w.bound,
                    constant: w.constant,
                })
            })
            .collect::<Result<Vec<_>>>()?;
    let report = MaximalReport {
        l1_norm: abs.lp_norm(1.0),
        sup_maximal: mg.sup_norm(),
        weak11_constant: weak11_constant(&mg, &abs),
        reference_constant: 5f64.powi(g.grid().dim() as i32),
        levels,
    };
    run.write_field(&a.out, &mg)?;
    if let Some(path) = &a.report {
        run.write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CoverReport {
    theta: f64,
    big_theta: f64,
    hypothesis_i_holds: bool,
    hypothesis_ii_holds: bool,
    counterexample: Option<Witness>,
    premise_balls: usize,
    balls_scanned: usize,
    measure_e: f64,
    measure_ball: f64,
    lhs: f64,
    rhs: f64,
    slack: f64,
    conclusion_holds: bool,
    conclusion_holds_with_slack: bool,
}

#[derive(Serialize)]
struct Witness {
    center: Vec<f64>,
    radius: f64,
    density_e: f64,
    density_f: f64,
}

pub fn cover(a: &CoverArgs, run: &mut Run) -> Result<()> {
    let e = read_mask(run, &a.e)?;
    let f = read_mask(run, &a.f)?;
    let grid = *e.grid();
    let r = covering_lemma_check(&e, &f, a.theta, a.big_theta)?;
    let slack = covering_slack(&grid);
    let report = CoverReport {
        theta: r.theta,
        big_theta: r.big_theta,
        hypothesis_i_holds: r.hypothesis_i_holds,
        hypothesis_ii_holds: r.hypothesis_ii_holds,
        counterexample: r.counterexample.map(|w| Witness {
            center: grid.point(w.ball.center)[..grid.dim()].to_vec(),
            radius: w.ball.radius_cells as f64 * grid.spacing(),
            density_e: w.density_e,
            density_f: w.density_f,
        }),
        premise_balls: r.premise_balls,
        balls_scanned: r.balls_scanned,
        measure_e: r.measure_e,
        measure_ball: r.measure_ball,
        lhs: r.lhs,
        rhs: r.rhs,
        slack,
        conclusion_holds: r.conclusion_holds,
        conclusion_holds_with_slack: r.lhs <= r.rhs + slack,
    };
    run.write_json(&a.report, &report)
}

#[derive(Serialize)]
struct FitReport {
    side: SideArg,
    base: f64,
    cell_measure: f64,
    ball_measure: f64,
    monotone: bool,
    window: Vec<u32>,
    sigma_emp: Option<f64>,
    fit_error: Option<String>,
}

pub fn decay(a: &DecayArgs, run: &mut Run) -> Result<()> {
    let u = run.read_field(&a.input)?;
    let curve = decay_curve(&u, a.m, a.kmax, decay_side(a.side))?;
    let mut csv = String::from("k,kappa,alpha\n");
    for e in &curve.entries {
        writeln!(csv, "{},{:?},{:?}", e.k, e.kappa, e.alpha)?;
    }
    let fit = fit_decay_exponent(&curve);
    let report = FitReport {
        side: a.side,
        base: curve.base,
        cell_measure: curve.cell_measure,
        ball_measure: curve.ball_measure,
        monotone: curve.is_monotone(),
        window: fit_window(&curve).iter().map(|e| e.k).collect(),
        sigma_emp: fit.as_ref().ok().copied(),
        fit_error: fit.err().map(|e| e.to_string()),
    };
    run.write_text(&a.out, &csv)?;
    if let Some(path) = &a.report {
        run.write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DensityReport {
    k: f64,
    m: f64,
    theta: f64,
    eps2: f64,
    gamma: f64,
    normalization: Option<f64>,
    balls_scanned: usize,
    premise_balls: usize,
    vacuous_balls: usize,
    vacuous: bool,
    min_achieved: Option<f64>,
    residual_violations: usize,
    residual_undefined: usize,
}

pub fn density(a: &DensityArgs, run: &mut Run) -> Result<()> {
    let mut u = run.read_field(&a.u)?;
    let mut f = run.read_field(&a.f)?;
    let mut normalization = None;
    if let Some(eps1) = a.normalize_eps1 {
        let n = normalize(&u, &f, a.gamma, eps1)?;
        if n.capped {
            bail!("normalization is degenerate: u and f both vanish");
        }
        normalization = Some(n.alpha);
        u = n.u;
        f = n.f;
    }
    let params = DensityParams {
        k: a.k,
        m_fac: a.m,
        theta: a.theta,
        eps2: a.eps2,
        gamma: a.gamma,
        ellipticity: ellipticity(&a.ellipticity)?,
    };
    let r = density_check(&u, &f, &params)?;
    let grid = *u.grid();
    let dim = grid.dim();
    let mut csv = String::from("center");
    for name in ["x", "y", "z"].iter().take(dim) {
        write!(csv, ",{name}")?;
    }
    csv.push_str(",radius_cells,radius,premise_density,achieved\n");
    for b in &r.balls {
        write!(csv, "{}", b.center)?;
        for c in &grid.point(b.center)[..dim] {
            write!(csv, ",{c:?}")?;
        }
        writeln!(
            csv,
            ",{},{:?},{:?},{:?}",
            b.radius_cells,
            b.radius_cells as f64 * grid.spacing(),
            b.premise_density,
            b.achieved
        )?;
    }
    if r.residual_violations > 0 {
        eprintln!(
            "warning: lower inequality fails at {} nodes; the scan premise is not met",
            r.residual_violations
        );
    }
    let report = DensityReport {
        k: a.k,
        m: a.m,
        theta: a.theta,
        eps2: a.eps2,
        gamma: a.gamma,
        normalization,
        balls_scanned: r.balls_scanned,
        premise_balls: r.balls.len(),
        vacuous_balls: r.vacuous_balls,
        vacuous: r.vacuous,
        min_achieved: r.min_achieved,
        residual_violations: r.residual_violations,
        residual_undefined: r.residual_undefined,
    };
    run.write_text(&a.out, &csv)?;
    if let Some(path) = &a.report {
        run.write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    gamma: f64,
    delta: f64,
    sup_norm: f64,
    f_ln: f64,
    w2d_direct: f64,
    w2d_contact: Option<f64>,
    ratio: Option<f64>,
    ratio_undefined: bool,
    sigma_emp: Option<f64>,
}

pub fn verify(a: &VerifyArgs, run: &mut Run) -> Result<()> {
    let u = run.read_field(&a.u)?;
    let f = run.read_field(&a.f)?;
    let r = estimate_ratio(&u, &f, a.gamma, a.delta, a.m, a.kmax)?;
    let report = VerifyReport {
        gamma: r.gamma,
        delta: r.delta,
        sup_norm: r.sup_norm,
        f_ln: r.f_ln,
        w2d_direct: r.w2d_direct,
        // an unbounded tail is reported as null
        w2d_contact: r.w2d_contact.filter(|v| v.is_finite()),
        ratio: r.ratio,
        ratio_undefined: r.ratio.is_none(),
        sigma_emp: r.sigma_emp,
    };
    run.write_json(&a.report, &report)
}

#[derive(Serialize)]
struct Term {
    k: u32,
    measure: f64,
}

#[derive(Serialize)]
struct LpsumReport {
    eta: f64,
    m: f64,
    p: f64,
    s: f64,
    lower: f64,
    upper: f64,
    constant: f64,
    omega: f64,
    /// `Σ g^p h^n`, the quadrature the bounds bracket.
    quadrature: f64,
    terms: Vec<Term>,
}

pub fn lpsum(a: &LpsumArgs, run: &mut Run) -> Result<()> {
    let g = run.read_field(&a.input)?;
    let r = lp_sum(&g, a.eta, a.m, a.p).context("lp sum")?;
    let quadrature =
        g.domain_values().map(|(_, v)| v.powf(a.p)).sum::<f64>() * g.grid().cell_measure();
    let report = LpsumReport {
        eta: a.eta,
        m: a.m,
        p: a.p,
        s: r.s,
        lower: r.lower,
        upper: r.upper,
        constant: r.constant,
        omega: r.omega,
        quadrature,
        terms: r
            .terms
            .iter()
            .map(|&(k, measure)| Term { k, measure })
            .collect(),
    };
    run.write_json(&a.out, &report)
}
