//! Contact-set decay curves and the quantities built on them: power-law
//! fits, the dyadic level-set sum, two estimators of the `W^{2,δ}` norm,
//! scale normalization, estimate ratios and the ball density scan.

use crate::balls::{unit_ball_family, LinePrefix};
use crate::calculus::{gradient, hessian, singular_residuals, validate_gamma, Ellipticity};
use crate::contact::{contact_set, contact_set_minus, contact_set_plus};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{GridFunction, Mask};
use crate::maximal::maximal_function;

/// Regularizer in the normalization denominator.
pub const NORMALIZE_EPS: f64 = 1e-12;
/// Upper cap on the normalization factor when `u ≡ 0` and `f ≡ 0`.
pub const NORMALIZE_CAP: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecaySide {
    Minus,
    Plus,
    Both,
}

impl DecaySide {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecaySide::Minus => "minus",
            DecaySide::Plus => "plus",
            DecaySide::Both => "both",
        }
    }
}

impl std::str::FromStr for DecaySide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(DecaySide::Minus),
            "plus" => Ok(DecaySide::Plus),
            "both" => Ok(DecaySide::Both),
            _ => Err(Error::param(
                "side",
                format!("expected minus, plus or both, got {s:?}"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayEntry {
    pub k: u32,
    pub kappa: f64,
    pub alpha: f64,
}

/// `α_k = |B₁ ∖ T_{M^k}|` for `k = 0..=k_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCurve {
    pub base: f64,
    pub side: DecaySide,
    pub entries: Vec<DecayEntry>,
    /// `h^n` of the grid the curve was measured on.
    pub cell_measure: f64,
    /// Measure of the reference ball.
    pub ball_measure: f64,
}

impl DecayCurve {
    /// Builds a curve from given values `α_0, α_1, …`.
    pub fn from_alphas(
        base: f64,
        side: DecaySide,
        alphas: &[f64],
        cell_measure: f64,
        ball_measure: f64,
    ) -> Result<Self> {
        check_base(base)?;
        let entries = alphas
            .iter()
            .enumerate()
            .map(|(k, &alpha)| DecayEntry {
                k: k as u32,
                kappa: base.powi(k as i32),
                alpha,
            })
            .collect();
        Ok(DecayCurve {
            base,
            side,
            entries,
            cell_measure,
            ball_measure,
        })
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.alpha).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].alpha <= w[0].alpha)
    }
}

fn check_base(m: f64) -> Result<()> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::param("M", format!("must exceed 1, got {m}")));
    }
    Ok(())
}

fn contact_mask(u: &GridFunction, kappa: f64, side: DecaySide) -> Result<Mask> {
    let v = u.grid().unit_ball();
    match side {
        DecaySide::Minus => Ok(contact_set_minus(u, kappa, &v)?.contact_mask),
        DecaySide::Plus => Ok(contact_set_plus(u, kappa, &v)?.contact_mask),
        DecaySide::Both => contact_set(u, kappa, &v),
    }
}

/// Measures the complement of the contact set inside the open unit ball at
/// openings `M^0, …, M^{k_max}`.
pub fn decay_curve(
    u: &GridFunction,
    m_fac: f64,
    k_max: u32,
    side: DecaySide,
) -> Result<DecayCurve> {
    check_base(m_fac)?;
    if k_max < 3 {
        return Err(Error::param(
            "kmax",
            format!("must be at least 3, got {k_max}"),
        ));
    }
    let grid = *u.grid();
    let open = grid.open_unit_ball();
    let mut entries = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let kappa = m_fac.powi(k as i32);
        let t = contact_mask(u, kappa, side)?;
        let alpha = open.difference(&t)?.measure();
        entries.push(DecayEntry { k, kappa, alpha });
    }
    Ok(DecayCurve {
        base: m_fac,
        side,
        entries,
        cell_measure: grid.cell_measure(),
        ball_measure: open.measure(),
    })
}

/// Entries inside the fit window `10 h^n < α < |B₁| / 2`.
pub fn fit_window(curve: &DecayCurve) -> Vec<DecayEntry> {
    let lo = 10.0 * curve.cell_measure;
    let hi = 0.5 * curve.ball_measure;
    curve
        .entries
        .iter()
        .copied()
        .filter(|e| e.alpha > lo && e.alpha < hi)
        .collect()
}

/// Negated least-squares slope of `ln α` against `ln κ` over the fit window.
pub fn fit_decay_exponent(curve: &DecayCurve) -> Result<f64> {
    let pts = fit_window(curve);
    if pts.len() < 3 {
        return Err(Error::InsufficientDecayData { usable: pts.len() });
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|e| e.kappa.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|e| e.alpha.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}

/// Result of the dyadic level-set sum.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSum {
    /// `s = Σ_{k≥1} M^{pk} |{g > η M^k}|`.
    pub s: f64,
    /// `s / C`.
    pub lower: f64,
    /// `C (s + |Ω|)`.
    pub upper: f64,
    pub constant: f64,
    /// `|Ω|`, the measure of the domain of `g`.
    pub omega: f64,
    /// `(k, |{g > η M^k}|)` for every non-empty level set.
    pub terms: Vec<(u32, f64)>,
}

/// Bracketing constant for the dyadic sum.
///
/// With `‖g‖_p^p = ∫_0^∞ p t^{p-1} |{g > t}| dt` split at `t = η M^k`:
/// the bands `[η M^{k-1}, η M^k]`, `k ≥ 1`, give
/// `‖g‖_p^p ≥ η^p (1 - M^{-p}) s`, and bounding `[0, η M]` by `(ηM)^p |Ω|`
/// and `[η M^k, η M^{k+1}]` by `η^p (M^p - 1) M^{pk} |{g > η M^k}|` gives
/// `‖g‖_p^p ≤ (ηM)^p (s + |Ω|)`. The constant is the larger of
/// `(ηM)^p` and `1 / (η^p (1 - M^{-p}))`.
pub fn lp_sum_constant(eta: f64, m_fac: f64, p: f64) -> f64 {
    (eta * m_fac)
        .powf(p)
        .max(1.0 / (eta.powf(p) * (1.0 - m_fac.powf(-p))))
}

/// Dyadic level-set sum of `g ≥ 0` with strict level sets `{g > η M^k}`,
/// truncated at the first empty level set.
pub fn lp_sum(g: &GridFunction, eta: f64, m_fac: f64, p: f64) -> Result<LpSum> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param("eta", format!("must be positive, got {eta}")));
    }
    check_base(m_fac)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param("p", format!("must be positive, got {p}")));
    }
    if g.domain_values().any(|(_, v)| v < 0.0) {
        return Err(Error::param("g", "must be nonnegative"));
    }
    let cell = g.grid().cell_measure();
    let vals: Vec<f64> = g.domain_values().map(|(_, v)| v).collect();
    let mut s = 0.0;
    let mut terms = Vec::new();
    for k in 1u32.. {
        let level = eta * m_fac.powi(k as i32);
        let count = vals.iter().filter(|&&v| v > level).count();
        if count == 0 || !level.is_finite() {
            break;
        }
        let meas = count as f64 * cell;
        s += m_fac.powf(p * k as f64) * meas;
        terms.push((k, meas));
    }
    let constant = lp_sum_constant(eta, m_fac, p);
    let omega = g.domain().measure();
    Ok(LpSum {
        s,
        lower: s / constant,
        upper: constant * (s + omega),
        constant,
        omega,
        terms,
    })
}

/// Direct quadrature `(Σ (|u|^δ + |Du|^δ + |D²u|_F^δ) h^n)^{1/δ}` over the
/// interior nodes where the Hessian stencil is defined.
pub fn w2delta_norm_direct(u: &GridFunction, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (lower, hess) = w2delta_parts(u, delta);
    Ok((lower + hess).powf(1.0 / delta))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(
            "delta",
            format!("must be positive, got {delta}"),
        ));
    }
    Ok(())
}

/// `(Σ (|u|^δ + |Du|^δ) h^n, Σ |D²u|_F^δ h^n)` over the interior nodes.
fn w2delta_parts(u: &GridFunction, delta: f64) -> (f64, f64) {
    let grid = *u.grid();
    let du = gradient(u);
    let d2u = hessian(u);
    let open = grid.open_unit_ball();
    let nodes: Vec<usize> = open.ones().filter(|&i| d2u.mask().get(i)).collect();
    let parts: Vec<(f64, f64)> = exec::map_slice(&nodes, |&i| {
        let lo = u.values()[i].abs().powf(delta) + du.norm(i).unwrap_or(0.0).powf(delta);
        let hi = d2u.get(i).map(|m| m.frobenius().powf(delta)).unwrap_or(0.0);
        (lo, hi)
    });
    let cell = grid.cell_measure();
    let lower: f64 = parts.iter().map(|p| p.0).sum::<f64>() * cell;
    let hess: f64 = parts.iter().map(|p| p.1).sum::<f64>() * cell;
    (lower, hess)
}

/// How the contact-based estimate treats openings beyond `k_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// The curve reached zero; no tail.
    Closed,
    /// Geometric extrapolation with fitted exponent `σ > δ`.
    Fitted { sigma: f64 },
    /// The fit failed; extrapolated from the last two positive entries.
    LastRatio { ratio: f64 },
    /// Decay too slow for a finite bound.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactNorm {
    /// Contact-based estimate of `‖u‖_{W^{2,δ}}`; infinite when the tail is
    /// unbounded.
    pub value: f64,
    /// Hessian part `∫|D²u|^δ` bounded through the decay curve.
    pub hessian_term: f64,
    /// `∫(|u|^δ + |Du|^δ)` from direct quadrature.
    pub lower_order: f64,
    pub tail: Tail,
    /// Two-sided curve at openings `M^0 … M^{k_max}`.
    pub curve: DecayCurve,
    /// `(κ, α)` at the sub-unit openings `M^{-k_max} … M^{-1}`.
    pub sub_unit: Vec<(f64, f64)>,
}

/// Estimate of `‖u‖_{W^{2,δ}}` from the two-sided decay curve.
///
/// Inside `T_t` the Hessian is bounded by `√n t`, so
/// `|{|D²u| > √n t}| ≤ |B₁ ∖ T_t|`. With openings `t_j = M^j`,
/// `j = -k_max, …, k_max`, the layer-cake integral of `|D²u|^δ` is bounded
/// band by band:
/// `(√n)^δ (t_{-k_max}^δ |Ω| + Σ_j (t_{j+1}^δ - t_j^δ) α_j)`,
/// with the tail beyond `k_max` extrapolated geometrically.
pub fn w2delta_norm_contact(
    u: &GridFunction,
    delta: f64,
    m_fac: f64,
    k_max: u32,
) -> Result<ContactNorm> {
    check_delta(delta)?;
    let curve = decay_curve(u, m_fac, k_max, DecaySide::Both)?;
    let (lower_order, _) = w2delta_parts(u, delta);
    if u.is_zero() {
        return Ok(ContactNorm {
            value: 0.0,
            hessian_term: 0.0,
            lower_order,
            tail: Tail::Closed,
            curve,
            sub_unit: Vec::new(),
        });
    }
    let open = u.grid().open_unit_ball();
    let mut sub_unit = Vec::with_capacity(k_max as usize);
    for j in (1..=k_max as i32).rev() {
        let kappa = m_fac.powi(-j);
        let t = contact_mask(u, kappa, DecaySide::Both)?;
        sub_unit.push((kappa, open.difference(&t)?.measure()));
    }
    let dim = u.grid().dim() as f64;
    let md = m_fac.powf(delta);
    let omega = curve.ball_measure;
    let mut band = m_fac.powf(-delta * k_max as f64) * omega;
    for &(kappa, alpha) in &sub_unit {
        band += (md - 1.0) * kappa.powf(delta) * alpha;
    }
    for e in &curve.entries {
        band += (md - 1.0) * md.powi(e.k as i32) * e.alpha;
    }
    let last = *curve.entries.last().unwrap();
    let tail = if last.alpha == 0.0 {
        Tail::Closed
    } else {
        match fit_decay_exponent(&curve) {
            Ok(sigma) if sigma > delta => Tail::Fitted { sigma },
            Ok(_) => Tail::Unbounded,
            Err(_) => {
                let prev = curve.entries[curve.entries.len() - 2].alpha;
                let ratio = last.alpha / prev;
                if prev > 0.0 && ratio * md < 1.0 {
                    Tail::LastRatio { ratio }
                } else {
                    Tail::Unbounded
                }
            }
        }
    };
    let q = match tail {
        Tail::Closed => 0.0,
        Tail::Fitted { sigma } => m_fac.powf(-sigma) * md,
        Tail::LastRatio { ratio } => ratio * md,
        Tail::Unbounded => f64::INFINITY,
    };
    if q > 0.0 && q.is_finite() {
        // Σ_{j≥1} (M^δ - 1) M^{δ(k_max + j)} α_{k_max} μ^j
        band += (md - 1.0) * md.powi(last.k as i32) * last.alpha * q / (1.0 - q);
    }
    let hessian_term = if tail == Tail::Unbounded {
        f64::INFINITY
    } else {
        dim.sqrt().powf(delta) * band
    };
    Ok(ContactNorm {
        value: (lower_order + hessian_term).powf(1.0 / delta),
        hessian_term,
        lower_order,
        tail,
        curve,
        sub_unit,
    })
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub u: GridFunction,
    pub f: GridFunction,
    pub alpha: f64,
    /// The factor hit [`NORMALIZE_CAP`] because `u ≡ 0` and `f ≡ 0`.
    pub capped: bool,
}

/// Rescales `(u, f) → (αu, α^{1-γ} f)` with
/// `α = (16‖u‖_∞ + (‖f‖_{L^n} / ε₁)^{1/(1-γ)} + ε)^{-1}`, so that
/// `‖ũ‖_∞ ≤ 1/16` and `‖f̃‖_{L^n} ≤ ε₁`.
pub fn normalize(u: &GridFunction, f: &GridFunction, gamma: f64, eps1: f64) -> Result<Normalized> {
    validate_gamma(gamma)?;
    u.grid().check_same(f.grid())?;
    if !(eps1 > 0.0 && eps1.is_finite()) {
        return Err(Error::param(
            "eps1",
            format!("must be positive, got {eps1}"),
        ));
    }
    let n = u.grid().dim() as f64;
    let denom =
        16.0 * u.sup_norm() + (f.lp_norm(n) / eps1).powf(1.0 / (1.0 - gamma)) + NORMALIZE_EPS;
    let mut alpha = 1.0 / denom;
    let capped = alpha >= NORMALIZE_CAP;
    if capped {
        alpha = NORMALIZE_CAP;
    }
    Ok(Normalized {
        u: u.scale(alpha),
        f: f.scale(alpha.powf(1.0 - gamma)),
        alpha,
        capped,
    })
}

#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub gamma: f64,
    pub delta: f64,
    pub sup_norm: f64,
    pub f_ln: f64,
    pub w2d_direct: f64,
    /// `None` when the contact route failed.
    pub w2d_contact: Option<f64>,
    /// `w2d_direct / (‖u‖_∞ + ‖f‖_{L^n}^{1/(1-γ)})`, `None` for a zero
    /// denominator.
    pub ratio: Option<f64>,
    /// Fitted decay exponent of the two-sided curve, when the fit window
    /// holds enough entries.
    pub sigma_emp: Option<f64>,
}

/// Ratio of the `W^{2,δ}` norm to the right side of the interior estimate.
pub fn estimate_ratio(
    u: &GridFunction,
    f: &GridFunction,
    gamma: f64,
    delta: f64,
    m_fac: f64,
    k_max: u32,
) -> Result<EstimateReport> {
    validate_gamma(gamma)?;
    check_delta(delta)?;
    u.grid().check_same(f.grid())?;
    let n = u.grid().dim() as f64;
    let sup_norm = u.sup_norm();
    let f_ln = f.lp_norm(n);
    let w2d_direct = w2delta_norm_direct(u, delta)?;
    let contact = w2delta_norm_contact(u, delta, m_fac, k_max)?;
    let denom = sup_norm + f_ln.powf(1.0 / (1.0 - gamma));
    Ok(EstimateReport {
        gamma,
        delta,
        sup_norm,
        f_ln,
        w2d_direct,
        w2d_contact: Some(contact.value),
        ratio: (denom > 0.0).then(|| w2d_direct / denom),
        sigma_emp: fit_decay_exponent(&contact.curve).ok(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct DensityParams {
    pub k: f64,
    pub m_fac: f64,
    pub theta: f64,
    pub eps2: f64,
    pub gamma: f64,
    pub ellipticity: Ellipticity,
}

/// One ball of the scan family whose premise holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityBall {
    pub center: usize,
    pub radius_cells: usize,
    /// `|B ∩ T⁻_K ∩ G| / |B|`.
    pub premise_density: f64,
    /// `|B ∩ T⁻_{KM}| / |B|`.
    pub achieved: f64,
}

#[derive(Clone, Debug)]
pub struct DensityReport {
    pub balls: Vec<DensityBall>,
    pub balls_scanned: usize,
    /// Balls where the premise fails.
    pub vacuous_balls: usize,
    /// No ball satisfies the premise.
    pub vacuous: bool,
    /// Minimum achieved density over premise-satisfying balls.
    pub min_achieved: Option<f64>,
    /// Nodes where the lower inequality is violated by more than the
    /// tolerance, among nodes where it is defined.
    pub residual_violations: usize,
    /// Nodes where the residual is undefined.
    pub residual_undefined: usize,
}

/// Tolerance for the lower-inequality precondition check, relative to
/// `1 + |f|`.
pub const DENSITY_RESIDUAL_TOL: f64 = 1e-6;

/// Scans node-centred balls `B ⊂ B₁`. For each ball with
/// `|B ∩ T⁻_K ∩ {M(|f|^n) ≤ ε₂ K^{(1-γ)n}}| ≥ θ|B|` records the density of
/// `T⁻_{KM}` in `B`. Measures are lattice counts.
pub fn density_check(
    u: &GridFunction,
    f: &GridFunction,
    params: &DensityParams,
) -> Result<DensityReport> {
    let DensityParams {
        k,
        m_fac,
        theta,
        eps2,
        gamma,
        ellipticity,
    } = *params;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param(
            "theta",
            format!("must lie in (0, 1), got {theta}"),
        ));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param("K", format!("must be at least 1, got {k}")));
    }
    check_base(m_fac)?;
    if !(eps2 > 0.0) {
        return Err(Error::param(
            "eps2",
            format!("must be positive, got {eps2}"),
        ));
    }
    validate_gamma(gamma)?;
    let grid = *u.grid();
    grid.check_same(f.grid())?;

    let res = singular_residuals(u, f, gamma, &ellipticity)?;
    let mut residual_violations = 0;
    let mut residual_undefined = 0;
    for i in grid.open_unit_ball().ones() {
        match res.lower.values()[i] {
            r if r.is_nan() => residual_undefined += 1,
            r => {
                let fx = f.values()[i];
                if r > DENSITY_RESIDUAL_TOL * (1.0 + fx.abs()) {
                    residual_violations += 1;
                }
            }
        }
    }

    let ball = grid.unit_ball();
    let t_k = contact_set_minus(u, k, &ball)?.contact_mask;
    let t_km = contact_set_minus(u, k * m_fac, &ball)?.contact_mask;
    let n = grid.dim() as i32;
    let fn_pow = f.map(|v| v.abs().powi(n))?;
    let mf = maximal_function(&fn_pow);
    let level = eps2 * k.powf((1.0 - gamma) * n as f64);
    let good = Mask::from_fn(grid, |i| ball.get(i) && mf.values()[i] <= level);
    let e = t_k.intersection(&good)?;
    let pre_e = LinePrefix::from_mask(&e);
    let pre_t = LinePrefix::from_mask(&t_km);

    let family = unit_ball_family(&grid);
    let per_radius: Vec<(Vec<DensityBall>, usize)> = exec::map_slice(&family, |(lb, centers)| {
        let count = lb.count() as f64;
        let mut hits = Vec::new();
        for &c in centers {
            let dens = pre_e.ball_sum(c, lb) / count;
            if dens >= theta {
                hits.push(DensityBall {
                    center: c,
                    radius_cells: lb.radius_cells(),
                    premise_density: dens,
                    achieved: pre_t.ball_sum(c, lb) / count,
                });
            }
        }
        (hits, centers.len())
    });
    let balls_scanned: usize = per_radius.iter().map(|p| p.1).sum();
    let balls: Vec<DensityBall> = per_radius.into_iter().flat_map(|p| p.0).collect();
    let min_achieved = balls.iter().map(|b| b.achieved).reduce(f64::min);
    Ok(DensityReport {
        vacuous_balls: balls_scanned - balls.len(),
        vacuous: balls.is_empty(),
        balls,
        balls_scanned,
        min_achieved,
        residual_violations,
        residual_undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};

    #[test]
    fn synthetic_power_law() {
        let alphas: Vec<f64> = (0..12).map(|k| 2f64.powi(k).powi(-3)).collect();
        let c = DecayCurve::from_alphas(2.0, DecaySide::Both, &alphas, 1e-12, 3.0).unwrap();
        assert!((fit_decay_exponent(&c).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        let c = DecayCurve::from_alphas(2.0, DecaySide::Both, &[1.0, 0.0, 0.0, 0.0], 1e-3, 3.0)
            .unwrap();
        assert!(matches!(
            fit_decay_exponent(&c),
            Err(Error::InsufficientDecayData { .. })
        ));
    }

    #[test]
    fn zero_curve() {
        let g = make_grid(2, 33).unwrap();
        let u = GridFunction::constant(g, 0.0);
        for side in [DecaySide::Minus, DecaySide::Plus, DecaySide::Both] {
            let c = decay_curve(&u, 2.0, 4, side).unwrap();
            assert!(c.alphas().iter().all(|&a| a == 0.0));
        }
        assert!(decay_curve(&u, 1.0, 4, DecaySide::Both).is_err());
        assert!(decay_curve(&u, 2.0, 2, DecaySide::Both).is_err());
    }

    #[test]
    fn lp_sum_strict_levels() {
        let g = make_grid(2, 17).unwrap();
        let s = lp_sum(&GridFunction::constant(g, 0.0), 1.0, 2.0, 1.0).unwrap();
        assert_eq!(s.s, 0.0);
        let s = lp_sum(&GridFunction::constant(g, 3.0), 1.5, 2.0, 1.0).unwrap();
        assert_eq!(s.s, 0.0);
        assert!(lp_sum(&GridFunction::constant(g, -1.0), 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn normalize_unit_sup() {
        let g = make_grid(2, 17).unwrap();
        let u = sample(&|x: &[f64]| x[0], &g).unwrap();
        let f = GridFunction::constant(g, 0.0);
        let nrm = normalize(&u, &f, 0.0, 0.1).unwrap();
        assert!((nrm.alpha - 1.0 / (16.0 + NORMALIZE_EPS)).abs() < 1e-15);
        assert!(nrm.u.sup_norm() <= 1.0 / 16.0);
        let z = normalize(&f, &f, 0.0, 0.1).unwrap();
        assert!(z.capped);
        assert_eq!(z.alpha, NORMALIZE_CAP);
    }

    #[test]
    fn direct_norm_constant() {
        let g = make_grid(2, 33).unwrap();
        let u = GridFunction::constant(g, 2.0);
        let v = w2delta_norm_direct(&u, 1.0).unwrap();
        let open = g.open_unit_ball().measure();
        assert!(v > 0.0 && v <= 2.0 * open + 1e-12);
        assert_eq!(
            w2delta_norm_direct(&GridFunction::constant(g, 0.0), 0.5).unwrap(),
            0.0
        );
    }
}
