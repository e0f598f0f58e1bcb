use std::sync::Mutex;

use super::cases::{ManufacturedCase, TimeFactor};
use crate::basis::{gauss_rule, legendre_table, Mesh1D};
use crate::error::{Error, Result};
use crate::kernels::{
    caputo_l1_apply, riesz_apply_to_polynomial, DistributedRule, FractionalOrder, PiecewisePolynomial, RieszEvaluator,
    TimeGrid,
};
use crate::ldg::{Convection, Diffusion, SourceTerm};

/// Which time-fractional operator the source term is built against.
///
/// The continuous choice gives the true forcing; the discrete ones make the
/// exact solution satisfy part of the discretization exactly, isolating one
/// error contribution in a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMode {
    /// `∫ W(α) ∂_t^α T dα` (or `∂_t^α T` for a single order).
    Exact,
    /// `Σ_j W(α_j)Δπ_j ∂_t^{α_j} T`: only the L1 time error remains.
    MidpointExact,
    /// `∫ W(α) δ_t^α T(t_n) dα`: only the order-quadrature error remains.
    L1Exact,
    /// `Σ_j W(α_j)Δπ_j δ_t^{α_j} T(t_n)`: only the spatial error remains.
    FullyDiscrete,
}

impl TimeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TimeMode::Exact => "exact",
            TimeMode::MidpointExact => "midpoint",
            TimeMode::L1Exact => "l1",
            TimeMode::FullyDiscrete => "discrete",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(TimeMode::Exact),
            "midpoint" => Ok(TimeMode::MidpointExact),
            "l1" => Ok(TimeMode::L1Exact),
            "discrete" => Ok(TimeMode::FullyDiscrete),
            other => Err(Error::domain(format!(
                "unknown source time mode '{other}' (expected exact, midpoint, l1 or discrete)"
            ))),
        }
    }

    fn needs_grid(&self) -> bool {
        matches!(self, TimeMode::L1Exact | TimeMode::FullyDiscrete)
    }
}

/// Time-fractional coefficient of the `X` term.
#[derive(Debug, Clone)]
enum CaputoFactor {
    Continuous(FractionalOrder),
    Midpoint { alphas: Vec<f64>, masses: Vec<f64> },
    Tabulated { grid: TimeGrid, values: Vec<f64> },
}

#[derive(Debug, Clone)]
enum Space {
    Poly(PiecewisePolynomial),
    Riesz { eval: RieszEvaluator, scale: f64 },
}

impl Space {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Space::Poly(p) => p.eval(x),
            Space::Riesz { eval, scale } => scale * eval.eval(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TimeCoef {
    Caputo,
    /// `T(t)^p`
    Power(u32),
}

#[derive(Debug, Clone)]
struct Term {
    time: TimeCoef,
    space: Space,
}

struct LoadCache {
    mesh: Mesh1D,
    order: usize,
    loads: Vec<Vec<f64>>,
}

/// Forcing `g = 𝔇_t V + F(V)_x − (S(V)V_x)_x − b·d/dx 𝓛 V_x` of a manufactured
/// case, stored as a sum of (time coefficient) × (spatial function) terms.
pub struct ManufacturedSource {
    time: TimeFactor,
    caputo: CaputoFactor,
    terms: Vec<Term>,
    breaks: Vec<f64>,
    mode: TimeMode,
    cache: Mutex<Option<LoadCache>>,
}

impl std::fmt::Debug for ManufacturedSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedSource")
            .field("time", &self.time)
            .field("mode", &self.mode)
            .field("terms", &self.terms.len())
            .finish_non_exhaustive()
    }
}

const SMOOTH_TOL: f64 = 1e-12;

/// Jumps of `f` at interior breaks and at support ends strictly inside `domain`.
fn worst_jump(f: &PiecewisePolynomial, domain: (f64, f64)) -> Option<(f64, f64)> {
    let jumps = f.jumps();
    let last = jumps.len() - 1;
    let scale = f.pieces().iter().flat_map(|p| p.coeffs().iter()).fold(1.0f64, |m, c| m.max(c.abs()));
    f.breaks()
        .iter()
        .zip(&jumps)
        .enumerate()
        .filter(|&(i, (&x, _))| (i != 0 && i != last) || (x > domain.0 && x < domain.1))
        .map(|(_, (&x, &j))| (x, j))
        .filter(|&(_, j)| j.abs() > SMOOTH_TOL * scale)
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
}

/// Derives the forcing term that makes `case` an exact solution for spatial
/// order `beta` and time operator `order`, evaluated according to `mode`.
/// Discrete modes need the time grid of the run.
pub fn derive_source(
    case: &ManufacturedCase,
    beta: f64,
    order: &FractionalOrder,
    mode: TimeMode,
    grid: Option<TimeGrid>,
) -> Result<ManufacturedSource> {
    let x = &case.profile;
    let (sa, sb) = x.support();
    if sa < case.domain.0 || sb > case.domain.1 {
        return Err(Error::domain(format!(
            "profile support [{sa}, {sb}] exceeds the domain [{}, {}]",
            case.domain.0, case.domain.1
        )));
    }
    let dx = x.derivative();
    let ddx = dx.derivative();
    let active_conv = !matches!(case.convection, Convection::None);
    if active_conv {
        if let Some((at, j)) = worst_jump(x, case.domain) {
            return Err(Error::domain(format!("convection term: V jumps by {j:.3e} at x = {at}")));
        }
    }
    if case.diffusion.is_active() {
        if let Some((at, j)) = worst_jump(&dx, case.domain) {
            return Err(Error::domain(format!("diffusion term: V' jumps by {j:.3e} at x = {at}")));
        }
    }

    let mut terms = vec![Term { time: TimeCoef::Caputo, space: Space::Poly(x.clone()) }];
    let poly = |p: u32, f: PiecewisePolynomial| Term { time: TimeCoef::Power(p), space: Space::Poly(f) };
    match case.convection {
        Convection::None => {}
        Convection::Linear { speed } => terms.push(poly(1, dx.scale(speed))),
        Convection::Burgers => terms.push(poly(2, x.mul(&dx)?)),
        Convection::QuarticPlusLinear => {
            terms.push(poly(4, x.mul(x)?.mul(x)?.mul(&dx)?.scale(2.0)));
            terms.push(poly(1, dx.clone()));
        }
    }
    match case.diffusion {
        Diffusion::None => {}
        Diffusion::Constant(c) => {
            if c != 0.0 {
                terms.push(poly(1, ddx.scale(-c)));
            }
        }
        Diffusion::Quadratic => {
            // (V²V_x)_x = T³(2X X'² + X² X'')
            let a = x.mul(&dx)?.mul(&dx)?.scale(2.0);
            let b = x.mul(x)?.mul(&ddx)?;
            let sum = PiecewisePolynomial::new(
                a.breaks().to_vec(),
                a.pieces().iter().zip(b.pieces()).map(|(p, q)| add(p, q).scale(-1.0)).collect(),
            )?;
            terms.push(poly(3, sum));
        }
    }
    let b = case.b(beta);
    if b > 0.0 {
        // a jump inside the domain would put a delta into V_x
        if let Some((at, j)) = worst_jump(x, case.domain) {
            return Err(Error::domain(format!("riesz term: V jumps by {j:.3e} at x = {at}")));
        }
        let eval = riesz_apply_to_polynomial(x, beta)?;
        terms.push(Term { time: TimeCoef::Power(1), space: Space::Riesz { eval, scale: -b } });
    }

    if mode.needs_grid() && grid.is_none() {
        return Err(Error::domain(format!("source mode '{}' needs the time grid", mode.as_str())));
    }
    let caputo = caputo_factor(case.time, order, mode, grid)?;
    let src = ManufacturedSource {
        time: case.time,
        caputo,
        terms,
        breaks: x.breaks().to_vec(),
        mode,
        cache: Mutex::new(None),
    };
    let probe = src.time_coefficient(TimeCoef::Caputo, case.t_final, grid.map_or(0, |g| g.num_steps()));
    if !probe.is_finite() {
        return Err(Error::domain("time-fractional source coefficient is not finite"));
    }
    Ok(src)
}

fn add(p: &crate::kernels::Polynomial, q: &crate::kernels::Polynomial) -> crate::kernels::Polynomial {
    let n = p.coeffs().len().max(q.coeffs().len());
    let c =
        (0..n).map(|i| p.coeffs().get(i).copied().unwrap_or(0.0) + q.coeffs().get(i).copied().unwrap_or(0.0)).collect();
    crate::kernels::Polynomial::new(c)
}

const ALPHA_TOL: f64 = 1e-13;

fn caputo_factor(
    time: TimeFactor,
    order: &FractionalOrder,
    mode: TimeMode,
    grid: Option<TimeGrid>,
) -> Result<CaputoFactor> {
    match mode {
        TimeMode::Exact => Ok(CaputoFactor::Continuous(order.clone())),
        TimeMode::MidpointExact => {
            // masses do not depend on the step size
            let rule = DistributedRule::from_order(order, 1.0, 1)?;
            Ok(CaputoFactor::Midpoint { alphas: rule.alphas().to_vec(), masses: rule.masses().to_vec() })
        }
        TimeMode::L1Exact | TimeMode::FullyDiscrete => {
            let grid = grid.expect("checked by caller");
            let m = grid.num_steps();
            let dt = grid.dt();
            let samples: Vec<f64> = (0..=m).map(|j| time.value(grid.t(j))).collect();
            let mut values = vec![0.0; m + 1];
            if mode == TimeMode::FullyDiscrete {
                let rule = DistributedRule::from_order(order, dt, m)?;
                for n in 1..=m {
                    values[n] = rule.apply(&samples[..=n])?;
                }
            } else {
                for n in 1..=m {
                    let y = &samples[..=n];
                    values[n] = match order {
                        FractionalOrder::Single(alpha) => caputo_l1_apply(y, *alpha, dt)?,
                        FractionalOrder::Distributed { density, .. } => {
                            density.integrate(|a| caputo_l1_apply(y, a, dt).unwrap_or(f64::NAN), ALPHA_TOL)?
                        }
                    };
                }
            }
            Ok(CaputoFactor::Tabulated { grid, values })
        }
    }
}

impl ManufacturedSource {
    pub fn mode(&self) -> TimeMode {
        self.mode
    }

    /// Coefficient multiplying the profile `X` in the time-fractional term.
    pub fn caputo_coefficient(&self, t: f64, step: usize) -> f64 {
        self.time_coefficient(TimeCoef::Caputo, t, step)
    }

    fn time_coefficient(&self, c: TimeCoef, t: f64, step: usize) -> f64 {
        match c {
            TimeCoef::Power(p) => self.time.value(t).powi(p as i32),
            TimeCoef::Caputo => match &self.caputo {
                CaputoFactor::Continuous(FractionalOrder::Single(alpha)) => {
                    self.time.caputo(*alpha, t).unwrap_or(f64::NAN)
                }
                CaputoFactor::Continuous(FractionalOrder::Distributed { density, .. }) => {
                    density.integrate(|a| self.time.caputo(a, t).unwrap_or(f64::NAN), ALPHA_TOL).unwrap_or(f64::NAN)
                }
                CaputoFactor::Midpoint { alphas, masses } => {
                    alphas.iter().zip(masses).map(|(&a, &m)| m * self.time.caputo(a, t).unwrap_or(f64::NAN)).sum()
                }
                CaputoFactor::Tabulated { grid, values } => {
                    let last = grid.num_steps();
                    let n = if step <= last && (grid.t(step) - t).abs() <= 1e-9 * grid.t_final() {
                        step
                    } else {
                        ((t / grid.dt()).round().max(0.0) as usize).min(last)
                    };
                    values[n]
                }
            },
        }
    }

    fn term_loads(&self, mesh: &Mesh1D, order: usize) -> Result<Vec<Vec<f64>>> {
        self.terms.iter().map(|term| project_term(&term.space, &self.breaks, mesh, order)).collect()
    }
}

/// `(f, ζ_{i,s})` for one spatial term, splitting elements at the profile
/// breaks so that every sub-interval sees an integrand that is smooth inside.
///
/// Polynomial terms use an exact Gauss rule. The nonlocal term behaves like
/// `|x − x_b|^μ` next to the breaks, so its sub-intervals are graded
/// geometrically toward both ends.
fn project_term(space: &Space, breaks: &[f64], mesh: &Mesh1D, order: usize) -> Result<Vec<f64>> {
    let nb = order + 1;
    let mut out = vec![0.0; mesh.num_elements() * nb];
    let mut vals = vec![0.0; nb];
    let mut ders = vec![0.0; nb];
    let half_h = 0.5 * mesh.h();
    let (rule, graded) = match space {
        Space::Poly(p) => (gauss_rule((p.degree() + order) / 2 + 2)?, false),
        Space::Riesz { .. } => (gauss_rule(12)?, true),
    };
    let mut panels = Vec::new();
    for s in 0..mesh.num_elements() {
        let (xa, xb) = mesh.element_bounds(s);
        let mut cuts = vec![xa];
        cuts.extend(breaks.iter().copied().filter(|&b| b > xa && b < xb));
        cuts.push(xb);
        panels.clear();
        for w in cuts.windows(2) {
            if graded {
                graded_panels(w[0], w[1], &mut panels);
            } else {
                panels.push((w[0], w[1]));
            }
        }
        let blk = &mut out[s * nb..(s + 1) * nb];
        for &(c, d) in &panels {
            for (&r, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let x = 0.5 * (c + d) + 0.5 * (d - c) * r;
                legendre_table(((x - xa) / half_h - 1.0).clamp(-1.0, 1.0), &mut vals, &mut ders);
                let fx = space.eval(x) * wt * 0.5 * (d - c);
                for i in 0..nb {
                    blk[i] += fx * vals[i];
                }
            }
        }
    }
    Ok(out)
}

/// Splits `[c, d]` into panels shrinking by `GRADING` toward both ends.
fn graded_panels(c: f64, d: f64, out: &mut Vec<(f64, f64)>) {
    const GRADING: f64 = 0.2;
    const LEVELS: i32 = 14;
    let half = 0.5 * (d - c);
    // relative edges 0, g^L, …, g, 1 of each half
    let mut edges = vec![0.0];
    edges.extend((0..=LEVELS).rev().map(|l| GRADING.powi(l)));
    for w in edges.windows(2) {
        out.push((c + half * w[0], c + half * w[1]));
    }
    for w in edges.windows(2).rev() {
        out.push((d - half * w[1], d - half * w[0]));
    }
}

impl SourceTerm for ManufacturedSource {
    fn value(&self, x: f64, t: f64, step: usize) -> f64 {
        self.terms.iter().map(|term| self.time_coefficient(term.time, t, step) * term.space.eval(x)).sum()
    }

    /// Spatial loads are computed once per mesh and order (adaptive quadrature
    /// for the nonlocal term) and recombined with the time coefficients.
    fn load(&self, mesh: &Mesh1D, order: usize, t: f64, step: usize, out: &mut [f64]) {
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        let stale = cache.as_ref().is_none_or(|c| c.mesh != *mesh || c.order != order);
        if stale {
            match self.term_loads(mesh, order) {
                Ok(loads) => *cache = Some(LoadCache { mesh: *mesh, order, loads }),
                Err(_) => {
                    drop(cache);
                    crate::ldg::gauss_load(mesh, order, order + 8, out, |x| self.value(x, t, step));
                    return;
                }
            }
        }
        let loads = &cache.as_ref().expect("filled above").loads;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (term, load) in self.terms.iter().zip(loads) {
            let c = self.time_coefficient(term.time, t, step);
            if c != 0.0 {
                for (o, l) in out.iter_mut().zip(load) {
                    *o += c * l;
                }
            }
        }
    }
}
