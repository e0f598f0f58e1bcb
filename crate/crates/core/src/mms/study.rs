use std::sync::Arc;

use rayon::prelude::*;

use super::cases::ManufacturedCase;
use super::source::{derive_source, TimeMode};
use super::table::{ConvergenceTable, StudyAxis};
use crate::basis::{GridFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::kernels::{FractionalOrder, OrderDensity, RieszOperator, TimeGrid};
use crate::ldg::FluxSpec;
use crate::march::{RunSummary, Solver, SolverConfig};

/// Fixed parameters of a manufactured run; the study axis overrides one of
/// `num_elements`, `num_steps` or the node count of `fractional`.
#[derive(Debug, Clone)]
pub struct StudyParams {
    pub beta: f64,
    /// Polynomial degree `k`.
    pub degree: usize,
    pub num_elements: usize,
    pub num_steps: usize,
    pub fractional: FractionalOrder,
    /// Source time mode; `None` picks the one isolating the study axis.
    pub mode: Option<TimeMode>,
    pub flux: FluxSpec,
    /// Gauss points for the nonlinear terms; `None` means `k + 2`.
    pub quad_points: Option<usize>,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
}

impl StudyParams {
    /// `Δt = T/500` and `p = 1/50` with a uniform order density.
    pub fn new(beta: f64, degree: usize, num_elements: usize) -> Self {
        Self {
            beta,
            degree,
            num_elements,
            num_steps: 500,
            fractional: FractionalOrder::distributed_uniform(50),
            mode: None,
            flux: FluxSpec::default(),
            quad_points: None,
            picard_tol: 1e-10,
            picard_max_iters: 50,
        }
    }
}

/// Source mode that leaves only the error of `axis`.
pub fn default_mode(axis: StudyAxis) -> TimeMode {
    match axis {
        StudyAxis::Space => TimeMode::FullyDiscrete,
        StudyAxis::Time => TimeMode::MidpointExact,
        StudyAxis::Order => TimeMode::L1Exact,
    }
}

/// Outcome of one manufactured run.
#[derive(Debug, Clone)]
pub struct CaseRun {
    pub summary: RunSummary,
    /// `‖V_h(T) − V(T)‖_{L²}`.
    pub error: f64,
}

impl CaseRun {
    pub fn final_state(&self) -> &GridFunction {
        &self.summary.final_state
    }
}

fn check_params(case: &ManufacturedCase, p: &StudyParams) -> Result<()> {
    if !(1..=4).contains(&p.degree) {
        return Err(Error::domain(format!("polynomial degree must lie in 1..=4, got {}", p.degree)));
    }
    if case.b(p.beta) > 0.0 && !(p.beta > 1.0 && p.beta < 2.0) {
        return Err(Error::domain(format!("spatial order beta must lie in (1, 2), got {}", p.beta)));
    }
    Ok(())
}

fn run_with(
    case: &ManufacturedCase,
    p: &StudyParams,
    mode: TimeMode,
    riesz: Option<Arc<RieszOperator>>,
) -> Result<CaseRun> {
    let mesh = Mesh1D::new(case.domain.0, case.domain.1, p.num_elements)?;
    let grid = TimeGrid::new(case.t_final, p.num_steps)?;
    let source = derive_source(case, p.beta, &p.fractional, mode, Some(grid))?;
    let problem = case.problem(p.beta).with_source(source);
    let mut config = SolverConfig::new(grid, p.fractional.clone());
    config.flux = p.flux;
    config.quad_points = p.quad_points;
    config.picard_tol = p.picard_tol;
    config.picard_max_iters = p.picard_max_iters;
    let riesz = match riesz {
        Some(r) => Some(r),
        None if problem.b > 0.0 => Some(Arc::new(RieszOperator::assemble(&mesh, p.degree, p.beta)?)),
        None => None,
    };
    let summary = Solver::with_riesz(&problem, &mesh, p.degree, config, riesz)?.run()?;
    let t = case.t_final;
    let error = summary.final_state.l2_error(|x| case.exact(x, t));
    Ok(CaseRun { summary, error })
}

/// Marches `case` to its final time with the given parameters and measures
/// the `L²` error there.
pub fn solve_case(case: &ManufacturedCase, params: &StudyParams) -> Result<CaseRun> {
    check_params(case, params)?;
    let mode = params.mode.unwrap_or(TimeMode::Exact);
    run_with(case, params, mode, None)
}

/// Runs one manufactured solve per level of `axis` (levels run in parallel)
/// and tabulates the final-time errors with observed orders.
pub fn convergence_study(
    case: &ManufacturedCase,
    params: &StudyParams,
    axis: StudyAxis,
    levels: &[usize],
) -> Result<ConvergenceTable> {
    check_params(case, params)?;
    if levels.len() < 2 {
        return Err(Error::domain("a convergence study needs at least two levels"));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) || levels[0] == 0 {
        return Err(Error::domain("study levels must be positive and strictly increasing"));
    }
    let density = match (&params.fractional, axis) {
        (FractionalOrder::Distributed { density, .. }, _) => Some(density.clone()),
        (FractionalOrder::Single(_), StudyAxis::Order) => {
            return Err(Error::domain("an order-quadrature study needs a distributed-order operator"))
        }
        _ => None,
    };
    let mode = params.mode.unwrap_or_else(|| default_mode(axis));

    // Time and order studies share one mesh, hence one Riesz matrix.
    let shared = if axis != StudyAxis::Space && case.b(params.beta) > 0.0 {
        let mesh = Mesh1D::new(case.domain.0, case.domain.1, params.num_elements)?;
        Some(Arc::new(RieszOperator::assemble(&mesh, params.degree, params.beta)?))
    } else {
        None
    };

    let errors: Vec<Result<f64>> = levels
        .par_iter()
        .map(|&n| {
            let mut p = params.clone();
            match axis {
                StudyAxis::Space => p.num_elements = n,
                StudyAxis::Time => p.num_steps = n,
                StudyAxis::Order => {
                    let density: OrderDensity = density.clone().expect("checked above");
                    p.fractional = FractionalOrder::Distributed { nodes: n, density };
                }
            }
            run_with(case, &p, mode, shared.clone()).map(|r| r.error)
        })
        .collect();
    let mut data = Vec::with_capacity(levels.len());
    for (level, (res, &n)) in errors.into_iter().zip(levels).enumerate() {
        let e = res.map_err(|e| Error::Level { level, resolution: n, source: Box::new(e) })?;
        data.push((n, e));
    }
    Ok(ConvergenceTable::from_errors(axis, &data, study_metadata(case, params, axis, mode)))
}

fn study_metadata(case: &ManufacturedCase, p: &StudyParams, axis: StudyAxis, mode: TimeMode) -> Vec<(String, String)> {
    let mut m = vec![
        ("case".to_string(), case.name.clone()),
        ("beta".to_string(), p.beta.to_string()),
        ("k".to_string(), p.degree.to_string()),
        ("T".to_string(), case.t_final.to_string()),
    ];
    if axis != StudyAxis::Space {
        m.push(("N".into(), p.num_elements.to_string()));
    }
    if axis != StudyAxis::Time {
        m.push(("steps".into(), p.num_steps.to_string()));
    }
    if axis != StudyAxis::Order {
        let alpha = match &p.fractional {
            FractionalOrder::Single(a) => format!("single {a}"),
            FractionalOrder::Distributed { nodes, .. } => format!("distributed {nodes}"),
        };
        m.push(("alpha".into(), alpha));
    }
    m.push(("source".into(), mode.as_str().into()));
    m
}
