use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, LU};

use super::config::SolverConfig;
use super::history::{HistoryBuffer, HistoryWeights};
use crate::basis::{l2_project, GridFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::kernels::{DistributedRule, RieszOperator};
use crate::ldg::{LdgOperator, PdeProblem};

/// Outcome of one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub iterations: usize,
    /// Last relative change of the Picard iteration (zero for linear problems,
    /// which are solved directly).
    pub residual: f64,
    /// `‖V^n‖_{L²}`.
    pub norm: f64,
}

/// Final state and per-step history of a run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: GridFunction,
    /// `‖V^n‖` for `n = 0..=M_t`.
    pub norms: Vec<f64>,
    pub reports: Vec<StepReport>,
}

/// Implicit marcher: `Σ_j w_j M V^n − Res(V^n) = M·history`, solved by
/// Picard iteration on the frozen-coefficient linearization.
pub struct Solver {
    op: LdgOperator,
    config: SolverConfig,
    rule: DistributedRule,
    weights: HistoryWeights,
    history: HistoryBuffer,
    linear_lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl Solver {
    pub fn new(problem: &PdeProblem, mesh: &Mesh1D, order: usize, config: SolverConfig) -> Result<Self> {
        let op = LdgOperator::new(problem, mesh, order, config.flux, config.quad_points_for(order))?;
        Self::with_operator(op, config)
    }

    /// Reuses a pre-assembled Riesz matrix (e.g. across a time-step study).
    pub fn with_riesz(
        problem: &PdeProblem,
        mesh: &Mesh1D,
        order: usize,
        config: SolverConfig,
        riesz: Option<Arc<RieszOperator>>,
    ) -> Result<Self> {
        let op = LdgOperator::with_riesz(problem, mesh, order, config.flux, config.quad_points_for(order), riesz)?;
        Self::with_operator(op, config)
    }

    pub fn with_operator(op: LdgOperator, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let rule = DistributedRule::from_order(&config.order, config.time.dt(), config.time.num_steps())?;
        let weights = HistoryWeights::new(&rule);
        let init = &op.problem().initial;
        let v0 = l2_project(|x| init(x), op.mesh(), op.order());
        Ok(Self { op, config, rule, weights, history: HistoryBuffer::new(v0), linear_lu: None })
    }

    pub fn operator(&self) -> &LdgOperator {
        &self.op
    }

    pub fn rule(&self) -> &DistributedRule {
        &self.rule
    }

    pub fn history(&self) -> &HistoryBuffer {
        &self.history
    }

    /// Index of the most recent state (0 before the first step).
    pub fn current_step(&self) -> usize {
        self.history.len() - 1
    }

    pub fn current(&self) -> GridFunction {
        GridFunction::from_coeffs(*self.op.mesh(), self.op.order(), self.history.latest().to_vec())
            .expect("stored states match the mesh")
    }

    fn norm(&self, c: &[f64]) -> f64 {
        c.iter().zip(self.op.mass()).map(|(x, m)| m * x * x).sum::<f64>().sqrt()
    }

    fn system(&self, k: DMatrix<f64>) -> DMatrix<f64> {
        let w = self.rule.total_weight();
        let mut a = -k;
        for (i, m) in self.op.mass().iter().enumerate() {
            a[(i, i)] += w * m;
        }
        a
    }

    /// Advances one step. Errors carry the step index.
    pub fn step(&mut self) -> Result<StepReport> {
        let n = self.history.len();
        self.advance(n).map_err(|e| Error::Step { step: n, source: Box::new(e) })
    }

    fn advance(&mut self, n: usize) -> Result<StepReport> {
        if n > self.config.time.num_steps() {
            return Err(Error::domain(format!("run already reached the final step {}", n - 1)));
        }
        let t = self.config.time.t(n);
        let hist = self.weights.apply(&self.history, n)?;
        let mut base: Vec<f64> = hist.iter().zip(self.op.mass()).map(|(h, m)| h * m).collect();
        let dim = self.op.dim();

        let (state, iterations, change) = if self.op.problem().is_linear() {
            if self.linear_lu.is_none() {
                let k = self.op.linearize(&vec![0.0; dim], t)?;
                self.linear_lu = Some(self.system(k).lu());
            }
            let f = self.op.residual(&vec![0.0; dim], t, n)?;
            for (b, fi) in base.iter_mut().zip(&f) {
                *b += fi;
            }
            let lu = self.linear_lu.as_ref().expect("factored above");
            let x =
                lu.solve(&DVector::from_vec(base)).ok_or_else(|| Error::Singular(format!("step matrix at t = {t}")))?;
            (x.as_slice().to_vec(), 1, 0.0)
        } else {
            let mut v = self.history.latest().to_vec();
            let mut change = f64::INFINITY;
            let mut iters = 0;
            while iters < self.config.picard_max_iters {
                iters += 1;
                let k = self.op.linearize(&v, t)?;
                let r = self.op.residual(&v, t, n)?;
                let vv = DVector::from_column_slice(&v);
                let kv = &k * &vv;
                let rhs = DVector::from_iterator(dim, (0..dim).map(|i| base[i] + r[i] - kv[i]));
                let x = self
                    .system(k)
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::Singular(format!("picard matrix at t = {t}")))?;
                let dnorm = (&x - &vv).norm();
                let xnorm = x.norm();
                change = if xnorm > 0.0 { dnorm / xnorm } else { dnorm };
                v = x.as_slice().to_vec();
                if change <= self.config.picard_tol {
                    break;
                }
            }
            if !(change <= self.config.picard_tol) {
                return Err(Error::NonConvergence { iterations: iters, residual: change });
            }
            (v, iters, change)
        };
        let norm = self.norm(&state);
        let gf = GridFunction::from_coeffs(*self.op.mesh(), self.op.order(), state)?;
        self.history.push(gf)?;
        Ok(StepReport { step: n, t, iterations, residual: change, norm })
    }

    /// Marches to the final time.
    pub fn run(mut self) -> Result<RunSummary> {
        let mut norms = vec![self.norm(self.history.latest())];
        let mut reports = Vec::with_capacity(self.config.time.num_steps());
        while self.current_step() < self.config.time.num_steps() {
            let rep = self.step()?;
            norms.push(rep.norm);
            reports.push(rep);
        }
        Ok(RunSummary { final_state: self.current(), norms, reports })
    }
}

/// Builds a solver and marches `problem` to the final time.
pub fn run(problem: &PdeProblem, mesh: &Mesh1D, order: usize, config: SolverConfig) -> Result<RunSummary> {
    Solver::new(problem, mesh, order, config)?.run()
}

/// Norm history of a source-free run and its monotonicity verdict.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub norms: Vec<f64>,
    /// Largest `‖V^n‖/‖V^{n−1}‖ − 1` over the run (negative when strictly decaying).
    pub max_relative_increase: f64,
    /// First step whose norm exceeds its predecessor by more than `1e−10` relative.
    pub first_violation: Option<usize>,
}

impl StabilityReport {
    pub fn is_monotone(&self) -> bool {
        self.first_violation.is_none()
    }
}

const STABILITY_TOL: f64 = 1e-10;

/// Runs a source-free problem and checks that `‖V^n‖` never increases.
pub fn stability_run(
    problem: &PdeProblem,
    mesh: &Mesh1D,
    order: usize,
    config: SolverConfig,
) -> Result<StabilityReport> {
    if problem.source.is_some() {
        return Err(Error::domain("stability runs require a problem without source term"));
    }
    let summary = run(problem, mesh, order, config)?;
    Ok(stability_verdict(summary.norms))
}

pub(crate) fn stability_verdict(norms: Vec<f64>) -> StabilityReport {
    let mut max_inc = f64::NEG_INFINITY;
    let mut first = None;
    for n in 1..norms.len() {
        let (prev, cur) = (norms[n - 1], norms[n]);
        let inc = if prev > 0.0 {
            cur / prev - 1.0
        } else if cur > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        max_inc = max_inc.max(inc);
        if first.is_none() && cur > prev * (1.0 + STABILITY_TOL) && cur > 0.0 {
            first = Some(n);
        }
    }
    StabilityReport { norms, max_relative_increase: max_inc, first_violation: first }
}

/// Writes one `step t iters residual norm` line per step.
pub fn write_diagnostics<W: Write>(reports: &[StepReport], mut w: W) -> Result<()> {
    writeln!(w, "# step t picard_iters residual norm")?;
    for r in reports {
        writeln!(w, "{} {:.12e} {} {:.3e} {:.12e}", r.step, r.t, r.iterations, r.residual, r.norm)?;
    }
    Ok(())
}
