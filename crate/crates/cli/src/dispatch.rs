//! Subcommand execution and file emission.

use std::fmt::{self, Write as _};
use std::io::Write as _;
use std::path::Path;

use fracldg::basis::Mesh1D;
use fracldg::kernels::{l1_coefficients, DistributedRule};
use fracldg::march::write_diagnostics;
use fracldg::mms::{convergence_study, emit_table, solve_case, ManufacturedCase, StudyParams};
use fracldg::{run, stability_run, Error, FluxSpec, PdeProblem, RieszOperator, RunSummary, SolverConfig, TimeGrid};

use crate::config::{AlphaMode, Command, ConfigError, CustomProblem, Kernel, ProblemSpec, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NONCONVERGENCE: u8 = 3;
    pub const INVARIANT: u8 = 4;
}

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Solver(Error),
    /// A checked property (e.g. norm monotonicity) did not hold.
    Invariant(String),
    Io(std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => exit::CONFIG,
            Failure::Solver(e) if e.is_nonconvergence() => exit::NONCONVERGENCE,
            Failure::Solver(e) if matches!(e.root(), Error::Consistency(_)) => exit::INVARIANT,
            Failure::Solver(_) | Failure::Io(_) => exit::OTHER,
            Failure::Invariant(_) => exit::INVARIANT,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Solver(e) => write!(f, "solver error: {e}"),
            Failure::Invariant(m) => write!(f, "invariant violated: {m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => Failure::Io(io),
            other => Failure::Solver(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(target: Option<&str>, contents: &str) -> std::io::Result<()> {
    match target {
        Some(p) => write_atomic(Path::new(p), contents),
        None => std::io::stdout().write_all(contents.as_bytes()),
    }
}

/// Runs a validated configuration; on success returns the status line for
/// stderr.
pub fn dispatch(cfg: &RunConfig) -> Result<String, Failure> {
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Converge => converge(cfg),
        Command::Stability => stability(cfg),
        Command::Kernels => kernels(cfg),
    }
}

fn beta(cfg: &RunConfig) -> f64 {
    cfg.beta.expect("validated: beta present")
}

fn degree(cfg: &RunConfig) -> usize {
    cfg.degree.expect("validated: k present")
}

fn elements(cfg: &RunConfig) -> usize {
    cfg.elements.expect("validated: N present")
}

fn study_params(cfg: &RunConfig) -> Result<StudyParams, Failure> {
    let mut p = StudyParams::new(beta(cfg), degree(cfg), elements(cfg));
    p.num_steps = cfg.steps;
    p.fractional = cfg.alpha.order();
    p.mode = cfg.source;
    p.flux = FluxSpec::new(cfg.sigma)?;
    p.quad_points = cfg.quad_points;
    p.picard_tol = cfg.picard_tol;
    p.picard_max_iters = cfg.picard_max_iters;
    Ok(p)
}

fn solver_config(cfg: &RunConfig) -> Result<SolverConfig, Failure> {
    let mut c = SolverConfig::new(TimeGrid::new(cfg.t_final, cfg.steps)?, cfg.alpha.order());
    c.flux = FluxSpec::new(cfg.sigma)?;
    c.quad_points = cfg.quad_points;
    c.picard_tol = cfg.picard_tol;
    c.picard_max_iters = cfg.picard_max_iters;
    Ok(c)
}

fn custom_problem(p: &CustomProblem, beta: f64) -> PdeProblem {
    let initial = p.initial;
    PdeProblem::new(p.convection.flux(), p.diffusion.diffusion(), p.strength, beta)
        .with_initial(move |x| initial.eval(x))
}

/// The manufactured case's PDE with zero forcing and zero Dirichlet data.
fn unforced(case: &ManufacturedCase, beta: f64) -> PdeProblem {
    let case_c = case.clone();
    PdeProblem::new(case.convection, case.diffusion, case.b(beta), beta).with_initial(move |x| case_c.initial(x))
}

fn header(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let name = match &cfg.problem {
        ProblemSpec::Case(n) => n.clone(),
        ProblemSpec::Custom(p) => format!(
            "custom (convection {}, diffusion {}, strength {}, initial {})",
            p.convection.as_str(),
            p.diffusion.as_str(),
            p.strength,
            p.initial.as_str()
        ),
    };
    let (a, b) = cfg.problem.domain();
    let _ = writeln!(s, "# case = {name}");
    let _ = writeln!(s, "# domain = {a}, {b}");
    let _ = writeln!(s, "# beta = {}", beta(cfg));
    let _ = writeln!(s, "# T = {}", cfg.t_final);
    let _ = writeln!(s, "# steps = {}", cfg.steps);
    match cfg.alpha {
        AlphaMode::Single(al) => {
            let _ = writeln!(s, "# alpha = {al}");
        }
        AlphaMode::Distributed { nodes } => {
            let _ = writeln!(s, "# alpha = distributed {nodes}");
        }
    }
    s
}

fn solve(cfg: &RunConfig) -> Result<String, Failure> {
    let (summary, error): (RunSummary, Option<f64>) = match &cfg.problem {
        ProblemSpec::Case(name) => {
            let case = fracldg::mms::by_name(name)?;
            let r = solve_case(&case, &study_params(cfg)?)?;
            (r.summary, Some(r.error))
        }
        ProblemSpec::Custom(p) => {
            let (a, b) = p.domain;
            let mesh = Mesh1D::new(a, b, elements(cfg))?;
            (run(&custom_problem(p, beta(cfg)), &mesh, degree(cfg), solver_config(cfg)?)?, None)
        }
    };
    let state = &summary.final_state;
    let mut out = header(cfg);
    let _ = writeln!(out, "# N = {}", state.mesh().num_elements());
    let _ = writeln!(out, "# k = {}", state.order());
    if let Some(e) = error {
        let _ = writeln!(out, "# l2_error = {e:.6e}");
    }
    let _ = writeln!(out, "element,mode,coefficient");
    for s in 0..state.mesh().num_elements() {
        for (j, c) in state.element(s).iter().enumerate() {
            let _ = writeln!(out, "{s},{j},{c:.17e}");
        }
    }
    let mut diag = Vec::new();
    write_diagnostics(&summary.reports, &mut diag)?;
    emit(cfg.output.as_deref(), &out)?;
    if let Some(d) = &cfg.diagnostics {
        write_atomic(Path::new(d), &String::from_utf8_lossy(&diag))?;
    }
    let max_iters = summary.reports.iter().map(|r| r.iterations).max().unwrap_or(0);
    let norm = summary.norms.last().copied().unwrap_or(0.0);
    let mut status = format!("solve: {} steps, max picard iterations {max_iters}, final norm {norm:.6e}", cfg.steps);
    if let Some(e) = error {
        let _ = write!(status, ", L2 error {e:.6e}");
    }
    Ok(status)
}

fn converge(cfg: &RunConfig) -> Result<String, Failure> {
    let study = cfg.study.as_ref().expect("validated: study present");
    let ProblemSpec::Case(name) = &cfg.problem else { unreachable!("validated: converge needs a manufactured case") };
    let case = fracldg::mms::by_name(name)?;
    let table = convergence_study(&case, &study_params(cfg)?, study.axis, &study.levels)?;
    emit(cfg.output.as_deref(), &emit_table(&table, study.format))?;
    let orders: Vec<String> = table.orders().iter().map(|o| format!("{o:.2}")).collect();
    Ok(format!("converge: {} levels along {}, orders [{}]", table.rows.len(), study.axis.as_str(), orders.join(", ")))
}

fn stability(cfg: &RunConfig) -> Result<String, Failure> {
    let (a, b) = cfg.problem.domain();
    let mesh = Mesh1D::new(a, b, elements(cfg))?;
    let problem = match &cfg.problem {
        ProblemSpec::Case(name) => unforced(&fracldg::mms::by_name(name)?, beta(cfg)),
        ProblemSpec::Custom(p) => custom_problem(p, beta(cfg)),
    };
    let report = stability_run(&problem, &mesh, degree(cfg), solver_config(cfg)?)?;
    let mut out = header(cfg);
    let _ = writeln!(out, "# max_relative_increase = {:.6e}", report.max_relative_increase);
    let _ = writeln!(out, "step,t,norm");
    let dt = cfg.dt();
    for (n, v) in report.norms.iter().enumerate() {
        let _ = writeln!(out, "{n},{:.12e},{v:.17e}", n as f64 * dt);
    }
    emit(cfg.output.as_deref(), &out)?;
    match report.first_violation {
        None => Ok(format!(
            "stability: norm non-increasing over {} steps ({:.6e} -> {:.6e})",
            cfg.steps, report.norms[0], report.norms[cfg.steps]
        )),
        Some(n) => Err(Failure::Invariant(format!(
            "norm increased at step {n} (relative increase {:.3e})",
            report.max_relative_increase
        ))),
    }
}

/// Value truncated (not rounded) to 8 decimals, trailing zeros removed.
fn short(v: f64) -> String {
    let s = format!("{:.8}", (v * 1e8).trunc() / 1e8);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn kernels(cfg: &RunConfig) -> Result<String, Failure> {
    let out = match cfg.kernel {
        Kernel::L1 => {
            let AlphaMode::Single(alpha) = cfg.alpha else { unreachable!("validated: single alpha") };
            let a = l1_coefficients(alpha, cfg.terms)?;
            let cells: Vec<String> = a.iter().map(|&v| short(v)).collect();
            format!("{}\n", cells.join(", "))
        }
        Kernel::Lambda => {
            let rule = DistributedRule::from_order(&cfg.alpha.order(), cfg.dt(), cfg.terms)?;
            let mut s = String::from("j,alpha,mass,lambda\n");
            for (j, ((a, m), l)) in rule.alphas().iter().zip(rule.masses()).zip(rule.lambdas()).enumerate() {
                let _ = writeln!(s, "{j},{a:.12e},{m:.12e},{l:.12e}");
            }
            s
        }
        Kernel::Riesz => {
            let (a, b) = cfg.problem.domain();
            let mesh = Mesh1D::new(a, b, elements(cfg))?;
            let op = RieszOperator::assemble(&mesh, degree(cfg), beta(cfg))?;
            let mut buf = Vec::new();
            op.write_csv(&mut buf)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
    };
    emit(cfg.output.as_deref(), &out)?;
    Ok(format!("kernels: {} dump written", cfg.kernel.as_str()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_format() {
        assert_eq!(short(1.0), "1");
        assert_eq!(short(2f64.sqrt() - 1.0), "0.41421356");
        assert_eq!(short(3f64.sqrt() - 2f64.sqrt()), "0.31783724");
        assert_eq!(short(0.0), "0");
        assert_eq!(short(-1e-12), "0");
    }

    #[test]
    fn exit_code_mapping() {
        let nc = Error::NonConvergence { iterations: 3, residual: 1.0 };
        let wrapped = Error::Step { step: 4, source: Box::new(nc) };
        assert_eq!(Failure::from(wrapped).exit_code(), exit::NONCONVERGENCE);
        assert_eq!(Failure::from(Error::Consistency("x".into())).exit_code(), exit::INVARIANT);
        assert_eq!(Failure::from(Error::Parse("x".into())).exit_code(), exit::OTHER);
        assert_eq!(Failure::Invariant("x".into()).exit_code(), exit::INVARIANT);
        assert_eq!(Failure::Config(ConfigError { violations: vec![] }).exit_code(), exit::CONFIG);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
