//! Run configuration: line-oriented `key = value` text with optional
//! `[section]` headers and `#` comments.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use fracldg::mms::{by_name, ManufacturedCase, StudyAxis, TableFormat, TimeMode};
use fracldg::{Convection, Diffusion, FractionalOrder};

/// Default number of time steps (`Δt = T/500`).
pub const DEFAULT_STEPS: usize = 500;
/// Default midpoint nodes in `α` (`p = 1/50`).
pub const DEFAULT_NODES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Converge,
    Stability,
    Kernels,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Converge => "converge",
            Command::Stability => "stability",
            Command::Kernels => "kernels",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Command::Solve),
            "converge" => Ok(Command::Converge),
            "stability" => Ok(Command::Stability),
            "kernels" => Ok(Command::Kernels),
            _ => Err(format!("unknown command `{s}` (expected solve, converge, stability or kernels)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvectionPreset {
    Burgers,
    Quartic,
    Linear,
    None,
}

impl ConvectionPreset {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvectionPreset::Burgers => "burgers",
            ConvectionPreset::Quartic => "quartic",
            ConvectionPreset::Linear => "linear",
            ConvectionPreset::None => "none",
        }
    }

    pub fn flux(self) -> Convection {
        match self {
            ConvectionPreset::Burgers => Convection::Burgers,
            ConvectionPreset::Quartic => Convection::QuarticPlusLinear,
            ConvectionPreset::Linear => Convection::Linear { speed: 1.0 },
            ConvectionPreset::None => Convection::None,
        }
    }
}

impl FromStr for ConvectionPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "burgers" => Ok(ConvectionPreset::Burgers),
            "quartic" => Ok(ConvectionPreset::Quartic),
            "linear" => Ok(ConvectionPreset::Linear),
            "none" => Ok(ConvectionPreset::None),
            _ => Err(format!("unknown convection preset `{s}` (expected burgers, quartic, linear or none)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionPreset {
    None,
    Unit,
}

impl DiffusionPreset {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffusionPreset::None => "none",
            DiffusionPreset::Unit => "unit",
        }
    }

    pub fn diffusion(self) -> Diffusion {
        match self {
            DiffusionPreset::None => Diffusion::None,
            DiffusionPreset::Unit => Diffusion::Constant(1.0),
        }
    }
}

impl FromStr for DiffusionPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(DiffusionPreset::None),
            "unit" => Ok(DiffusionPreset::Unit),
            _ => Err(format!("unknown diffusion preset `{s}` (expected none or unit)")),
        }
    }
}

/// Initial data of a custom problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPreset {
    Zero,
    /// `(1 − ξ²)⁴` on `[−1, 1]`, zero elsewhere.
    Bump,
}

impl InitialPreset {
    pub fn as_str(self) -> &'static str {
        match self {
            InitialPreset::Zero => "zero",
            InitialPreset::Bump => "bump",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            InitialPreset::Zero => 0.0,
            InitialPreset::Bump if x.abs() < 1.0 => (1.0 - x * x).powi(4),
            InitialPreset::Bump => 0.0,
        }
    }
}

impl FromStr for InitialPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(InitialPreset::Zero),
            "bump" => Ok(InitialPreset::Bump),
            _ => Err(format!("unknown initial preset `{s}` (expected zero or bump)")),
        }
    }
}

/// Problem with zero forcing and homogeneous Dirichlet data built from presets.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomProblem {
    pub convection: ConvectionPreset,
    pub diffusion: DiffusionPreset,
    /// Strength `b` of the Riesz term.
    pub strength: f64,
    pub initial: InitialPreset,
    pub domain: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// One of the manufactured cases (`example1`..`example3`).
    Case(String),
    Custom(CustomProblem),
}

impl ProblemSpec {
    pub fn manufactured(&self) -> Option<ManufacturedCase> {
        match self {
            ProblemSpec::Case(name) => by_name(name).ok(),
            ProblemSpec::Custom(_) => None,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            ProblemSpec::Case(name) => by_name(name).map(|c| c.domain).unwrap_or((-1.0, 1.0)),
            ProblemSpec::Custom(c) => c.domain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    Single(f64),
    /// Uniform density on `(0, 1)` with `nodes` midpoint nodes.
    Distributed {
        nodes: usize,
    },
}

impl AlphaMode {
    pub fn order(self) -> FractionalOrder {
        match self {
            AlphaMode::Single(a) => FractionalOrder::Single(a),
            AlphaMode::Distributed { nodes } => FractionalOrder::distributed_uniform(nodes),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// L1 weights `a_l`.
    L1,
    /// Per-node `α_j`, mass and `λ_j` of the time rule.
    Lambda,
    /// Riesz Galerkin matrix.
    Riesz,
}

impl Kernel {
    pub fn as_str(self) -> &'static str {
        match self {
            Kernel::L1 => "l1",
            Kernel::Lambda => "lambda",
            Kernel::Riesz => "riesz",
        }
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "l1" => Ok(Kernel::L1),
            "lambda" => Ok(Kernel::Lambda),
            "riesz" => Ok(Kernel::Riesz),
            _ => Err(format!("unknown kernel `{s}` (expected l1, lambda or riesz)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub axis: StudyAxis,
    pub levels: Vec<usize>,
    pub format: TableFormat,
}

/// A fully validated run description; every default is filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: ProblemSpec,
    pub beta: Option<f64>,
    pub degree: Option<usize>,
    pub elements: Option<usize>,
    pub t_final: f64,
    pub steps: usize,
    pub alpha: AlphaMode,
    /// Source time mode of a manufactured run; `None` picks the default.
    pub source: Option<TimeMode>,
    pub sigma: f64,
    pub quad_points: Option<usize>,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub study: Option<StudySpec>,
    pub kernel: Kernel,
    pub terms: usize,
    pub output: Option<String>,
    pub diagnostics: Option<String>,
}

impl RunConfig {
    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }
}

/// Every violation found in a config text.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid configuration ({} problem{})",
            self.violations.len(),
            if self.violations.len() == 1 { "" } else { "s" }
        )?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const SECTIONS: [&str; 7] = ["run", "problem", "time", "discretization", "study", "kernels", "output"];

/// Known keys and the section each belongs to; a key may also appear before
/// any section header.
const KEYS: [(&str, &str); 24] = [
    ("command", "run"),
    ("case", "problem"),
    ("convection", "problem"),
    ("diffusion", "problem"),
    ("strength", "problem"),
    ("initial", "problem"),
    ("domain", "problem"),
    ("beta", "problem"),
    ("T", "time"),
    ("steps", "time"),
    ("dt", "time"),
    ("alpha", "time"),
    ("nodes", "time"),
    ("density", "time"),
    ("source", "time"),
    ("N", "discretization"),
    ("k", "discretization"),
    ("sigma", "discretization"),
    ("quad_points", "discretization"),
    ("picard_tol", "discretization"),
    ("picard_max_iters", "discretization"),
    ("axis", "study"),
    ("levels", "study"),
    ("format", "study"),
];
const KERNEL_KEYS: [(&str, &str); 4] =
    [("kernel", "kernels"), ("terms", "kernels"), ("output", "output"), ("diagnostics", "output")];

fn home_section(key: &str) -> Option<&'static str> {
    KEYS.iter().chain(KERNEL_KEYS.iter()).find(|(k, _)| *k == key).map(|(_, s)| *s)
}

struct Entry {
    line: usize,
    value: String,
}

struct Collector {
    entries: Vec<(String, Entry)>,
    violations: Vec<String>,
}

impl Collector {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    fn has(&self, key: &str) -> bool {
        self.raw(key).is_some()
    }

    fn get<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let e = self.raw(key)?;
        match e.value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                let msg = format!("line {}: `{key}` must be {what}, got `{}`", e.line, e.value);
                self.violations.push(msg);
                None
            }
        }
    }

    fn get_with<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        let e = self.raw(key)?;
        match parse(&e.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                let msg = format!("line {}: {msg}", e.line);
                self.violations.push(msg);
                None
            }
        }
    }

    fn line(&self, key: &str) -> String {
        self.raw(key).map(|e| format!("line {}: ", e.line)).unwrap_or_default()
    }

    fn fail(&mut self, key: &str, msg: impl Into<String>) {
        let m = format!("{}{}", self.line(key), msg.into());
        self.violations.push(m);
    }

    fn reject_unless(&mut self, cond: bool, key: &str, why: &str) {
        if !cond && self.has(key) {
            self.fail(key, format!("`{key}` {why}"));
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("`levels` must be a comma-separated list of positive integers, got `{s}`"))
        })
        .collect()
}

fn parse_domain(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let err = || format!("`domain` must be `a, b` with a < b, got `{s}`");
    if parts.len() != 2 {
        return Err(err());
    }
    let a: f64 = parts[0].parse().map_err(|_| err())?;
    let b: f64 = parts[1].parse().map_err(|_| err())?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(err());
    }
    Ok((a, b))
}

fn parse_alpha(s: &str) -> Result<Option<f64>, String> {
    if s == "distributed" {
        return Ok(None);
    }
    let a: f64 = s.parse().map_err(|_| format!("`alpha` must be a number in (0, 1] or `distributed`, got `{s}`"))?;
    if !(a > 0.0 && a <= 1.0) {
        return Err(format!("alpha = {a} is outside (0, 1]"));
    }
    Ok(Some(a))
}

/// Parses and validates a config text, reporting all violations at once.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_inner(text, None)
}

/// Like [`parse_config`], with the command supplied by the caller; a
/// `command` key in the text must then agree with it.
pub fn parse_config_as(text: &str, command: Command) -> Result<RunConfig, ConfigError> {
    parse_inner(text, Some(command))
}

fn parse_inner(text: &str, command: Option<Command>) -> Result<RunConfig, ConfigError> {
    let mut c = Collector { entries: Vec::new(), violations: Vec::new() };
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            match name.strip_suffix(']').map(str::trim) {
                Some(n) if SECTIONS.contains(&n) => section = Some(n.to_string()),
                Some(n) => {
                    c.violations.push(format!("line {line}: unknown section `[{n}]`"));
                    section = None;
                }
                None => c.violations.push(format!("line {line}: malformed section header `{content}`")),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            c.violations.push(format!("line {line}: expected `key = value`, got `{content}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(home) = home_section(key) else {
            c.violations.push(format!("line {line}: unknown key `{key}`"));
            continue;
        };
        if let Some(s) = &section {
            if s != home {
                c.violations.push(format!("line {line}: key `{key}` belongs in [{home}], not [{s}]"));
                continue;
            }
        }
        if value.is_empty() {
            c.violations.push(format!("line {line}: key `{key}` has no value"));
            continue;
        }
        if c.has(key) {
            c.violations.push(format!("line {line}: duplicate key `{key}`"));
            continue;
        }
        c.entries.push((key.to_string(), Entry { line, value: value.to_string() }));
    }
    if let Some(cmd) = command {
        match c.raw("command") {
            Some(e) if e.value != cmd.as_str() => {
                let msg = format!(
                    "line {}: config is for command `{}`, but `{}` was requested",
                    e.line,
                    e.value,
                    cmd.as_str()
                );
                c.violations.push(msg);
            }
            Some(_) => {}
            None => c.entries.push(("command".into(), Entry { line: 0, value: cmd.as_str().into() })),
        }
    }
    build(c)
}

fn build(mut c: Collector) -> Result<RunConfig, ConfigError> {
    let command = match c.get_with("command", |s| s.parse::<Command>()) {
        Some(cmd) => cmd,
        None if c.has("command") => Command::Solve,
        None => {
            c.violations.push("missing key `command`".into());
            Command::Solve
        }
    };
    let kernel = c.get_with("kernel", |s| s.parse::<Kernel>()).unwrap_or(Kernel::L1);
    c.reject_unless(command == Command::Kernels, "kernel", "applies only to command = kernels");
    c.reject_unless(command == Command::Kernels, "terms", "applies only to command = kernels");
    let terms = match c.get::<usize>("terms", "a positive integer") {
        Some(0) => {
            c.fail("terms", "`terms` must be at least 1");
            1
        }
        Some(n) => n,
        None => 10,
    };
    let needs_space = command != Command::Kernels || kernel == Kernel::Riesz;

    // problem
    let case_name = c.raw("case").map(|e| e.value.clone());
    let custom_keys = ["convection", "diffusion", "strength", "initial", "domain"];
    let problem = match case_name.as_deref() {
        Some("custom") => {
            let convection = c.get_with("convection", |s| s.parse()).unwrap_or(ConvectionPreset::None);
            let diffusion = c.get_with("diffusion", |s| s.parse()).unwrap_or(DiffusionPreset::Unit);
            let strength = c.get::<f64>("strength", "a number").unwrap_or(1.0);
            if !(strength >= 0.0 && strength.is_finite()) {
                c.fail("strength", format!("strength = {strength} must be non-negative"));
            }
            let initial = c.get_with("initial", |s| s.parse()).unwrap_or(InitialPreset::Bump);
            let domain = c.get_with("domain", parse_domain).unwrap_or((-1.0, 1.0));
            ProblemSpec::Custom(CustomProblem { convection, diffusion, strength, initial, domain })
        }
        Some(name) => {
            if by_name(name).is_err() {
                c.fail("case", format!("unknown case `{name}` (expected example1, example2, example3 or custom)"));
            }
            for key in custom_keys {
                c.reject_unless(false, key, "applies only to case = custom");
            }
            let canonical = by_name(name).map(|m| m.name).unwrap_or_else(|_| name.to_string());
            ProblemSpec::Case(canonical)
        }
        None => {
            if needs_space {
                c.violations.push("missing key `case`".into());
            }
            for key in custom_keys {
                c.reject_unless(false, key, "applies only to case = custom");
            }
            ProblemSpec::Case("example1".into())
        }
    };

    let beta = c.get::<f64>("beta", "a number");
    if let Some(b) = beta {
        if !(b > 1.0 && b < 2.0) {
            c.fail("beta", format!("beta = {b} is outside the open interval (1, 2)"));
        }
    } else if needs_space && !c.has("beta") {
        c.violations.push("missing key `beta`".into());
    }

    let degree = c.get::<usize>("k", "a non-negative integer");
    match degree {
        Some(0) => c.fail(
            "k",
            "k = 0 is not allowed: the Gauss–Radau projection needs k ≥ 1 (its endpoint condition would consume the only degree of freedom)",
        ),
        Some(k) if k > 4 => c.fail("k", format!("k = {k} is outside 1..=4")),
        None if needs_space && !c.has("k") => c.violations.push("missing key `k`".into()),
        _ => {}
    }

    // study
    c.reject_unless(command == Command::Converge, "axis", "applies only to command = converge");
    c.reject_unless(command == Command::Converge, "levels", "applies only to command = converge");
    c.reject_unless(command == Command::Converge, "format", "applies only to command = converge");
    let study = if command == Command::Converge {
        let axis =
            c.get_with("axis", |s| s.parse::<StudyAxis>().map_err(|e| e.to_string())).unwrap_or(StudyAxis::Space);
        let format =
            c.get_with("format", |s| s.parse::<TableFormat>().map_err(|e| e.to_string())).unwrap_or(TableFormat::Csv);
        let levels = match c.get_with("levels", parse_list) {
            Some(l) => {
                if l.len() < 2 || l[0] == 0 || l.windows(2).any(|w| w[1] <= w[0]) {
                    c.fail("levels", "`levels` needs at least two positive, strictly increasing values");
                }
                l
            }
            None => {
                if !c.has("levels") {
                    c.violations.push("missing key `levels`".into());
                }
                Vec::new()
            }
        };
        if matches!(problem, ProblemSpec::Custom(_)) {
            c.fail("case", "converge needs a manufactured case (example1, example2 or example3)");
        }
        Some(StudySpec { axis, levels, format })
    } else {
        None
    };
    let axis = study.as_ref().map(|s| s.axis);

    let elements = c.get::<usize>("N", "an integer");
    match elements {
        Some(n) if n < 2 => c.fail("N", format!("N = {n} must be at least 2")),
        None if needs_space && axis != Some(StudyAxis::Space) && !c.has("N") => {
            c.violations.push("missing key `N`".into())
        }
        _ => {}
    }
    let elements = elements.or_else(|| {
        (axis == Some(StudyAxis::Space)).then(|| study.as_ref().and_then(|s| s.levels.first().copied())).flatten()
    });

    // time
    let default_t = match &problem {
        ProblemSpec::Case(name) => by_name(name).map(|m| m.t_final).unwrap_or(1.0),
        ProblemSpec::Custom(_) => 1.0,
    };
    let t_final = c.get::<f64>("T", "a number").unwrap_or(default_t);
    if !(t_final > 0.0 && t_final.is_finite()) {
        c.fail("T", format!("T = {t_final} must be positive"));
    }
    if c.has("steps") && c.has("dt") {
        c.fail("dt", "give either `steps` or `dt`, not both");
    }
    let steps = if let Some(dt) = c.get::<f64>("dt", "a number") {
        let m = t_final / dt;
        if !(dt > 0.0) || (m - m.round()).abs() > 1e-9 * m.max(1.0) || m.round() < 1.0 {
            c.fail("dt", format!("dt = {dt} must be positive and divide T = {t_final} into a whole number of steps"));
            DEFAULT_STEPS
        } else {
            m.round() as usize
        }
    } else {
        match c.get::<usize>("steps", "a positive integer") {
            Some(0) => {
                c.fail("steps", "`steps` must be at least 1");
                DEFAULT_STEPS
            }
            Some(m) => m,
            None => DEFAULT_STEPS,
        }
    };
    let alpha = match c.get_with("alpha", parse_alpha) {
        Some(Some(a)) => {
            c.reject_unless(false, "nodes", "applies only to alpha = distributed");
            c.reject_unless(false, "density", "applies only to alpha = distributed");
            AlphaMode::Single(a)
        }
        _ => {
            let nodes = match c.get::<usize>("nodes", "a positive integer") {
                Some(0) => {
                    c.fail("nodes", "`nodes` must be at least 1");
                    DEFAULT_NODES
                }
                Some(n) => n,
                None => DEFAULT_NODES,
            };
            if let Some(e) = c.raw("density") {
                if e.value != "uniform" {
                    let msg = format!("line {}: unknown density `{}` (expected uniform)", e.line, e.value);
                    c.violations.push(msg);
                }
            }
            AlphaMode::Distributed { nodes }
        }
    };
    if command == Command::Kernels && kernel == Kernel::L1 && !matches!(alpha, AlphaMode::Single(_)) {
        c.violations.push("kernel = l1 needs a single `alpha` value in (0, 1]".into());
    }
    if axis == Some(StudyAxis::Order) && matches!(alpha, AlphaMode::Single(_)) {
        c.fail("alpha", "an order-quadrature study (axis = p) needs alpha = distributed");
    }
    let source = c.get_with("source", |s| TimeMode::parse(s).map_err(|e| e.to_string()));
    c.reject_unless(
        matches!(command, Command::Solve | Command::Converge) && matches!(problem, ProblemSpec::Case(_)),
        "source",
        "applies only to solve/converge on a manufactured case",
    );

    // discretization
    let sigma = c.get::<f64>("sigma", "a number").unwrap_or(1.0);
    if !(sigma >= 0.0 && sigma.is_finite()) {
        c.fail("sigma", format!("sigma = {sigma} must be non-negative"));
    }
    let quad_points = c.get::<usize>("quad_points", "a positive integer");
    if quad_points == Some(0) {
        c.fail("quad_points", "`quad_points` must be at least 1");
    }
    let picard_tol = c.get::<f64>("picard_tol", "a number").unwrap_or(1e-10);
    if !(picard_tol > 0.0) {
        c.fail("picard_tol", format!("picard_tol = {picard_tol} must be positive"));
    }
    let picard_max_iters = c.get::<usize>("picard_max_iters", "a positive integer").unwrap_or(50);
    if picard_max_iters == 0 {
        c.fail("picard_max_iters", "`picard_max_iters` must be at least 1");
    }

    if let (Some(n), ProblemSpec::Case(name)) = (elements, &problem) {
        if name == "example3" && n % 4 != 0 && axis != Some(StudyAxis::Space) {
            c.fail("N", format!("example3 needs N divisible by 4 so that ±1 are element interfaces, got {n}"));
        }
    }
    if let (Some(s), ProblemSpec::Case(name)) = (&study, &problem) {
        if name == "example3" && s.axis == StudyAxis::Space && s.levels.iter().any(|n| n % 4 != 0) {
            c.fail("levels", "example3 needs every N divisible by 4");
        }
    }

    let output = c.raw("output").map(|e| e.value.clone());
    let diagnostics = c.raw("diagnostics").map(|e| e.value.clone());
    c.reject_unless(command == Command::Solve, "diagnostics", "applies only to command = solve");

    if !c.violations.is_empty() {
        return Err(ConfigError { violations: c.violations });
    }
    Ok(RunConfig {
        command,
        problem,
        beta,
        degree,
        elements,
        t_final,
        steps,
        alpha,
        source,
        sigma,
        quad_points,
        picard_tol,
        picard_max_iters,
        study,
        kernel,
        terms,
        output,
        diagnostics,
    })
}

fn axis_key(axis: StudyAxis) -> &'static str {
    axis.as_str()
}

fn format_key(f: TableFormat) -> &'static str {
    match f {
        TableFormat::Csv => "csv",
        TableFormat::Markdown => "markdown",
        TableFormat::Gnuplot => "gnuplot",
    }
}

/// Canonical text form; `parse_config(&to_text(c)) == Ok(c)`.
pub fn to_text(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[run]\ncommand = {}", cfg.command.as_str());
    let _ = writeln!(s, "\n[problem]");
    match &cfg.problem {
        ProblemSpec::Case(name) => {
            let _ = writeln!(s, "case = {name}");
        }
        ProblemSpec::Custom(p) => {
            let _ = writeln!(s, "case = custom");
            let _ = writeln!(s, "convection = {}", p.convection.as_str());
            let _ = writeln!(s, "diffusion = {}", p.diffusion.as_str());
            let _ = writeln!(s, "strength = {}", p.strength);
            let _ = writeln!(s, "initial = {}", p.initial.as_str());
            let _ = writeln!(s, "domain = {}, {}", p.domain.0, p.domain.1);
        }
    }
    if let Some(b) = cfg.beta {
        let _ = writeln!(s, "beta = {b}");
    }
    let _ = writeln!(s, "\n[time]\nT = {}\nsteps = {}", cfg.t_final, cfg.steps);
    match cfg.alpha {
        AlphaMode::Single(a) => {
            let _ = writeln!(s, "alpha = {a}");
        }
        AlphaMode::Distributed { nodes } => {
            let _ = writeln!(s, "alpha = distributed\nnodes = {nodes}\ndensity = uniform");
        }
    }
    if let Some(m) = cfg.source {
        let _ = writeln!(s, "source = {}", m.as_str());
    }
    let _ = writeln!(s, "\n[discretization]");
    if let Some(n) = cfg.elements {
        let _ = writeln!(s, "N = {n}");
    }
    if let Some(k) = cfg.degree {
        let _ = writeln!(s, "k = {k}");
    }
    let _ = writeln!(s, "sigma = {}", cfg.sigma);
    if let Some(q) = cfg.quad_points {
        let _ = writeln!(s, "quad_points = {q}");
    }
    let _ = writeln!(s, "picard_tol = {:e}\npicard_max_iters = {}", cfg.picard_tol, cfg.picard_max_iters);
    if let Some(st) = &cfg.study {
        let levels: Vec<String> = st.levels.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(
            s,
            "\n[study]\naxis = {}\nlevels = {}\nformat = {}",
            axis_key(st.axis),
            levels.join(", "),
            format_key(st.format)
        );
    }
    if cfg.command == Command::Kernels {
        let _ = writeln!(s, "\n[kernels]\nkernel = {}\nterms = {}", cfg.kernel.as_str(), cfg.terms);
    }
    if cfg.output.is_some() || cfg.diagnostics.is_some() {
        let _ = writeln!(s, "\n[output]");
        if let Some(o) = &cfg.output {
            let _ = writeln!(s, "output = {o}");
        }
        if let Some(d) = &cfg.diagnostics {
            let _ = writeln!(s, "diagnostics = {d}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(text: &str) -> Vec<String> {
        parse_config(text).unwrap_err().violations
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("command = solve\ncase = example1\nbeta = 1.8\nk = 1\nN = 40\n").unwrap();
        assert_eq!(cfg.steps, 500);
        assert_eq!(cfg.t_final, 1.0);
        assert!((cfg.dt() - 1.0 / 500.0).abs() < 1e-15);
        assert_eq!(cfg.alpha, AlphaMode::Distributed { nodes: 50 });
        assert_eq!(cfg.sigma, 1.0);
        assert_eq!(cfg.picard_tol, 1e-10);
    }

    #[test]
    fn range_errors_cite_the_interval() {
        let v = violations("command = solve\ncase = example1\nbeta = 2.5\nk = 1\nN = 40\n");
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("(1, 2)") && v[0].contains("2.5"), "{v:?}");
    }

    #[test]
    fn k_zero_cites_projection() {
        let v = violations("command = solve\ncase = example1\nbeta = 1.5\nk = 0\nN = 40\n");
        assert!(v[0].contains("projection"), "{v:?}");
    }

    #[test]
    fn all_violations_are_reported() {
        let text = "command = solve\ncase = example1\nbeta = 0.5\nk = 7\nN = 1\nalpha = 1.5\nfoo = 3\n[nowhere]\n";
        let v = violations(text);
        assert_eq!(v.len(), 6, "{v:?}");
        assert!(v.iter().any(|m| m.contains("unknown key `foo`")));
        assert!(v.iter().any(|m| m.contains("[nowhere]")));
    }

    #[test]
    fn sections_and_comments() {
        let text = "# header\n[run]\ncommand = converge # inline\n[problem]\ncase = ex2\nbeta = 1.2\n\
                    [discretization]\nk = 1\n[study]\nlevels = 10, 20, 40, 80\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.problem, ProblemSpec::Case("example2".into()));
        assert_eq!(cfg.elements, Some(10));
        assert_eq!(cfg.study.unwrap().levels, vec![10, 20, 40, 80]);
        let v = violations("[time]\nbeta = 1.5\ncommand = solve\n");
        assert!(v.iter().any(|m| m.contains("belongs in [problem]")), "{v:?}");
    }

    #[test]
    fn dt_sets_steps() {
        let cfg = parse_config("command = solve\ncase = example3\nbeta = 1.5\nk = 2\nN = 16\ndt = 0.005\n").unwrap();
        assert_eq!(cfg.steps, 100);
        assert!(!violations("command = solve\ncase = example3\nbeta = 1.5\nk = 2\nN = 16\ndt = 0.003\n").is_empty());
        assert!(!violations("command = solve\ncase = example3\nbeta = 1.5\nk = 2\nN = 10\n").is_empty());
    }

    #[test]
    fn kernels_need_no_problem() {
        let cfg = parse_config("command = kernels\nkernel = l1\nalpha = 0.5\nterms = 3\n").unwrap();
        assert_eq!(cfg.alpha, AlphaMode::Single(0.5));
        assert_eq!(cfg.terms, 3);
        assert!(!violations("command = kernels\nkernel = riesz\n").is_empty());
    }

    #[test]
    fn presets_only_for_custom() {
        let cfg = parse_config(
            "command = stability\ncase = custom\nconvection = quartic\ndiffusion = none\nbeta = 1.4\nk = 2\nN = 8\n",
        )
        .unwrap();
        match cfg.problem {
            ProblemSpec::Custom(p) => {
                assert_eq!(p.convection, ConvectionPreset::Quartic);
                assert_eq!(p.diffusion, DiffusionPreset::None);
            }
            other => panic!("{other:?}"),
        }
        let v = violations("command = solve\ncase = example1\nconvection = burgers\nbeta = 1.4\nk = 2\nN = 8\n");
        assert!(v[0].contains("custom"), "{v:?}");
        assert!(
            !violations("command = solve\ncase = custom\nconvection = cubic\nbeta = 1.4\nk = 2\nN = 8\n").is_empty()
        );
    }

    #[test]
    fn round_trip() {
        let texts = [
            "command = solve\ncase = example1\nbeta = 1.8\nk = 1\nN = 40\ndiagnostics = d.txt\noutput = o.csv\n",
            "command = converge\ncase = example3\nbeta = 1.3\nk = 4\nN = 48\nsteps = 100\naxis = p\nlevels = 10,20\nformat = markdown\n",
            "command = stability\ncase = custom\nconvection = linear\nstrength = 0.25\ninitial = zero\ndomain = -2, 3.5\nbeta = 1.7\nk = 3\nN = 9\nalpha = 0.3\nsigma = 2.5\nquad_points = 7\npicard_tol = 1e-12\n",
            "command = kernels\nkernel = riesz\ncase = example2\nbeta = 1.25\nk = 2\nN = 4\nT = 0.75\nsource = l1\n",
        ];
        for (i, t) in texts.iter().enumerate() {
            let a = match parse_config(t) {
                Ok(a) => a,
                Err(e) if i == 3 => {
                    assert!(e.violations.iter().any(|m| m.contains("source")));
                    continue;
                }
                Err(e) => panic!("{e}"),
            };
            let b = parse_config(&to_text(&a)).unwrap();
            assert_eq!(a, b);
        }
    }
}
