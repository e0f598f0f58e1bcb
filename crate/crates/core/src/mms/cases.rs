use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernels::{caputo_exp_exact, caputo_monomial_exact, PiecewisePolynomial, Polynomial};
use crate::ldg::{BoundaryData, Convection, Diffusion, PdeProblem};

/// Time factor of a separable exact solution `V = T(t)·X(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFactor {
    /// `t^m`
    Monomial(u32),
    /// `e^{rate·t}`
    Exp { rate: f64 },
}

impl TimeFactor {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeFactor::Monomial(m) => t.powi(m as i32),
            TimeFactor::Exp { rate } => (rate * t).exp(),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match *self {
            TimeFactor::Monomial(0) => 0.0,
            TimeFactor::Monomial(m) => m as f64 * t.powi(m as i32 - 1),
            TimeFactor::Exp { rate } => rate * (rate * t).exp(),
        }
    }

    /// Caputo derivative of order `alpha` at `t`, in closed form (monomials)
    /// or by its power series (exponentials).
    pub fn caputo(&self, alpha: f64, t: f64) -> Result<f64> {
        match *self {
            TimeFactor::Monomial(m) => caputo_monomial_exact(m, alpha, t),
            TimeFactor::Exp { rate } => caputo_exp_exact(rate, alpha, t),
        }
    }
}

/// How the fractional strength `b` depends on `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strength {
    /// `b = Γ(8−β)/Γ(8)`
    GammaRatio,
    Constant(f64),
}

impl Strength {
    pub fn eval(&self, beta: f64) -> f64 {
        match *self {
            Strength::GammaRatio => gamma(8.0 - beta) / gamma(8.0),
            Strength::Constant(b) => b,
        }
    }
}

/// Manufactured problem with exact solution `V = T(t)·X(x)`, `X` a compactly
/// supported piecewise polynomial; boundary data are the exact traces.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub domain: (f64, f64),
    pub t_final: f64,
    pub time: TimeFactor,
    pub profile: PiecewisePolynomial,
    pub convection: Convection,
    pub diffusion: Diffusion,
    pub strength: Strength,
}

impl ManufacturedCase {
    pub fn exact(&self, x: f64, t: f64) -> f64 {
        self.time.value(t) * self.profile.eval(x)
    }

    pub fn initial(&self, x: f64) -> f64 {
        self.exact(x, 0.0)
    }

    pub fn b(&self, beta: f64) -> f64 {
        self.strength.eval(beta)
    }

    /// Dirichlet data `V(a,t)`, `V(b,t)` taken from the exact solution.
    pub fn boundary(&self) -> BoundaryData {
        let (a, b) = self.domain;
        let (xa, xb) = (self.profile.eval(a), self.profile.eval(b));
        let (ta, tb) = (self.time, self.time);
        BoundaryData { left: Arc::new(move |t| ta.value(t) * xa), right: Arc::new(move |t| tb.value(t) * xb) }
    }

    /// The PDE without forcing; attach a source with [`PdeProblem::with_source`].
    pub fn problem(&self, beta: f64) -> PdeProblem {
        let profile = self.profile.clone();
        let t0 = self.time.value(0.0);
        PdeProblem::new(self.convection, self.diffusion, self.b(beta), beta)
            .with_initial(move |x| t0 * profile.eval(x))
            .with_boundary(self.boundary())
    }
}

fn bump(power: u32) -> Polynomial {
    // (1 − x²)^power
    Polynomial::new(vec![1.0, 0.0, -1.0]).pow(power)
}

/// `V = t²(ξ²−1)⁴` on `[−1, 1]`, Burgers flux, `S ≡ 1`, `b = Γ(8−β)/Γ(8)`.
pub fn example1() -> ManufacturedCase {
    // (ξ²−1)⁴ = (1−ξ²)⁴
    let profile = PiecewisePolynomial::from_global(&bump(4), -1.0, 1.0).expect("valid support");
    ManufacturedCase {
        name: "example1".into(),
        domain: (-1.0, 1.0),
        t_final: 1.0,
        time: TimeFactor::Monomial(2),
        profile,
        convection: Convection::Burgers,
        diffusion: Diffusion::Constant(1.0),
        strength: Strength::GammaRatio,
    }
}

/// `V = t³(1−ξ²)²` on `[0, 1]`, `F = v⁴/2 + v`, no diffusion,
/// `b = Γ(8−β)/Γ(8)`, `V(0,t) = t³`, `V(1,t) = 0`.
pub fn example2() -> ManufacturedCase {
    let profile = PiecewisePolynomial::from_global(&bump(2), 0.0, 1.0).expect("valid support");
    ManufacturedCase {
        name: "example2".into(),
        domain: (0.0, 1.0),
        t_final: 1.0,
        time: TimeFactor::Monomial(3),
        profile,
        convection: Convection::QuarticPlusLinear,
        diffusion: Diffusion::None,
        strength: Strength::GammaRatio,
    }
}

/// `V = e^{−t}(1−ξ²)⁴/10` inside `[−1, 1]`, zero elsewhere on `[−2, 2]`,
/// Burgers flux, `b = 1`, `T = 0.5`.
pub fn example3() -> ManufacturedCase {
    let profile = PiecewisePolynomial::from_global(&bump(4).scale(0.1), -1.0, 1.0).expect("valid support");
    ManufacturedCase {
        name: "example3".into(),
        domain: (-2.0, 2.0),
        t_final: 0.5,
        time: TimeFactor::Exp { rate: -1.0 },
        profile,
        convection: Convection::Burgers,
        diffusion: Diffusion::None,
        strength: Strength::Constant(1.0),
    }
}

pub fn case_library() -> Vec<ManufacturedCase> {
    vec![example1(), example2(), example3()]
}

/// Looks a case up by name (`example1`, `ex1`, or `1`).
pub fn by_name(name: &str) -> Result<ManufacturedCase> {
    let key = name.trim().to_ascii_lowercase();
    let idx = key.strip_prefix("example").or_else(|| key.strip_prefix("ex")).unwrap_or(&key);
    match idx {
        "1" => Ok(example1()),
        "2" => Ok(example2()),
        "3" => Ok(example3()),
        _ => Err(Error::domain(format!("unknown case '{name}' (expected example1, example2 or example3)"))),
    }
}
