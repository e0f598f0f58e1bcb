use std::fmt;
use std::sync::Arc;

use crate::basis::{adaptive_integrate, gauss_rule, legendre_table, Mesh1D};
use crate::error::{Error, Result};

/// Convection flux `F` with `F(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convection {
    None,
    /// `F(v) = c·v`
    Linear {
        speed: f64,
    },
    /// `F(v) = v²/2`
    Burgers,
    /// `F(v) = v⁴/2 + v`
    QuarticPlusLinear,
}

impl Convection {
    pub fn value(&self, v: f64) -> f64 {
        match *self {
            Convection::None => 0.0,
            Convection::Linear { speed } => speed * v,
            Convection::Burgers => 0.5 * v * v,
            Convection::QuarticPlusLinear => 0.5 * v.powi(4) + v,
        }
    }

    pub fn deriv(&self, v: f64) -> f64 {
        match *self {
            Convection::None => 0.0,
            Convection::Linear { speed } => speed,
            Convection::Burgers => v,
            Convection::QuarticPlusLinear => 2.0 * v.powi(3) + 1.0,
        }
    }

    /// Flux potential `ψ(v) = ∫_0^v F(u) du`.
    pub fn potential(&self, v: f64) -> f64 {
        match *self {
            Convection::None => 0.0,
            Convection::Linear { speed } => 0.5 * speed * v * v,
            Convection::Burgers => v.powi(3) / 6.0,
            Convection::QuarticPlusLinear => v.powi(5) / 10.0 + 0.5 * v * v,
        }
    }

    /// `max |F'|` over the interval spanned by `a` and `b`.
    pub fn max_speed(&self, a: f64, b: f64) -> f64 {
        // F' is monotone for every variant, so |F'| peaks at an endpoint.
        self.deriv(a).abs().max(self.deriv(b).abs())
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Convection::None | Convection::Linear { .. })
    }
}

/// Diffusion coefficient `S(v) ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusion {
    None,
    Constant(f64),
    /// `S(v) = v²`
    Quadratic,
}

impl Diffusion {
    pub fn value(&self, v: f64) -> f64 {
        match *self {
            Diffusion::None => 0.0,
            Diffusion::Constant(c) => c,
            Diffusion::Quadratic => v * v,
        }
    }

    pub fn sqrt_value(&self, v: f64) -> f64 {
        match *self {
            Diffusion::None => 0.0,
            Diffusion::Constant(c) => c.sqrt(),
            Diffusion::Quadratic => v.abs(),
        }
    }

    /// `S'(v)`.
    pub fn deriv(&self, v: f64) -> f64 {
        match *self {
            Diffusion::Quadratic => 2.0 * v,
            _ => 0.0,
        }
    }

    /// `φ(v) = ∫_0^v √S(u) du` in closed form.
    pub fn phi(&self, v: f64) -> f64 {
        match *self {
            Diffusion::None => 0.0,
            Diffusion::Constant(c) => c.sqrt() * v,
            Diffusion::Quadratic => 0.5 * v * v.abs(),
        }
    }

    pub fn is_active(&self) -> bool {
        match *self {
            Diffusion::None => false,
            Diffusion::Constant(c) => c != 0.0,
            Diffusion::Quadratic => true,
        }
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, Diffusion::Quadratic)
    }
}

/// `φ(v) = ∫_0^v √S(u) du` for an arbitrary non-negative `S`, by adaptive
/// quadrature (tolerance `1e−12`).
pub fn phi_transform<S: Fn(f64) -> f64>(s: S, v: f64) -> Result<f64> {
    if v == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if v > 0.0 { (0.0, v) } else { (v, 0.0) };
    // reject negative samples on a coarse grid before integrating
    for i in 0..=32 {
        let u = lo + (hi - lo) * i as f64 / 32.0;
        let su = s(u);
        if su < 0.0 {
            return Err(Error::domain(format!("diffusion coefficient S({u}) = {su} is negative")));
        }
    }
    let integral = adaptive_integrate(|u| s(u).max(0.0).sqrt(), lo, hi, 1e-12)?;
    Ok(if v > 0.0 { integral } else { -integral })
}

/// Forcing term of the PDE.
pub trait SourceTerm: Send + Sync {
    /// `g(x, t)` at step `step` (`t = t_step`).
    fn value(&self, x: f64, t: f64, step: usize) -> f64;

    /// Load vector `(g(·,t), ζ_{i,s})`, row index `s(k+1)+i`. The default uses
    /// `order + 3` Gauss points per element.
    fn load(&self, mesh: &Mesh1D, order: usize, t: f64, step: usize, out: &mut [f64]) {
        gauss_load(mesh, order, order + 3, out, |x| self.value(x, t, step));
    }
}

impl<F> SourceTerm for F
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn value(&self, x: f64, t: f64, _step: usize) -> f64 {
        self(x, t)
    }
}

/// Writes `(f, ζ_{i,s})` into `out` using `points` Gauss nodes per element.
pub fn gauss_load<F: Fn(f64) -> f64>(mesh: &Mesh1D, order: usize, points: usize, out: &mut [f64], f: F) {
    let rule = gauss_rule(points.max(1)).expect("positive point count");
    let half_h = 0.5 * mesh.h();
    let nb = order + 1;
    let mut vals = vec![0.0; nb];
    let mut ders = vec![0.0; nb];
    for s in 0..mesh.num_elements() {
        let blk = &mut out[s * nb..(s + 1) * nb];
        blk.iter_mut().for_each(|v| *v = 0.0);
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            legendre_table(r, &mut vals, &mut ders);
            let fx = f(mesh.to_physical(s, r)) * w * half_h;
            for i in 0..nb {
                blk[i] += fx * vals[i];
            }
        }
    }
}

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Dirichlet data imposed weakly through the numerical fluxes.
#[derive(Clone)]
pub struct BoundaryData {
    pub left: TimeFn,
    pub right: TimeFn,
}

impl BoundaryData {
    pub fn homogeneous() -> Self {
        Self { left: Arc::new(|_| 0.0), right: Arc::new(|_| 0.0) }
    }

    pub fn values(&self, t: f64) -> (f64, f64) {
        ((self.left)(t), (self.right)(t))
    }
}

impl Default for BoundaryData {
    fn default() -> Self {
        Self::homogeneous()
    }
}

/// `𝔇_t V + F(V)_x − (S(V)V_x)_x + b(−Δ)^{β/2} V = g` on a bounded interval.
#[derive(Clone)]
pub struct PdeProblem {
    pub convection: Convection,
    pub diffusion: Diffusion,
    /// Fractional diffusion strength `b ≥ 0`.
    pub b: f64,
    /// Spatial order `β ∈ (1, 2)`.
    pub beta: f64,
    pub source: Option<Arc<dyn SourceTerm>>,
    pub initial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub boundary: BoundaryData,
}

impl PdeProblem {
    /// Problem with zero initial data, no source, and homogeneous boundary data.
    pub fn new(convection: Convection, diffusion: Diffusion, b: f64, beta: f64) -> Self {
        Self {
            convection,
            diffusion,
            b,
            beta,
            source: None,
            initial: Arc::new(|_| 0.0),
            boundary: BoundaryData::homogeneous(),
        }
    }

    pub fn with_initial<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, f: F) -> Self {
        self.initial = Arc::new(f);
        self
    }

    pub fn with_source<S: SourceTerm + 'static>(mut self, g: S) -> Self {
        self.source = Some(Arc::new(g));
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryData) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::domain(format!("fractional strength b must be non-negative, got {}", self.b)));
        }
        if self.b > 0.0 && !(self.beta > 1.0 && self.beta < 2.0) {
            return Err(Error::domain(format!("spatial order beta must lie in (1, 2), got {}", self.beta)));
        }
        if let Diffusion::Constant(c) = self.diffusion {
            if !(c >= 0.0) {
                return Err(Error::domain(format!("diffusion coefficient must be non-negative, got {c}")));
            }
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.convection.is_linear() && self.diffusion.is_constant()
    }
}

impl fmt::Debug for PdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeProblem")
            .field("convection", &self.convection)
            .field("diffusion", &self.diffusion)
            .field("b", &self.b)
            .field("beta", &self.beta)
            .field("source", &self.source.as_ref().map(|_| ".."))
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert!((phi_transform(|_| 1.0, 0.7).unwrap() - 0.7).abs() < 1e-14);
        assert_eq!(phi_transform(|_| 0.0, 0.7).unwrap(), 0.0);
        assert!((phi_transform(|u| u * u, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(phi_transform(|u| u - 1.0, 2.0).is_err());
        for &v in &[-1.5, -0.2, 0.0, 0.4, 2.0] {
            let q = phi_transform(|u| Diffusion::Quadratic.value(u), v).unwrap();
            assert!((Diffusion::Quadratic.phi(v) - q).abs() < 1e-12);
            let q = phi_transform(|_| 2.5, v).unwrap();
            assert!((Diffusion::Constant(2.5).phi(v) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn flux_functions_vanish_at_zero() {
        for c in
            [Convection::None, Convection::Linear { speed: -2.0 }, Convection::Burgers, Convection::QuarticPlusLinear]
        {
            assert_eq!(c.value(0.0), 0.0);
            assert_eq!(c.potential(0.0), 0.0);
            let (v, eps) = (0.37, 1e-6);
            let fd = (c.value(v + eps) - c.value(v - eps)) / (2.0 * eps);
            assert!((fd - c.deriv(v)).abs() < 1e-8);
            let fd = (c.potential(v + eps) - c.potential(v - eps)) / (2.0 * eps);
            assert!((fd - c.value(v)).abs() < 1e-8);
        }
    }

    #[test]
    fn validation() {
        assert!(PdeProblem::new(Convection::Burgers, Diffusion::None, -1.0, 1.5).validate().is_err());
        assert!(PdeProblem::new(Convection::Burgers, Diffusion::None, 1.0, 2.5).validate().is_err());
        assert!(PdeProblem::new(Convection::Burgers, Diffusion::None, 0.0, 2.5).validate().is_ok());
        assert!(PdeProblem::new(Convection::None, Diffusion::Constant(-1.0), 0.0, 1.5).validate().is_err());
    }

    #[test]
    fn closure_source_load_integrates_constant() {
        let mesh = Mesh1D::new(0.0, 2.0, 4).unwrap();
        let g = |_x: f64, t: f64| 3.0 * t;
        let mut out = vec![0.0; 8];
        g.load(&mesh, 1, 2.0, 0, &mut out);
        assert!((out[0] - 3.0).abs() < 1e-14 && out[1].abs() < 1e-14);
    }
}
