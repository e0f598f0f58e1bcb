use crate::error::{Error, Result};
use crate::kernels::{FractionalOrder, TimeGrid};
use crate::ldg::FluxSpec;

/// Time-marching and nonlinear-solver settings.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub time: TimeGrid,
    pub order: FractionalOrder,
    /// Relative l² change of the coefficient vector that ends a Picard loop.
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub flux: FluxSpec,
    /// Gauss points per element for nonlinear terms; `None` means `k + 2`.
    pub quad_points: Option<usize>,
}

impl SolverConfig {
    pub fn new(time: TimeGrid, order: FractionalOrder) -> Self {
        Self { time, order, picard_tol: 1e-10, picard_max_iters: 50, flux: FluxSpec::default(), quad_points: None }
    }

    pub fn quad_points_for(&self, order: usize) -> usize {
        self.quad_points.unwrap_or(order + 2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0) {
            return Err(Error::domain(format!("picard tolerance must be positive, got {}", self.picard_tol)));
        }
        if self.picard_max_iters == 0 {
            return Err(Error::domain("picard iteration limit must be at least 1"));
        }
        match &self.order {
            FractionalOrder::Single(a) if !(*a > 0.0 && *a <= 1.0) => {
                Err(Error::domain(format!("fractional order alpha must lie in (0, 1], got {a}")))
            }
            FractionalOrder::Distributed { nodes: 0, .. } => {
                Err(Error::domain("distributed order needs at least one quadrature node"))
            }
            _ => Ok(()),
        }
    }
}
