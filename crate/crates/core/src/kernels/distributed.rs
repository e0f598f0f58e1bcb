use std::fmt;
use std::sync::Arc;

use super::caputo::{l1_coefficients, l1_lambda};
use crate::basis::adaptive_integrate;
use crate::error::{Error, Result};

/// Weight `W(α)` of a distributed-order derivative over `α ∈ (0, 1)`.
#[derive(Clone, Default)]
pub enum OrderDensity {
    /// `W ≡ 1`.
    #[default]
    Uniform,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl OrderDensity {
    pub fn eval(&self, alpha: f64) -> f64 {
        match self {
            OrderDensity::Uniform => 1.0,
            OrderDensity::Custom(w) => w(alpha),
        }
    }

    /// `∫_0^1 W(α) g(α) dα` by adaptive quadrature.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, tol: f64) -> Result<f64> {
        adaptive_integrate(|a| self.eval(a) * g(a), 0.0, 1.0, tol)
    }
}

impl fmt::Debug for OrderDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderDensity::Uniform => f.write_str("Uniform"),
            OrderDensity::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Time-fractional operator: a single Caputo order or a distributed order.
#[derive(Debug, Clone)]
pub enum FractionalOrder {
    Single(f64),
    Distributed { nodes: usize, density: OrderDensity },
}

impl FractionalOrder {
    pub fn distributed_uniform(nodes: usize) -> Self {
        FractionalOrder::Distributed { nodes, density: OrderDensity::Uniform }
    }
}

/// Midpoint-rule discretization of `∫_0^1 W(α) ∂_t^α dα` combined with the L1
/// scheme at every node. A single order is the special case of one node with
/// unit mass.
#[derive(Debug, Clone)]
pub struct DistributedRule {
    dt: f64,
    alphas: Vec<f64>,
    masses: Vec<f64>,
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    l1: Vec<Vec<f64>>,
}

impl DistributedRule {
    /// `m_q` midpoint nodes `α_j = (2j−1)/(2m_q)`, L1 weights prepared for
    /// `num_steps` steps of size `dt`.
    pub fn new(m_q: usize, density: &OrderDensity, dt: f64, num_steps: usize) -> Result<Self> {
        if m_q == 0 {
            return Err(Error::domain("distributed rule needs at least one node"));
        }
        let width = 1.0 / m_q as f64;
        let mut alphas = Vec::with_capacity(m_q);
        let mut masses = Vec::with_capacity(m_q);
        for j in 1..=m_q {
            let alpha = (2 * j - 1) as f64 / (2 * m_q) as f64;
            let w = density.eval(alpha);
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("order density W({alpha}) = {w} is not a non-negative number")));
            }
            alphas.push(alpha);
            masses.push(w * width);
        }
        Self::build(alphas, masses, dt, num_steps)
    }

    pub fn single(alpha: f64, dt: f64, num_steps: usize) -> Result<Self> {
        Self::build(vec![alpha], vec![1.0], dt, num_steps)
    }

    pub fn from_order(order: &FractionalOrder, dt: f64, num_steps: usize) -> Result<Self> {
        match order {
            FractionalOrder::Single(alpha) => Self::single(*alpha, dt, num_steps),
            FractionalOrder::Distributed { nodes, density } => Self::new(*nodes, density, dt, num_steps),
        }
    }

    fn build(alphas: Vec<f64>, masses: Vec<f64>, dt: f64, num_steps: usize) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        let mut lambdas = Vec::with_capacity(alphas.len());
        let mut weights = Vec::with_capacity(alphas.len());
        let mut l1 = Vec::with_capacity(alphas.len());
        for (&alpha, &mass) in alphas.iter().zip(&masses) {
            let lambda = l1_lambda(alpha, dt);
            lambdas.push(lambda);
            weights.push(mass / lambda);
            l1.push(l1_coefficients(alpha, num_steps.max(1) + 1)?);
        }
        Ok(Self { dt, alphas, masses, lambdas, weights, l1 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Largest step index the rule was prepared for.
    pub fn max_steps(&self) -> usize {
        self.l1[0].len() - 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Quadrature masses `W(α_j)·Δπ_j`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Effective weights `w_j = W(α_j)Δπ_j / λ_j`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// L1 coefficients `a_0..a_{max_steps}` of node `j`.
    pub fn l1(&self, j: usize) -> &[f64] {
        &self.l1[j]
    }

    /// `Σ_j w_j`, the coefficient of the newest state.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Q = (Σ_j w_j)^{-1}`; infinite when all weights vanish.
    pub fn q_factor(&self) -> f64 {
        1.0 / self.total_weight()
    }

    /// Discrete operator `Σ_j W(α_j)Δπ_j δ_t^{α_j} y` at the last sample.
    pub fn apply(&self, y: &[f64]) -> Result<f64> {
        if y.len() < 2 {
            return Err(Error::domain("the L1 formula needs at least two samples"));
        }
        let n = y.len() - 1;
        if n > self.max_steps() {
            return Err(Error::domain(format!("step {n} beyond prepared horizon {}", self.max_steps())));
        }
        let mut total = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            let a = &self.l1[j];
            let acc: f64 = (1..=n).map(|i| a[n - i] * (y[i] - y[i - 1])).sum();
            total += w * acc;
        }
        Ok(total)
    }
}
