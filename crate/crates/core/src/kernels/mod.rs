//! Fractional calculus kernels: Caputo L1 weights, distributed-order rules,
//! closed-form Riemann–Liouville integrals of piecewise polynomials, and the
//! Riesz fractional operator (pointwise evaluator and Galerkin matrix).

mod caputo;
mod distributed;
mod polynomial;
mod riemann_liouville;
mod riesz;

pub use caputo::{
    caputo_exp_exact, caputo_l1_apply, caputo_monomial_exact, caputo_quadrature, l1_coefficients, l1_lambda, TimeGrid,
};
pub use distributed::{DistributedRule, FractionalOrder, OrderDensity};
pub use polynomial::{PiecewisePolynomial, Polynomial};
pub use riemann_liouville::{rl_integral_piecewise, rl_integral_shifted_monomial, Direction, FracExpansion, FracTerm};
pub use riesz::{riesz_apply_to_polynomial, riesz_potential, riesz_scale, RieszDump, RieszEvaluator, RieszOperator};
