//! Reference-element Legendre basis, Gauss quadrature, uniform meshes, and
//! piecewise-polynomial grid functions with projections, traces, and norms.

mod grid;
mod legendre;
mod mesh;
mod quadrature;

pub use grid::{gauss_radau_project, l2_project, l2_project_with, GridFunction, Side};
#[allow(unused_imports)]
pub(crate) use legendre::binomial;
pub use legendre::{
    legendre, legendre_eval, legendre_norm_sq, legendre_table, legendre_with_derivative, shifted_legendre_coeffs,
};
pub use mesh::Mesh1D;
pub use quadrature::{adaptive_integrate, gauss_jacobi_rule, gauss_rule, QuadRule};
