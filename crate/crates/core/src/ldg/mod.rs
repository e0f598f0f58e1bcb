//! LDG spatial discretization: problem description, numerical fluxes, mass
//! matrix, auxiliary variables `L`, `R`, `E`, the weak residual, and its
//! frozen-coefficient linearization.

mod flux;
mod operators;
mod problem;

pub use flux::{convection_flux, llf_speed, FluxSpec};
pub use operators::{assemble_mass, LdgOperator};
pub use problem::{gauss_load, phi_transform, BoundaryData, Convection, Diffusion, PdeProblem, SourceTerm, TimeFn};
