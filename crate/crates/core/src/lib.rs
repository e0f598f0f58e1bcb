//! Local discontinuous Galerkin solver for one-dimensional nonlinear
//! convection–diffusion equations with a (distributed-order) Caputo time
//! derivative and a Riesz fractional Laplacian in space.
//!
//! ```
//! use fracldg::{Convection, Diffusion, FractionalOrder, Mesh1D, PdeProblem, SolverConfig, TimeGrid};
//!
//! let problem = PdeProblem::new(Convection::Burgers, Diffusion::None, 1.0, 1.5)
//!     .with_initial(|x: f64| (1.0 - x * x).max(0.0).powi(4) / 10.0);
//! let mesh = Mesh1D::new(-2.0, 2.0, 8).unwrap();
//! let config = SolverConfig::new(TimeGrid::new(0.1, 5).unwrap(), FractionalOrder::distributed_uniform(10));
//! let run = fracldg::run(&problem, &mesh, 1, config).unwrap();
//! assert!(run.norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod basis;
pub mod error;
pub mod kernels;
pub mod ldg;
pub mod march;
pub mod mms;

pub use basis::{GridFunction, Mesh1D};
pub use error::{Error, Result};
pub use kernels::{DistributedRule, FractionalOrder, OrderDensity, RieszOperator, TimeGrid};
pub use ldg::{BoundaryData, Convection, Diffusion, FluxSpec, LdgOperator, PdeProblem, SourceTerm};
pub use march::{run, stability_run, RunSummary, Solver, SolverConfig, StabilityReport};
pub use mms::{ConvergenceTable, ManufacturedCase, StudyAxis, StudyParams, TimeMode};
