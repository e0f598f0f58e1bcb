//! Manufactured-solution verification: the three reference cases, exact
//! forcing terms, convergence studies in `h`, `Δt` and `p`, and table output.

mod cases;
mod source;
mod study;
mod table;

pub use cases::{by_name, case_library, example1, example2, example3, ManufacturedCase, Strength, TimeFactor};
pub use source::{derive_source, ManufacturedSource, TimeMode};
pub use study::{convergence_study, default_mode, solve_case, CaseRun, StudyParams};
pub use table::{emit_table, format_error, observed_order, ConvergenceTable, StudyAxis, TableFormat, TableRow};
