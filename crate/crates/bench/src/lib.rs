//! Shared fixtures for the criterion benchmarks in `benches/`.

use fracldg::basis::l2_project;
use fracldg::march::HistoryBuffer;
use fracldg::mms::{derive_source, example3, TimeMode};
use fracldg::{FractionalOrder, Mesh1D, Solver, SolverConfig, TimeGrid};

/// Mesh of the Example 3 domain `[−2, 2]`.
pub fn mesh(num_elements: usize) -> Mesh1D {
    Mesh1D::new(-2.0, 2.0, num_elements).expect("valid mesh")
}

/// History of `steps + 1` smooth states of degree `order`.
pub fn history(num_elements: usize, order: usize, steps: usize) -> HistoryBuffer {
    let m = mesh(num_elements);
    let state = |n: usize| l2_project(|x| (-(n as f64) * 1e-3).exp() * (-x * x).exp(), &m, order);
    let mut h = HistoryBuffer::new(state(0));
    for n in 1..=steps {
        h.push(state(n)).expect("same space");
    }
    h
}

/// Forced Burgers solver for Example 3 with `β = 1.5`, `Δt = T/steps`,
/// `p = 1/nodes`.
pub fn example3_solver(num_elements: usize, order: usize, steps: usize, nodes: usize) -> Solver {
    let case = example3();
    let beta = 1.5;
    let grid = TimeGrid::new(case.t_final, steps).expect("valid grid");
    let fractional = FractionalOrder::distributed_uniform(nodes);
    let source = derive_source(&case, beta, &fractional, TimeMode::FullyDiscrete, Some(grid)).expect("smooth case");
    let problem = case.problem(beta).with_source(source);
    Solver::new(&problem, &mesh(num_elements), order, SolverConfig::new(grid, fractional)).expect("valid solver")
}
