//! Implicit time marching: distributed-order history sums, Picard iteration
//! on the LDG residual, and stability diagnostics.

mod config;
mod history;
mod stepper;

pub use config::SolverConfig;
pub use history::{history_rhs, HistoryBuffer, HistoryWeights};
pub use stepper::{run, stability_run, write_diagnostics, RunSummary, Solver, StabilityReport, StepReport};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Mesh1D;
    use crate::kernels::{caputo_l1_apply, FractionalOrder, TimeGrid};
    use crate::ldg::{Convection, Diffusion, PdeProblem};
    use std::f64::consts::PI;

    fn bump(x: f64) -> f64 {
        if x.abs() < 1.0 {
            (1.0 - x * x).powi(4) / 10.0
        } else {
            0.0
        }
    }

    fn config(t: f64, steps: usize, order: FractionalOrder) -> SolverConfig {
        SolverConfig::new(TimeGrid::new(t, steps).unwrap(), order)
    }

    #[test]
    fn zero_problem_stays_zero() {
        let mesh = Mesh1D::new(-1.0, 1.0, 8).unwrap();
        let p = PdeProblem::new(Convection::Burgers, Diffusion::Constant(1.0), 1.0, 1.5);
        let s = run(&p, &mesh, 2, config(1.0, 10, FractionalOrder::distributed_uniform(4))).unwrap();
        assert!(s.norms.iter().all(|&n| n == 0.0));
        assert!(s.final_state.coeffs().iter().all(|&c| c == 0.0));
        let rep = stability_run(&p, &mesh, 2, config(1.0, 10, FractionalOrder::Single(0.5))).unwrap();
        assert!(rep.is_monotone());
    }

    #[test]
    fn linear_heat_spatial_order() {
        // V = t² sin(πx) with a source built from the discrete Caputo operator,
        // so only the spatial error remains.
        let (alpha, steps, t_final) = (0.6, 10usize, 1.0);
        let dt = t_final / steps as f64;
        let samples: Vec<f64> = (0..=steps).map(|j| (j as f64 * dt).powi(2)).collect();
        let dcap: Vec<f64> = (0..=steps)
            .map(|n| if n == 0 { 0.0 } else { caputo_l1_apply(&samples[..=n], alpha, dt).unwrap() })
            .collect();
        for k in 1..=2 {
            let mut errs = vec![];
            for &n in &[8usize, 16, 32] {
                let dcap = dcap.clone();
                let g = move |x: f64, t: f64| {
                    let j = (t / dt).round() as usize;
                    (dcap[j] + PI * PI * t * t) * (PI * x).sin()
                };
                let p = PdeProblem::new(Convection::None, Diffusion::Constant(1.0), 0.0, 1.5).with_source(g);
                let mesh = Mesh1D::new(0.0, 1.0, n).unwrap();
                let s = run(&p, &mesh, k, config(t_final, steps, FractionalOrder::Single(alpha))).unwrap();
                assert!(s.reports.iter().all(|r| r.iterations == 1));
                errs.push(s.final_state.l2_error(|x| (PI * x).sin()));
            }
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!((order - (k + 1) as f64).abs() < 0.3, "k={k}: order {order}");
            }
        }
    }

    #[test]
    fn burgers_fractional_is_stable_and_deterministic() {
        let mesh = Mesh1D::new(-2.0, 2.0, 16).unwrap();
        for &beta in &[1.2, 1.8] {
            let p = PdeProblem::new(Convection::Burgers, Diffusion::None, 1.0, beta).with_initial(bump);
            let cfg = config(0.5, 60, FractionalOrder::distributed_uniform(10));
            let rep = stability_run(&p, &mesh, 2, cfg.clone()).unwrap();
            assert!(rep.is_monotone(), "beta {beta}: {:?}", rep.first_violation);
            let a = run(&p, &mesh, 2, cfg.clone()).unwrap();
            let b = run(&p, &mesh, 2, cfg).unwrap();
            assert_eq!(a.final_state.coeffs(), b.final_state.coeffs());
            assert!(a.reports.iter().all(|r| r.iterations <= 10));
        }
    }

    #[test]
    fn heat_norm_strictly_decreases() {
        let mesh = Mesh1D::new(0.0, 1.0, 10).unwrap();
        let p = PdeProblem::new(Convection::None, Diffusion::Constant(1.0), 0.0, 1.5).with_initial(|x| (PI * x).sin());
        let rep = stability_run(&p, &mesh, 2, config(0.2, 40, FractionalOrder::Single(0.7))).unwrap();
        assert!(rep.norms.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn picard_limit_reports_nonconvergence() {
        let mesh = Mesh1D::new(-2.0, 2.0, 8).unwrap();
        let p = PdeProblem::new(Convection::Burgers, Diffusion::None, 1.0, 1.5).with_initial(bump);
        let mut cfg = config(0.5, 5, FractionalOrder::Single(0.5));
        cfg.picard_max_iters = 1;
        let err = run(&p, &mesh, 1, cfg).unwrap_err();
        assert!(err.is_nonconvergence());
        assert!(matches!(err, crate::Error::Step { step: 1, .. }));
    }

    #[test]
    fn stability_requires_source_free_problem() {
        let mesh = Mesh1D::new(0.0, 1.0, 4).unwrap();
        let p = PdeProblem::new(Convection::None, Diffusion::Constant(1.0), 0.0, 1.5).with_source(|_: f64, _: f64| 1.0);
        assert!(stability_run(&p, &mesh, 1, config(1.0, 2, FractionalOrder::Single(0.5))).is_err());
    }

    #[test]
    fn diagnostics_lines() {
        let r = StepReport { step: 3, t: 0.25, iterations: 2, residual: 1e-12, norm: 0.5 };
        let mut out = Vec::new();
        write_diagnostics(&[r], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let line = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0], "3");
        assert_eq!(fields[2], "2");
    }
}
