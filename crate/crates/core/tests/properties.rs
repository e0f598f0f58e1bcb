use fracldg::basis::GridFunction;
use fracldg::march::{history_rhs, HistoryBuffer};
use fracldg::mms::example3;
use fracldg::{
    run, stability_run, Convection, Diffusion, DistributedRule, FluxSpec, FractionalOrder, Mesh1D, PdeProblem,
    SolverConfig, TimeGrid,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn bump_problem(beta: f64) -> PdeProblem {
    let case = example3();
    let profile = case.profile.clone();
    PdeProblem::new(Convection::Burgers, Diffusion::Constant(1.0), 1.0, beta).with_initial(move |x| profile.eval(x))
}

fn config(steps: usize, order: FractionalOrder) -> SolverConfig {
    SolverConfig::new(TimeGrid::new(0.5, steps).unwrap(), order)
}

#[test]
fn unforced_norm_never_grows() {
    let mesh = Mesh1D::new(-2.0, 2.0, 16).unwrap();
    let orders = [FractionalOrder::Single(0.3), FractionalOrder::Single(0.8), FractionalOrder::distributed_uniform(20)];
    for k in [1, 2] {
        for beta in [1.2, 1.5, 1.8] {
            for order in &orders {
                let r = stability_run(&bump_problem(beta), &mesh, k, config(100, order.clone())).unwrap();
                assert!(r.is_monotone(), "k={k} beta={beta} {order:?}: {:?}", r.first_violation);
                let bound = r.norms[0] * (1.0 + 1e-10);
                assert!(r.norms.iter().all(|&n| n <= bound));
            }
        }
    }
}

#[test]
fn stability_is_insensitive_to_penalty() {
    let mesh = Mesh1D::new(-2.0, 2.0, 16).unwrap();
    let mut finals = Vec::new();
    for sigma in [0.5, 1.0, 2.0, 4.0] {
        let mut c = config(50, FractionalOrder::distributed_uniform(10));
        c.flux = FluxSpec::new(sigma).unwrap();
        let r = stability_run(&bump_problem(1.5), &mesh, 2, c).unwrap();
        assert!(r.is_monotone(), "sigma={sigma}");
        finals.push(*r.norms.last().unwrap());
    }
    let spread =
        finals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - finals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-3 * finals[0], "{finals:?}");
}

#[test]
fn identical_configs_give_identical_trajectories() {
    let mesh = Mesh1D::new(-2.0, 2.0, 12).unwrap();
    let go = || run(&bump_problem(1.7), &mesh, 2, config(30, FractionalOrder::distributed_uniform(8))).unwrap();
    let (a, b) = (go(), go());
    assert_eq!(a.final_state.coeffs(), b.final_state.coeffs());
    assert_eq!(a.norms, b.norms);
}

#[test]
fn history_sum_is_linear() {
    let mesh = Mesh1D::new(0.0, 1.0, 5).unwrap();
    let k = 2;
    let n = 7;
    let rule = DistributedRule::from_order(&FractionalOrder::distributed_uniform(6), 0.01, n).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    let mut random = || {
        let c: Vec<f64> = (0..mesh.num_elements() * (k + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
        GridFunction::from_coeffs(mesh, k, c).unwrap()
    };
    let xs: Vec<GridFunction> = (0..n).map(|_| random()).collect();
    let ys: Vec<GridFunction> = (0..n).map(|_| random()).collect();
    let (a, b) = (0.7, -1.3);
    let build = |states: Vec<GridFunction>| {
        let mut it = states.into_iter();
        let mut h = HistoryBuffer::new(it.next().unwrap());
        for s in it {
            h.push(s).unwrap();
        }
        h
    };
    let combo: Vec<GridFunction> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let mut z = x.clone();
            z.coeffs_mut().iter_mut().for_each(|c| *c *= a);
            z.add_scaled(b, y);
            z
        })
        .collect();
    let hx = history_rhs(&build(xs), &rule, n).unwrap();
    let hy = history_rhs(&build(ys), &rule, n).unwrap();
    let hz = history_rhs(&build(combo), &rule, n).unwrap();
    for ((z, x), y) in hz.coeffs().iter().zip(hx.coeffs()).zip(hy.coeffs()) {
        assert!((z - (a * x + b * y)).abs() < 1e-13);
    }
}

#[test]
fn zero_data_stays_zero_with_riesz_coupling() {
    let mesh = Mesh1D::new(-1.0, 1.0, 8).unwrap();
    let p = PdeProblem::new(Convection::QuarticPlusLinear, Diffusion::Quadratic, 1.0, 1.4);
    let r = run(&p, &mesh, 3, config(10, FractionalOrder::Single(0.5))).unwrap();
    assert!(r.norms.iter().all(|&n| n == 0.0));
}
