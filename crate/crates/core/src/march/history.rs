use crate::basis::{GridFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::kernels::DistributedRule;

/// Stored states `V⁰..V^{n−1}` (modal coefficients), append-only.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    mesh: Mesh1D,
    order: usize,
    states: Vec<Vec<f64>>,
}

impl HistoryBuffer {
    pub fn new(initial: GridFunction) -> Self {
        let (mesh, order) = (*initial.mesh(), initial.order());
        Self { mesh, order, states: vec![initial.into_coeffs()] }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn push(&mut self, state: GridFunction) -> Result<()> {
        if state.mesh() != &self.mesh || state.order() != self.order {
            return Err(Error::domain("state does not match the history's mesh and order"));
        }
        self.states.push(state.into_coeffs());
        Ok(())
    }

    pub fn state(&self, l: usize) -> &[f64] {
        &self.states[l]
    }

    pub fn latest(&self) -> &[f64] {
        self.states.last().expect("history holds the initial state")
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::domain("history sums start at step 1"));
        }
        if self.states.len() < n {
            return Err(Error::domain(format!("history holds {} states but step {n} needs {n}", self.states.len())));
        }
        Ok(())
    }
}

/// `Σ_j w_j [Σ_{l=1}^{n−1} (a^j_{n−l−1} − a^j_{n−l}) V^l + a^j_{n−1} V⁰]`,
/// evaluated node by node. Reference implementation of the history term.
pub fn history_rhs(history: &HistoryBuffer, rule: &DistributedRule, n: usize) -> Result<GridFunction> {
    history.check(n)?;
    if n > rule.max_steps() {
        return Err(Error::domain(format!("step {n} beyond prepared horizon {}", rule.max_steps())));
    }
    let dim = history.state(0).len();
    let mut out = vec![0.0; dim];
    for (j, &w) in rule.weights().iter().enumerate() {
        let a = rule.l1(j);
        let mut node = vec![0.0; dim];
        for l in 1..n {
            let c = a[n - l - 1] - a[n - l];
            axpy(&mut node, c, history.state(l));
        }
        axpy(&mut node, a[n - 1], history.state(0));
        axpy(&mut out, w, &node);
    }
    GridFunction::from_coeffs(history.mesh, history.order, out)
}

/// Precombined lag weights `c_m = Σ_j w_j (a^j_{m−1} − a^j_m)` and tails
/// `d_n = Σ_j w_j a^j_{n−1}`, so the history term costs one pass over the
/// stored states regardless of the number of order nodes.
#[derive(Debug, Clone)]
pub struct HistoryWeights {
    lags: Vec<f64>,
    tails: Vec<f64>,
}

impl HistoryWeights {
    pub fn new(rule: &DistributedRule) -> Self {
        let m = rule.max_steps();
        let mut lags = vec![0.0; m + 1];
        let mut tails = vec![0.0; m + 1];
        for (j, &w) in rule.weights().iter().enumerate() {
            let a = rule.l1(j);
            for i in 1..=m {
                lags[i] += w * (a[i - 1] - a[i]);
                tails[i] += w * a[i - 1];
            }
        }
        Self { lags, tails }
    }

    /// Same quantity as [`history_rhs`], as a raw coefficient vector.
    pub fn apply(&self, history: &HistoryBuffer, n: usize) -> Result<Vec<f64>> {
        history.check(n)?;
        if n >= self.lags.len() {
            return Err(Error::domain(format!("step {n} beyond prepared horizon {}", self.lags.len() - 1)));
        }
        let mut out = vec![0.0; history.state(0).len()];
        for l in 1..n {
            axpy(&mut out, self.lags[n - l], history.state(l));
        }
        axpy(&mut out, self.tails[n], history.state(0));
        Ok(out)
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{caputo_l1_apply, l1_lambda, OrderDensity};
    use proptest::prelude::*;

    fn scalar_history(values: &[f64]) -> HistoryBuffer {
        let mesh = Mesh1D::new(0.0, 1.0, 1).unwrap();
        let mut h = HistoryBuffer::new(GridFunction::from_coeffs(mesh, 0, vec![values[0]]).unwrap());
        for &v in &values[1..] {
            h.push(GridFunction::from_coeffs(mesh, 0, vec![v]).unwrap()).unwrap();
        }
        h
    }

    #[test]
    fn first_step_and_constants() {
        let rule = DistributedRule::new(4, &OrderDensity::Uniform, 0.01, 20).unwrap();
        let h = scalar_history(&[2.0]);
        let r = history_rhs(&h, &rule, 1).unwrap();
        assert!((r.coeffs()[0] - 2.0 * rule.total_weight()).abs() < 1e-12 * rule.total_weight());
        let h = scalar_history(&[1.5; 10]);
        let r = history_rhs(&h, &rule, 10).unwrap();
        assert!((r.coeffs()[0] - 1.5 * rule.total_weight()).abs() < 1e-12 * rule.total_weight());
        assert!(history_rhs(&h, &rule, 0).is_err());
        assert!(history_rhs(&h, &rule, 11).is_err());
    }

    #[test]
    fn single_order_reconstructs_l1() {
        let (alpha, dt) = (0.4, 0.05);
        let rule = DistributedRule::single(alpha, dt, 12).unwrap();
        let y: Vec<f64> = (0..=9).map(|j| (j as f64 * dt).powi(2)).collect();
        let h = scalar_history(&y[..9]);
        let hist = history_rhs(&h, &rule, 9).unwrap().coeffs()[0];
        // δ y_9 = (y_9 − hist·λ)/λ
        let lam = l1_lambda(alpha, dt);
        let direct = caputo_l1_apply(&y, alpha, dt).unwrap();
        assert!(((y[9] / lam - hist) - direct).abs() < 1e-14 * direct.abs().max(1.0) * 10.0);
    }

    proptest! {
        #[test]
        fn fast_path_and_linearity(
            a in proptest::collection::vec(-1.0f64..1.0, 30),
            b in proptest::collection::vec(-1.0f64..1.0, 30),
            s in -2.0f64..2.0,
        ) {
            let rule = DistributedRule::new(5, &OrderDensity::Uniform, 0.02, 40).unwrap();
            let fast = HistoryWeights::new(&rule);
            let ha = scalar_history(&a);
            let hb = scalar_history(&b);
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            let hc = scalar_history(&combo);
            for n in [1usize, 2, 17, 30] {
                let ra = history_rhs(&ha, &rule, n).unwrap().coeffs()[0];
                let rb = history_rhs(&hb, &rule, n).unwrap().coeffs()[0];
                let rc = history_rhs(&hc, &rule, n).unwrap().coeffs()[0];
                let scale = rule.total_weight();
                prop_assert!((rc - ra - s * rb).abs() < 1e-12 * scale);
                let fa = fast.apply(&ha, n).unwrap()[0];
                prop_assert!((fa - ra).abs() <= 1e-14 * scale);
            }
        }
    }
}
