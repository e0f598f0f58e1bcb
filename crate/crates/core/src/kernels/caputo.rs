use statrs::function::gamma::gamma;

use crate::basis::adaptive_integrate;
use crate::error::{Error, Result};

/// Uniform time grid `t_j = j·dt` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    num_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, num_steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::domain(format!("final time must be positive, got {t_final}")));
        }
        if num_steps == 0 {
            return Err(Error::domain("number of time steps must be positive"));
        }
        Ok(Self { t_final, num_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.num_steps as f64
    }

    /// `t_j`; the last node is exactly `T`.
    pub fn t(&self, j: usize) -> f64 {
        if j == self.num_steps {
            self.t_final
        } else {
            j as f64 * self.dt()
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("fractional order alpha must lie in (0, 1], got {alpha}")))
    }
}

/// L1 weights `a_l = (l+1)^{1−α} − l^{1−α}` for `l = 0..n`.
///
/// At `α = 1` the scheme degenerates to the backward difference: `a_0 = 1`,
/// all others zero.
pub fn l1_coefficients(alpha: f64, n: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::domain("at least one L1 coefficient must be requested"));
    }
    let e = 1.0 - alpha;
    let mut a = Vec::with_capacity(n);
    a.push(1.0);
    for l in 1..n {
        if e == 0.0 {
            a.push(0.0);
        } else {
            // l^e·((1 + 1/l)^e − 1), free of cancellation for large l
            let lf = l as f64;
            a.push(lf.powf(e) * (e * (1.0 / lf).ln_1p()).exp_m1());
        }
    }
    Ok(a)
}

/// `λ = (Δt)^α Γ(2 − α)`.
pub fn l1_lambda(alpha: f64, dt: f64) -> f64 {
    dt.powf(alpha) * gamma(2.0 - alpha)
}

/// L1 approximation of the Caputo derivative at `t_n` from samples `y_0..y_n`.
pub fn caputo_l1_apply(y: &[f64], alpha: f64, dt: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if y.len() < 2 {
        return Err(Error::domain("the L1 formula needs at least two samples"));
    }
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let n = y.len() - 1;
    let a = l1_coefficients(alpha, n + 1)?;
    // Σ_j a_{n−j}(y_j − y_{j−1}): the same sum as the history form, but exactly
    // zero on constant data.
    let acc: f64 = (1..=n).map(|j| a[n - j] * (y[j] - y[j - 1])).sum();
    Ok(acc / l1_lambda(alpha, dt))
}

/// Exact Caputo derivative of `t^m`: `Γ(m+1)/Γ(m+1−α) t^{m−α}` (zero for `m = 0`).
pub fn caputo_monomial_exact(m: u32, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t < 0.0 {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    Ok(gamma(mf + 1.0) / gamma(mf + 1.0 - alpha) * t.powf(mf - alpha))
}

/// Caputo derivative of `e^{rate·t}` by its power series
/// `Σ_{k≥1} rate^k t^{k−α} / Γ(k+1−α)`.
pub fn caputo_exp_exact(rate: f64, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t < 0.0 {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(if alpha == 1.0 { rate } else { 0.0 });
    }
    let x = rate * t;
    let mut term = rate * t.powf(1.0 - alpha) / gamma(2.0 - alpha);
    let mut sum = term;
    let mut k = 1.0;
    while k < 400.0 {
        term *= x / (k + 1.0 - alpha);
        sum += term;
        k += 1.0;
        if k > x.abs() && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// Caputo derivative of `y` at `t` by adaptive quadrature of
/// `(1/Γ(1−α)) ∫_0^t y'(η)(t−η)^{−α} dη`, after the substitution
/// `w = (t−η)^{1−α}` that removes the endpoint singularity. Intended as an
/// independent oracle.
pub fn caputo_quadrature<F: Fn(f64) -> f64>(dy: F, alpha: f64, t: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t < 0.0 {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    if alpha == 1.0 {
        return Ok(dy(t));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let e = 1.0 - alpha;
    let upper = t.powf(e);
    let integral = adaptive_integrate(|w| dy(t - w.powf(1.0 / e)), 0.0, upper, tol)?;
    Ok(integral / (e * gamma(1.0 - alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_weights() {
        let a = l1_coefficients(0.5, 3).unwrap();
        assert_eq!(a[0], 1.0);
        assert!((a[1] - 0.41421356).abs() < 1e-8);
        assert!((a[2] - (3f64.sqrt() - 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(l1_coefficients(1.0, 4).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(l1_coefficients(0.0, 3).is_err());
        assert!(l1_coefficients(1.2, 3).is_err());
        let a = l1_coefficients(0.3, 2000).unwrap();
        assert!(a.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0));
        let direct = 2000f64.powf(0.7) - 1999f64.powf(0.7);
        assert!((a[1999] - direct).abs() < 1e-12);
    }

    #[test]
    fn time_grid_hits_final_time() {
        let g = TimeGrid::new(0.7, 3).unwrap();
        assert_eq!(g.t(3), 0.7);
        assert_eq!(g.t(0), 0.0);
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn l1_on_constants_and_lines() {
        let y = vec![2.5; 8];
        assert_eq!(caputo_l1_apply(&y, 0.4, 0.1).unwrap(), 0.0);
        let dt = 0.1;
        let y: Vec<f64> = (0..=5).map(|j| j as f64 * dt).collect();
        let exact = 0.5f64.powf(0.7) / gamma(1.7);
        assert!((caputo_l1_apply(&y, 0.3, dt).unwrap() - exact).abs() < 1e-13);
        assert!(caputo_l1_apply(&[1.0], 0.3, dt).is_err());
    }

    #[test]
    fn l1_order_on_t_squared() {
        let alpha = 0.5;
        let exact = caputo_monomial_exact(2, alpha, 1.0).unwrap();
        assert!((exact - 1.5045056).abs() < 1e-7);
        let errs: Vec<f64> = [40usize, 80, 160, 320]
            .iter()
            .map(|&n| {
                let dt = 1.0 / n as f64;
                let y: Vec<f64> = (0..=n).map(|j| (j as f64 * dt).powi(2)).collect();
                (caputo_l1_apply(&y, alpha, dt).unwrap() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 1.5).abs() < 0.1, "order {order}");
        }
    }

    #[test]
    fn monomial_limits() {
        assert_eq!(caputo_monomial_exact(0, 0.3, 2.0).unwrap(), 0.0);
        let v = caputo_monomial_exact(3, 0.999999, 0.8).unwrap();
        assert!((v - 3.0 * 0.64).abs() < 1e-4);
        assert!(caputo_monomial_exact(2, 0.5, -1.0).is_err());
    }

    #[test]
    fn exp_series_matches_quadrature() {
        for &alpha in &[0.1, 0.45, 0.8, 1.0] {
            for &t in &[0.05, 0.3, 0.5, 1.0] {
                let s = caputo_exp_exact(-1.0, alpha, t).unwrap();
                let q = caputo_quadrature(|x| -(-x).exp(), alpha, t, 1e-13).unwrap();
                assert!((s - q).abs() < 1e-10, "alpha {alpha} t {t}: {s} vs {q}");
            }
        }
    }

    #[test]
    fn quadrature_matches_monomial() {
        let q = caputo_quadrature(|x| 3.0 * x * x, 0.35, 0.9, 1e-13).unwrap();
        let e = caputo_monomial_exact(3, 0.35, 0.9).unwrap();
        assert!((q - e).abs() < 1e-11);
    }
}
