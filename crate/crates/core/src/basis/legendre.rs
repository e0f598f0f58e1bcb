use crate::error::{Error, Result};

/// Value and first derivative of `P_n` at `x` by the three-term recurrence.
///
/// The derivative uses `P'_{n+1} = P'_{n-1} + (2n+1) P_n`, which stays finite
/// at the endpoints.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for m in 1..n {
        let mf = m as f64;
        let p_next = ((2.0 * mf + 1.0) * x * p - mf * p_prev) / (mf + 1.0);
        let d_next = d_prev + (2.0 * mf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// `P_n(x)`.
pub fn legendre(n: usize, x: f64) -> f64 {
    legendre_with_derivative(n, x).0
}

/// Fills `values[p] = P_p(x)` and `derivs[p] = P'_p(x)` for `p = 0..values.len()`.
pub fn legendre_table(x: f64, values: &mut [f64], derivs: &mut [f64]) {
    let len = values.len();
    debug_assert_eq!(len, derivs.len());
    if len == 0 {
        return;
    }
    values[0] = 1.0;
    derivs[0] = 0.0;
    if len == 1 {
        return;
    }
    values[1] = x;
    derivs[1] = 1.0;
    for m in 1..len - 1 {
        let mf = m as f64;
        values[m + 1] = ((2.0 * mf + 1.0) * x * values[m] - mf * values[m - 1]) / (mf + 1.0);
        derivs[m + 1] = derivs[m - 1] + (2.0 * mf + 1.0) * values[m];
    }
}

/// Checked evaluation of `P_n` (`deriv = 0`) or `P_n'` (`deriv = 1`) on `[-1, 1]`.
pub fn legendre_eval(n: i64, x: f64, deriv: u32) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("legendre degree must be non-negative, got {n}")));
    }
    if !(x.abs() <= 1.0 + 1e-14) {
        return Err(Error::domain(format!("legendre argument {x} outside [-1, 1]")));
    }
    let (p, dp) = legendre_with_derivative(n as usize, x);
    match deriv {
        0 => Ok(p),
        1 => Ok(dp),
        other => Err(Error::domain(format!("derivative order {other} not supported"))),
    }
}

/// `∫_{-1}^{1} P_n^2 = 2 / (2n + 1)`.
pub fn legendre_norm_sq(n: usize) -> f64 {
    2.0 / (2.0 * n as f64 + 1.0)
}

/// Monomial coefficients of `P_n(2y - 1)`, the Legendre polynomial shifted to `[0, 1]`.
///
/// `P*_n(y) = Σ_j (-1)^{n+j} C(n, j) C(n+j, j) y^j`.
pub fn shifted_legendre_coeffs(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let sign = if (n + j).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(n, j) * binomial(n + j, j)
        })
        .collect()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}
