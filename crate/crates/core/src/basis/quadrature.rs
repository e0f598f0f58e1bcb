//! Quadrature rules on `[-1, 1]`: Gauss–Legendre, Gauss–Jacobi, and an adaptive
//! Gauss–Kronrod integrator for integrals with no fixed polynomial degree.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use super::legendre::legendre_with_derivative;
use crate::error::{Error, Result};

/// Nodes and positive weights of a quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` with the affine image of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(mid + half * r)).sum::<f64>()
    }
}

/// `q`-point Gauss–Legendre rule, exact for polynomials of degree `2q - 1`.
pub fn gauss_rule(q: usize) -> Result<QuadRule> {
    if q == 0 {
        return Err(Error::domain("gauss rule needs at least one point"));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_q.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(q, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Ok(QuadRule { nodes, weights })
}

/// Gauss–Jacobi rule for the weight `(1 - r)^a (1 + r)^b` on `[-1, 1]`
/// (Golub–Welsch). Exact for `weight × polynomial` up to degree `2q - 1`.
pub fn gauss_jacobi_rule(q: usize, a: f64, b: f64) -> Result<QuadRule> {
    if q == 0 {
        return Err(Error::domain("gauss-jacobi rule needs at least one point"));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::domain(format!("jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    let mut jac = DMatrix::<f64>::zeros(q, q);
    for n in 0..q {
        let nf = n as f64;
        let s = 2.0 * nf + a + b;
        jac[(n, n)] = if n == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
        if n + 1 < q {
            let m = nf + 1.0;
            let s1 = 2.0 * m + a + b;
            let off = (4.0 * m * (m + a) * (m + b) * (m + a + b) / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0))).sqrt();
            jac[(n, n + 1)] = off;
            jac[(n + 1, n)] = off;
        }
    }
    let mu0 =
        ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(QuadRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GK_GAUSS_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * GK_KRONROD_WEIGHTS[7];
    let mut gauss = fc * GK_GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += GK_KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GK_GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subintervals are bisected until each local error estimate falls below its
/// share of `tol` (absolute). Errors if the recursion exhausts its depth.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gk15(&f, a, b);
    adaptive_step(&f, a, b, value, err, tol.max(1e-300), 0)
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    // Accept once the estimate is below tolerance or the interval has
    // shrunk to round-off scale.
    if err <= tol || err <= 50.0 * f64::EPSILON * whole.abs() {
        return Ok(whole);
    }
    if depth >= 60 {
        return Err(Error::domain(format!(
            "adaptive quadrature did not reach {tol:.1e} on [{a}, {b}] (estimate {err:.1e})"
        )));
    }
    let mid = 0.5 * (a + b);
    let (left, el) = gk15(f, a, mid);
    let (right, er) = gk15(f, mid, b);
    Ok(adaptive_step(f, a, mid, left, el, 0.5 * tol, depth + 1)?
        + adaptive_step(f, mid, b, right, er, 0.5 * tol, depth + 1)?)
}
