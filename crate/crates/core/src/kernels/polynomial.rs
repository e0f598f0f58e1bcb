use crate::basis::binomial;
use crate::error::{Error, Result};

/// Dense polynomial `Σ c_i y^i` in a local variable `y`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    pub fn derivative(&self) -> Self {
        Self { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect() }
    }

    pub fn mul(&self, other: &Polynomial) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::new(vec![1.0]), |acc, _| acc.mul(self))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Coefficients of `q(z) = p(shift + z)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let mut pw = 1.0;
            for j in (0..=i).rev() {
                out[j] += c * binomial(i, j) * pw;
                pw *= shift;
            }
        }
        Self { coeffs: out }
    }

    /// Coefficients of `q(z) = p(−z)`.
    pub fn reflected(&self) -> Self {
        Self { coeffs: self.coeffs.iter().enumerate().map(|(i, c)| if i % 2 == 0 { *c } else { -*c }).collect() }
    }
}

/// Piecewise polynomial on `breaks[0] < … < breaks[m]`, zero outside; piece `i`
/// is stored in the local variable `x − breaks[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    pieces: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::domain("need one more break than pieces and at least one piece"));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("breaks must be strictly increasing"));
        }
        Ok(Self { breaks, pieces })
    }

    /// One piece on `[a, b]` given by a polynomial in the global variable `x`.
    pub fn from_global(poly: &Polynomial, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![poly.shifted(a)])
    }

    pub fn zero() -> Self {
        Self { breaks: vec![0.0, 1.0], pieces: vec![Polynomial::zero()] }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    /// Value at `x`; at an interior break the right piece is used, the right
    /// end of the support belongs to the last piece.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x < a || x > b {
            return 0.0;
        }
        let i = self.breaks[1..].partition_point(|&br| br <= x).min(self.pieces.len() - 1);
        self.pieces[i].eval(x - self.breaks[i])
    }

    pub fn derivative(&self) -> Self {
        Self { breaks: self.breaks.clone(), pieces: self.pieces.iter().map(Polynomial::derivative).collect() }
    }

    /// Signed jumps `f(b⁺) − f(b⁻)` at every break, counting the zero extension
    /// outside the support.
    pub fn jumps(&self) -> Vec<f64> {
        let m = self.pieces.len();
        (0..=m)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { self.pieces[i - 1].eval(self.breaks[i] - self.breaks[i - 1]) };
                let right = if i == m { 0.0 } else { self.pieces[i].eval(0.0) };
                right - left
            })
            .collect()
    }

    /// Largest jump across every break, counting the zero extension outside.
    pub fn max_jump(&self) -> f64 {
        self.jumps().iter().fold(0.0, |m, j| m.max(j.abs()))
    }

    /// Pointwise product; both factors must share the same breaks.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.breaks != other.breaks {
            return Err(Error::domain("piecewise product needs identical breaks"));
        }
        Ok(Self {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().zip(&other.pieces).map(|(a, b)| a.mul(b)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { breaks: self.breaks.clone(), pieces: self.pieces.iter().map(|p| p.scale(s)).collect() }
    }

    /// Highest degree over all pieces.
    pub fn degree(&self) -> usize {
        self.pieces.iter().map(Polynomial::degree).max().unwrap_or(0)
    }
}
