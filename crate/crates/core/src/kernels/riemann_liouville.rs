use statrs::function::gamma::{gamma, ln_gamma};

use super::polynomial::PiecewisePolynomial;
use crate::error::{Error, Result};

/// Side from which a Riemann–Liouville integral accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `(1/Γ(μ)) ∫_{-∞}^x (x−ε)^{μ−1} f(ε) dε`
    Left,
    /// `(1/Γ(μ)) ∫_x^{∞} (ε−x)^{μ−1} f(ε) dε`
    Right,
}

/// `Γ(k+1)/Γ(k+1+μ)`, the factor in `I^μ (x−a)^k = Γ(k+1)/Γ(k+1+μ) (x−a)^{k+μ}`.
pub(crate) fn rl_monomial_factor(k: usize, mu: f64) -> f64 {
    let kf = k as f64;
    if kf + mu < 100.0 {
        gamma(kf + 1.0) / gamma(kf + 1.0 + mu)
    } else {
        (ln_gamma(kf + 1.0) - ln_gamma(kf + 1.0 + mu)).exp()
    }
}

/// RL integral of order `mu` of the one-sided monomial `(x−a)^k_+` (left) or
/// `(a−x)^k_+` (right), evaluated at `x`.
pub fn rl_integral_shifted_monomial(a: f64, k: usize, mu: f64, x: f64, dir: Direction) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!("integral order must be positive, got {mu}")));
    }
    let dist = match dir {
        Direction::Left => x - a,
        Direction::Right => a - x,
    };
    if dist < 0.0 {
        return Err(Error::domain(format!("x = {x} lies on the wrong side of anchor {a} for a {dir:?} integral")));
    }
    Ok(rl_monomial_factor(k, mu) * dist.powf(k as f64 + mu))
}

/// `coef · (x − anchor)_+^power` (left) or `coef · (anchor − x)_+^power` (right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracTerm {
    pub anchor: f64,
    pub coef: f64,
    pub power: f64,
    pub dir: Direction,
}

impl FracTerm {
    pub fn eval(&self, x: f64) -> f64 {
        let d = match self.dir {
            Direction::Left => x - self.anchor,
            Direction::Right => self.anchor - x,
        };
        if d <= 0.0 {
            if d == 0.0 && self.power == 0.0 {
                return self.coef;
            }
            return 0.0;
        }
        self.coef * d.powf(self.power)
    }

    pub fn derivative(&self) -> FracTerm {
        let sign = match self.dir {
            Direction::Left => 1.0,
            Direction::Right => -1.0,
        };
        FracTerm { coef: sign * self.power * self.coef, power: self.power - 1.0, ..*self }
    }
}

/// Finite sum of one-sided fractional power terms; closed under
/// differentiation, used to represent RL integrals of piecewise polynomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FracExpansion {
    terms: Vec<FracTerm>,
}

impl FracExpansion {
    pub fn new(terms: Vec<FracTerm>) -> Self {
        Self { terms }.merged()
    }

    pub fn terms(&self) -> &[FracTerm] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn derivative(&self) -> Self {
        Self { terms: self.terms.iter().map(FracTerm::derivative).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| FracTerm { coef: t.coef * s, ..*t }).collect() }
    }

    pub fn extend(&mut self, other: FracExpansion) {
        self.terms.extend(other.terms);
        *self = std::mem::take(self).merged();
    }

    /// Removes and returns terms whose power equals `power`.
    pub(crate) fn split_power(&mut self, power: f64) -> Vec<FracTerm> {
        let (hit, keep): (Vec<_>, Vec<_>) = self.terms.iter().partition(|t| (t.power - power).abs() < 1e-12);
        self.terms = keep;
        hit
    }

    /// Combines terms with identical anchor, power and direction.
    fn merged(mut self) -> Self {
        let mut out: Vec<FracTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match out.iter_mut().find(|o| o.anchor == t.anchor && o.power == t.power && o.dir == t.dir) {
                Some(o) => o.coef += t.coef,
                None => out.push(t),
            }
        }
        Self { terms: out }
    }
}

/// Closed-form RL integral of order `mu` of a compactly supported piecewise
/// polynomial.
pub fn rl_integral_piecewise(f: &PiecewisePolynomial, mu: f64, dir: Direction) -> Result<FracExpansion> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!("integral order must be positive, got {mu}")));
    }
    let breaks = f.breaks();
    let mut terms = Vec::new();
    for (i, piece) in f.pieces().iter().enumerate() {
        let (a, b) = (breaks[i], breaks[i + 1]);
        let at_a = piece.coeffs();
        let at_b = piece.shifted(b - a);
        // p·1_[a,b] written as one-sided monomials anchored at a and b.
        match dir {
            Direction::Left => {
                for (j, &c) in at_a.iter().enumerate() {
                    let g = rl_monomial_factor(j, mu);
                    terms.push(FracTerm { anchor: a, coef: c * g, power: j as f64 + mu, dir });
                }
                for (j, &c) in at_b.coeffs().iter().enumerate() {
                    let g = rl_monomial_factor(j, mu);
                    terms.push(FracTerm { anchor: b, coef: -c * g, power: j as f64 + mu, dir });
                }
            }
            Direction::Right => {
                // (x−a)^j = (−1)^j (a−x)^j
                for (j, &c) in at_b.coeffs().iter().enumerate() {
                    let g = rl_monomial_factor(j, mu);
                    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                    terms.push(FracTerm { anchor: b, coef: s * c * g, power: j as f64 + mu, dir });
                }
                for (j, &c) in at_a.iter().enumerate() {
                    let g = rl_monomial_factor(j, mu);
                    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                    terms.push(FracTerm { anchor: a, coef: -s * c * g, power: j as f64 + mu, dir });
                }
            }
        }
    }
    Ok(FracExpansion::new(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::adaptive_integrate;
    use crate::kernels::polynomial::Polynomial;

    /// Left RL integral by quadrature after `w = (x−ε)^μ`, which removes the
    /// kernel singularity.
    fn left_quadrature<F: Fn(f64) -> f64>(f: F, lo: f64, x: f64, mu: f64) -> f64 {
        let upper = (x - lo).powf(mu);
        adaptive_integrate(|w| f(x - w.powf(1.0 / mu)), 0.0, upper, 1e-14).unwrap() / (mu * gamma(mu))
    }

    #[test]
    fn monomial_identities() {
        let v = rl_integral_shifted_monomial(0.0, 0, 0.5, 1.0, Direction::Left).unwrap();
        assert!((v - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        let v = rl_integral_shifted_monomial(-1.0, 3, 0.4, 0.2, Direction::Left).unwrap();
        let q = left_quadrature(|e| (e + 1.0).powi(3), -1.0, 0.2, 0.4);
        assert!((v - q).abs() < 1e-10);
        assert!(rl_integral_shifted_monomial(0.0, 1, 0.5, -1.0, Direction::Left).is_err());
        assert!(rl_integral_shifted_monomial(0.0, 1, 0.5, 1.0, Direction::Right).is_err());
        assert!(rl_integral_shifted_monomial(0.0, 1, 0.0, 1.0, Direction::Left).is_err());
    }

    #[test]
    fn semigroup() {
        // I^0.3 (I^0.7 x²) = x³/3
        for &x in &[0.2, 0.7, 1.5] {
            let inner_coef = rl_monomial_factor(2, 0.7); // I^0.7 x² = c x^{2.7}
                                                         // I^0.3 x^{2.7} = Γ(3.7)/Γ(4) x³
            let outer = gamma(3.7) / gamma(4.0);
            let v = inner_coef * outer * x * x * x;
            assert!((v - x * x * x / 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn piecewise_matches_quadrature() {
        let p = Polynomial::new(vec![0.3, -1.0, 2.0]);
        let pp = PiecewisePolynomial::new(vec![-1.0, 0.0, 0.5], vec![p.shifted(-1.0), Polynomial::new(vec![1.0, 4.0])])
            .unwrap();
        let mu = 0.35;
        let left = rl_integral_piecewise(&pp, mu, Direction::Left).unwrap();
        let right = rl_integral_piecewise(&pp, mu, Direction::Right).unwrap();
        for &x in &[-0.7, 0.0, 0.25, 0.9] {
            let ql: f64 = pp
                .breaks()
                .windows(2)
                .filter(|w| w[0] < x)
                .map(|w| {
                    let hi = w[1].min(x);
                    let g = |e: f64| (x - e).powf(mu - 1.0) * pp.eval(e);
                    if hi < x {
                        adaptive_integrate(g, w[0], hi, 1e-14).unwrap() / gamma(mu)
                    } else {
                        left_quadrature(|e| pp.eval(e), w[0], x, mu)
                    }
                })
                .sum();
            assert!((left.eval(x) - ql).abs() < 1e-10, "left at {x}");
            // Right integral by reflection: I_R f(x) = I_L f(−·)(−x).
            let qr: f64 = pp
                .breaks()
                .windows(2)
                .filter(|w| w[1] > x)
                .map(|w| {
                    let lo = w[0].max(x);
                    let g = |e: f64| (e - x).powf(mu - 1.0) * pp.eval(e);
                    if lo > x {
                        adaptive_integrate(g, lo, w[1], 1e-14).unwrap() / gamma(mu)
                    } else {
                        left_quadrature(|e| pp.eval(-e), -w[1], -x, mu)
                    }
                })
                .sum();
            assert!((right.eval(x) - qr).abs() < 1e-10, "right at {x}");
        }
    }
}
