use super::legendre::{legendre, legendre_norm_sq, legendre_table};
use super::mesh::Mesh1D;
use super::quadrature::gauss_rule;
use crate::error::{Error, Result};

/// Side of an interface: `Minus` is the limit from the left element,
/// `Plus` the limit from the right element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Piecewise polynomial on a mesh, stored as modal Legendre coefficients
/// (`num_elements × (order + 1)`, row-major by element).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Mesh1D,
    order: usize,
    coeffs: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(mesh: Mesh1D, order: usize) -> Self {
        let coeffs = vec![0.0; mesh.num_elements() * (order + 1)];
        Self { mesh, order, coeffs }
    }

    pub fn from_coeffs(mesh: Mesh1D, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = mesh.num_elements() * (order + 1);
        if coeffs.len() != expected {
            return Err(Error::domain(format!("expected {expected} coefficients, got {}", coeffs.len())));
        }
        Ok(Self { mesh, order, coeffs })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn element(&self, s: usize) -> &[f64] {
        let n = self.order + 1;
        &self.coeffs[s * n..(s + 1) * n]
    }

    pub fn element_mut(&mut self, s: usize) -> &mut [f64] {
        let n = self.order + 1;
        &mut self.coeffs[s * n..(s + 1) * n]
    }

    /// True when both functions live on the same mesh with the same order.
    pub fn same_space(&self, other: &GridFunction) -> bool {
        self.mesh == other.mesh && self.order == other.order
    }

    /// Value inside element `s` at reference coordinate `r`.
    pub fn eval_ref(&self, s: usize, r: f64) -> f64 {
        self.element(s).iter().enumerate().map(|(p, c)| c * legendre(p, r)).sum()
    }

    /// Point value; `None` outside the mesh. Interior interfaces take the
    /// value from the right element.
    pub fn eval(&self, x: f64) -> Option<f64> {
        self.mesh.locate(x).map(|(s, r)| self.eval_ref(s, r))
    }

    /// Right-end (`r = 1`) value of element `s`.
    pub fn right_value(&self, s: usize) -> f64 {
        self.element(s).iter().sum()
    }

    /// Left-end (`r = -1`) value of element `s`.
    pub fn left_value(&self, s: usize) -> f64 {
        self.element(s).iter().enumerate().map(|(p, c)| if p % 2 == 0 { *c } else { -*c }).sum()
    }

    /// One-sided limit at interface `i ∈ 0..=N`. The left boundary has only a
    /// `Plus` side, the right boundary only a `Minus` side.
    pub fn trace(&self, interface: usize, side: Side) -> Result<f64> {
        let n = self.mesh.num_elements();
        if interface > n {
            return Err(Error::domain(format!("interface {interface} outside 0..={n}")));
        }
        match side {
            Side::Minus if interface == 0 => Err(Error::domain("left boundary has no minus-side trace")),
            Side::Plus if interface == n => Err(Error::domain("right boundary has no plus-side trace")),
            Side::Minus => Ok(self.right_value(interface - 1)),
            Side::Plus => Ok(self.left_value(interface)),
        }
    }

    /// `⟦V⟧ = V⁺ − V⁻` at an interior interface.
    pub fn jump(&self, interface: usize) -> Result<f64> {
        Ok(self.trace(interface, Side::Plus)? - self.trace(interface, Side::Minus)?)
    }

    /// `{{V}} = (V⁺ + V⁻) / 2` at an interior interface.
    pub fn average(&self, interface: usize) -> Result<f64> {
        Ok(0.5 * (self.trace(interface, Side::Plus)? + self.trace(interface, Side::Minus)?))
    }

    /// Global L² norm by Gauss quadrature.
    pub fn l2_norm(&self) -> f64 {
        self.l2_distance(|_| 0.0, self.order + 2)
    }

    /// `‖V_h − f‖_{L²}` with `order + 3` Gauss points per element.
    pub fn l2_error<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.l2_distance(f, self.order + 3)
    }

    fn l2_distance<F: Fn(f64) -> f64>(&self, f: F, points: usize) -> f64 {
        let rule = gauss_rule(points).expect("positive point count");
        let half_h = 0.5 * self.mesh.h();
        let mut vals = vec![0.0; self.order + 1];
        let mut ders = vec![0.0; self.order + 1];
        let mut total = 0.0;
        for s in 0..self.mesh.num_elements() {
            let c = self.element(s);
            for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
                legendre_table(r, &mut vals, &mut ders);
                let vh: f64 = c.iter().zip(&vals).map(|(a, b)| a * b).sum();
                let d = vh - f(self.mesh.to_physical(s, r));
                total += half_h * w * d * d;
            }
        }
        total.sqrt()
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, scale: f64, other: &GridFunction) {
        debug_assert!(self.same_space(other));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
    }
}

/// Element-wise L² projection onto piecewise polynomials of degree `order`.
pub fn l2_project<F: Fn(f64) -> f64>(f: F, mesh: &Mesh1D, order: usize) -> GridFunction {
    l2_project_with(f, mesh, order, order + 3)
}

/// L² projection using `points` Gauss nodes per element.
pub fn l2_project_with<F: Fn(f64) -> f64>(f: F, mesh: &Mesh1D, order: usize, points: usize) -> GridFunction {
    let rule = gauss_rule(points.max(1)).expect("positive point count");
    let mut gf = GridFunction::zeros(*mesh, order);
    let mut vals = vec![0.0; order + 1];
    let mut ders = vec![0.0; order + 1];
    for s in 0..mesh.num_elements() {
        let coeffs = gf.element_mut(s);
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            legendre_table(r, &mut vals, &mut ders);
            let fx = f(mesh.to_physical(s, r));
            for p in 0..=order {
                coeffs[p] += w * fx * vals[p];
            }
        }
        for (p, c) in coeffs.iter_mut().enumerate() {
            *c /= legendre_norm_sq(p);
        }
    }
    gf
}

/// Gauss–Radau-type projection: per element the result is orthogonal to
/// degrees `0..order-1` against `f` and interpolates `f` at the right end
/// (`Side::Minus`) or left end (`Side::Plus`).
pub fn gauss_radau_project<F: Fn(f64) -> f64>(f: F, mesh: &Mesh1D, order: usize, side: Side) -> Result<GridFunction> {
    if order == 0 {
        return Err(Error::Unsupported(
            "gauss-radau projection needs order >= 1; the endpoint condition would consume the only degree of freedom"
                .into(),
        ));
    }
    let rule = gauss_rule(order + 4)?;
    let mut gf = GridFunction::zeros(*mesh, order);
    let mut vals = vec![0.0; order];
    let mut ders = vec![0.0; order];
    for s in 0..mesh.num_elements() {
        let coeffs = gf.element_mut(s);
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            legendre_table(r, &mut vals, &mut ders);
            let fx = f(mesh.to_physical(s, r));
            for (c, v) in coeffs.iter_mut().zip(&vals) {
                *c += w * fx * v;
            }
        }
        for (p, c) in coeffs.iter_mut().enumerate().take(order) {
            *c /= legendre_norm_sq(p);
        }
        let (a, b) = mesh.element_bounds(s);
        let (x_end, end_sign): (f64, f64) = match side {
            Side::Minus => (b, 1.0),
            Side::Plus => (a, -1.0),
        };
        // P_p(±1) = (±1)^p
        let partial: f64 = (0..order).map(|p| coeffs[p] * end_sign.powi(p as i32)).sum();
        coeffs[order] = (f(x_end) - partial) / end_sign.powi(order as i32);
    }
    Ok(gf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_reproduces_basis_member() {
        let mesh = Mesh1D::new(0.0, 1.0, 4).unwrap();
        // P_1 mapped onto element 2 = [0.5, 0.75]
        let f = |x: f64| if (0.5..0.75).contains(&x) { (x - 0.625) / 0.125 } else { 0.0 };
        let gf = l2_project(f, &mesh, 3);
        let c = gf.element(2);
        assert!((c[0]).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14);
        assert!(c[2].abs() < 1e-14 && c[3].abs() < 1e-14);
    }

    #[test]
    fn projection_of_x_squared() {
        let mesh = Mesh1D::new(-1.0, 1.0, 1).unwrap();
        let gf = l2_project(|x| x * x, &mesh, 2);
        let c = gf.element(0);
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(c[1].abs() < 1e-15);
        assert!((c[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn radau_of_cubic_solves_defining_system() {
        // Solve the 3x3 system for q(x) = c0 + c1 x + c2 x^2 in the monomial
        // basis: ∫q = ∫x^3 = 0, ∫x q = ∫x^4 = 2/5, q(1) = 1.
        let a = nalgebra::Matrix3::new(2.0, 0.0, 2.0 / 3.0, 0.0, 2.0 / 3.0, 0.0, 1.0, 1.0, 1.0);
        let rhs = nalgebra::Vector3::new(0.0, 0.4, 1.0);
        let mono = a.lu().solve(&rhs).unwrap();
        let mesh = Mesh1D::new(-1.0, 1.0, 1).unwrap();
        let gf = gauss_radau_project(|x| x * x * x, &mesh, 2, Side::Minus).unwrap();
        for &x in &[-0.8, -0.1, 0.3, 1.0] {
            let q = mono[0] + mono[1] * x + mono[2] * x * x;
            assert!((gf.eval(x).unwrap() - q).abs() < 1e-14);
        }
        assert!((mono[0] + 0.2).abs() < 1e-14);
        assert!((mono[1] - 0.6).abs() < 1e-14);
        assert!((mono[2] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn radau_rejects_order_zero() {
        let mesh = Mesh1D::new(0.0, 1.0, 2).unwrap();
        assert!(matches!(gauss_radau_project(|x| x, &mesh, 0, Side::Minus), Err(Error::Unsupported(_))));
    }

    #[test]
    fn radau_sine_converges_fourth_order() {
        let mut errs = vec![];
        for &n in &[4usize, 8, 16] {
            let mesh = Mesh1D::new(0.0, 2.0, n).unwrap();
            let gf = gauss_radau_project(f64::sin, &mesh, 3, Side::Minus).unwrap();
            let mut emax: f64 = 0.0;
            for i in 0..=400 {
                let x = 2.0 * i as f64 / 400.0;
                emax = emax.max((gf.eval(x).unwrap() - x.sin()).abs());
            }
            errs.push(emax);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 3.7, "order {order}");
        }
    }

    #[test]
    fn traces_and_jumps() {
        let mesh = Mesh1D::new(0.0, 1.0, 2).unwrap();
        let gf = GridFunction::from_coeffs(mesh, 1, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(gf.jump(1).unwrap(), -1.0);
        assert!(gf.trace(0, Side::Minus).is_err());
        assert!(gf.trace(2, Side::Plus).is_err());
        assert!(gf.jump(0).is_err());
        assert_eq!(gf.trace(2, Side::Minus).unwrap(), 0.0);
        let smooth = l2_project(|x| 3.0 * x - 1.0, &mesh, 2);
        assert!(smooth.jump(1).unwrap().abs() < 1e-14);
    }

    #[test]
    fn norms() {
        let mesh = Mesh1D::new(0.0, 1.0, 5).unwrap();
        assert_eq!(GridFunction::zeros(mesh, 2).l2_norm(), 0.0);
        assert!((l2_project(|_| 1.0, &mesh, 1).l2_norm() - 1.0).abs() < 1e-14);
        let mesh = Mesh1D::new(0.0, 1.0, 64).unwrap();
        let pi = std::f64::consts::PI;
        let gf = l2_project(|x| (pi * x).sin(), &mesh, 2);
        assert!((gf.l2_norm() - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn l2_projection_order() {
        let mut errs = vec![];
        for &n in &[8usize, 16, 32, 64] {
            let mesh = Mesh1D::new(0.0, 1.0, n).unwrap();
            for k in 1..=3 {
                let gf = l2_project(|x| (3.0 * x).exp(), &mesh, k);
                errs.push((k, gf.l2_error(|x| (3.0 * x).exp())));
            }
        }
        for k in 1..=3 {
            let e: Vec<f64> = errs.iter().filter(|(kk, _)| *kk == k).map(|p| p.1).collect();
            for w in e.windows(2) {
                assert!((w[0] / w[1]).log2() >= k as f64 + 0.9);
            }
        }
    }
}
