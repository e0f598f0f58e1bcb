use std::sync::Arc;

use nalgebra::DMatrix;

use super::flux::{convection_flux, llf_speed, FluxSpec};
use super::problem::{Diffusion, PdeProblem};
use crate::basis::{gauss_rule, legendre_table, GridFunction, Mesh1D};
use crate::error::{Error, Result};
use crate::kernels::RieszOperator;

/// Diagonal of the block-diagonal mass matrix, `h/(2p+1)` per mode.
pub fn assemble_mass(mesh: &Mesh1D, order: usize) -> Vec<f64> {
    let h = mesh.h();
    (0..mesh.num_elements()).flat_map(|_| (0..=order).map(move |p| h / (2 * p + 1) as f64)).collect()
}

/// Legendre values and derivatives tabulated at reference Gauss nodes.
#[derive(Debug, Clone)]
struct Tabulation {
    weights: Vec<f64>,
    vals: Vec<f64>,
    ders: Vec<f64>,
    nb: usize,
}

impl Tabulation {
    fn new(order: usize, points: usize) -> Result<Self> {
        let rule = gauss_rule(points)?;
        let nb = order + 1;
        let mut vals = vec![0.0; points * nb];
        let mut ders = vec![0.0; points * nb];
        for (g, &r) in rule.nodes.iter().enumerate() {
            legendre_table(r, &mut vals[g * nb..(g + 1) * nb], &mut ders[g * nb..(g + 1) * nb]);
        }
        Ok(Self { weights: rule.weights, vals, ders, nb })
    }

    fn points(&self) -> usize {
        self.weights.len()
    }
}

/// Frozen-coefficient data for the diffusion tangent.
struct DiffusionFrozen {
    sqrt_s_quad: Vec<f64>,
    sqrt_s_hat: Vec<f64>,
    sqrt_s_minus: Vec<f64>,
}

/// LDG spatial operator for a [`PdeProblem`] on a fixed mesh and order.
///
/// `residual(V)` is the weak form of `g − F(V)_x + (√S L)_x + √b E_x` with
/// `L = φ(V)_x`, `R = √b V_x`, `E = 𝓛R`, tested against every basis function.
pub struct LdgOperator {
    problem: PdeProblem,
    mesh: Mesh1D,
    order: usize,
    flux: FluxSpec,
    tab: Tabulation,
    mass: Vec<f64>,
    riesz: Option<Arc<RieszOperator>>,
    constant_part: DMatrix<f64>,
}

impl LdgOperator {
    /// Builds the operator with `quad_points` Gauss nodes per element for the
    /// nonlinear terms, assembling the Riesz matrix when `b > 0`.
    pub fn new(problem: &PdeProblem, mesh: &Mesh1D, order: usize, flux: FluxSpec, quad_points: usize) -> Result<Self> {
        let riesz =
            if problem.b > 0.0 { Some(Arc::new(RieszOperator::assemble(mesh, order, problem.beta)?)) } else { None };
        Self::with_riesz(problem, mesh, order, flux, quad_points, riesz)
    }

    /// As [`LdgOperator::new`] but reusing an already assembled Riesz matrix.
    pub fn with_riesz(
        problem: &PdeProblem,
        mesh: &Mesh1D,
        order: usize,
        flux: FluxSpec,
        quad_points: usize,
        riesz: Option<Arc<RieszOperator>>,
    ) -> Result<Self> {
        problem.validate()?;
        if order == 0 {
            return Err(Error::Unsupported("the alternating-flux scheme requires polynomial order k >= 1".into()));
        }
        if quad_points < order + 1 {
            return Err(Error::domain(format!(
                "need at least {} quadrature points for order {order}, got {quad_points}",
                order + 1
            )));
        }
        let riesz = if problem.b > 0.0 {
            let r = riesz.ok_or_else(|| Error::domain("a Riesz operator is required when b > 0"))?;
            if r.mesh() != mesh || r.order() != order || r.beta() != problem.beta {
                return Err(Error::domain("Riesz operator does not match the mesh, order or beta"));
            }
            Some(r)
        } else {
            None
        };
        let mut op = Self {
            problem: problem.clone(),
            mesh: *mesh,
            order,
            flux,
            tab: Tabulation::new(order, quad_points)?,
            mass: assemble_mass(mesh, order),
            riesz,
            constant_part: DMatrix::zeros(0, 0),
        };
        op.constant_part = op.build_constant_part();
        Ok(op)
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn problem(&self) -> &PdeProblem {
        &self.problem
    }

    pub fn riesz(&self) -> Option<&Arc<RieszOperator>> {
        self.riesz.as_ref()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn dim(&self) -> usize {
        self.mesh.num_elements() * (self.order + 1)
    }

    fn n_el(&self) -> usize {
        self.mesh.num_elements()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::domain(format!("coefficient vector has length {}, expected {}", v.len(), self.dim())));
        }
        Ok(())
    }

    // ---- element-level helpers -------------------------------------------

    fn at_quad(&self, c: &[f64]) -> Vec<f64> {
        let (nb, q) = (self.tab.nb, self.tab.points());
        let mut out = vec![0.0; self.n_el() * q];
        for s in 0..self.n_el() {
            let cs = &c[s * nb..(s + 1) * nb];
            for g in 0..q {
                let row = &self.tab.vals[g * nb..(g + 1) * nb];
                out[s * q + g] = cs.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    fn right_trace(&self, c: &[f64], s: usize) -> f64 {
        let nb = self.tab.nb;
        c[s * nb..(s + 1) * nb].iter().sum()
    }

    fn left_trace(&self, c: &[f64], s: usize) -> f64 {
        let nb = self.tab.nb;
        c[s * nb..(s + 1) * nb].iter().enumerate().map(|(p, v)| if p % 2 == 0 { *v } else { -*v }).sum()
    }

    /// States on both sides of every interface `0..=N`; the Dirichlet data
    /// stands in for the missing outer side at the two boundaries.
    fn sides(&self, c: &[f64], data: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_el();
        let mut minus = vec![0.0; n + 1];
        let mut plus = vec![0.0; n + 1];
        minus[0] = data.0;
        plus[n] = data.1;
        for (j, m) in minus.iter_mut().enumerate().skip(1) {
            *m = self.right_trace(c, j - 1);
        }
        for (j, p) in plus.iter_mut().enumerate().take(n) {
            *p = self.left_trace(c, j);
        }
        (minus, plus)
    }

    /// `−Σ_g w_g f_{s,g} P_i'(r_g) + f̂_{s+1} − f̂_s (−1)^i`: the weak derivative
    /// of `f` with interface values `f̂`, before the mass solve.
    fn weak_derivative(&self, vol: &[f64], hat: &[f64]) -> Vec<f64> {
        let (nb, q) = (self.tab.nb, self.tab.points());
        let mut out = vec![0.0; self.dim()];
        for s in 0..self.n_el() {
            let blk = &mut out[s * nb..(s + 1) * nb];
            for g in 0..q {
                let wf = self.tab.weights[g] * vol[s * q + g];
                let d = &self.tab.ders[g * nb..(g + 1) * nb];
                for i in 0..nb {
                    blk[i] -= wf * d[i];
                }
            }
            for (i, b) in blk.iter_mut().enumerate() {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                *b += hat[s + 1] - sign * hat[s];
            }
        }
        out
    }

    fn mass_solve(&self, v: &mut [f64]) {
        for (x, m) in v.iter_mut().zip(&self.mass) {
            *x /= m;
        }
    }

    /// Auxiliary trace `Ẑ`: `Z⁺` inside, interior trace plus penalty at the ends.
    fn aux_hat(&self, z: &[f64], minus: &[f64], plus: &[f64]) -> Vec<f64> {
        let n = self.n_el();
        let pen = self.flux.penalty() / self.mesh.h();
        let mut hat: Vec<f64> =
            (0..=n).map(|j| if j < n { self.left_trace(z, j) } else { self.right_trace(z, n - 1) }).collect();
        hat[0] += pen * (plus[0] - minus[0]);
        hat[n] += pen * (plus[n] - minus[n]);
        hat
    }

    // ---- auxiliary variables ---------------------------------------------

    fn r_coeffs(&self, v: &[f64], data: (f64, f64)) -> Vec<f64> {
        let n = self.n_el();
        let (minus, plus) = self.sides(v, data);
        let mut vhat = minus;
        vhat[n] = plus[n];
        let mut r = self.weak_derivative(&self.at_quad(v), &vhat);
        self.mass_solve(&mut r);
        let sb = self.problem.b.sqrt();
        r.iter_mut().for_each(|x| *x *= sb);
        r
    }

    fn e_coeffs(&self, r: &[f64]) -> Vec<f64> {
        match &self.riesz {
            Some(a) => {
                let mut e = a.apply(r).expect("dimension checked");
                self.mass_solve(&mut e);
                e
            }
            None => vec![0.0; self.dim()],
        }
    }

    fn l_coeffs_from_phi(&self, phi_q: &[f64], phi_hat: &[f64]) -> Vec<f64> {
        let mut l = self.weak_derivative(phi_q, phi_hat);
        self.mass_solve(&mut l);
        l
    }

    fn wrap(&self, c: Vec<f64>) -> GridFunction {
        GridFunction::from_coeffs(self.mesh, self.order, c).expect("dimension matches")
    }

    fn same_space(&self, gf: &GridFunction) -> Result<()> {
        if gf.mesh() != &self.mesh || gf.order() != self.order {
            return Err(Error::domain("grid function lives on a different mesh or order"));
        }
        Ok(())
    }

    /// `R = √b ∂_x V` in the DG sense, with `V̂ = V⁻` and the boundary data at time `t`.
    pub fn solve_aux_r(&self, v: &GridFunction, t: f64) -> Result<GridFunction> {
        self.same_space(v)?;
        Ok(self.wrap(self.r_coeffs(v.coeffs(), self.problem.boundary.values(t))))
    }

    /// `E = M⁻¹ A R`.
    pub fn solve_aux_e(&self, r: &GridFunction) -> Result<GridFunction> {
        self.same_space(r)?;
        Ok(self.wrap(self.e_coeffs(r.coeffs())))
    }

    /// `L = ∂_x φ(V)` with `φ̂ = φ(V⁻)` and the boundary data at time `t`.
    pub fn solve_aux_l(&self, v: &GridFunction, t: f64) -> Result<GridFunction> {
        self.same_space(v)?;
        let d = &self.problem.diffusion;
        let (minus, plus) = self.sides(v.coeffs(), self.problem.boundary.values(t));
        let n = self.n_el();
        let phi_q: Vec<f64> = self.at_quad(v.coeffs()).iter().map(|&x| d.phi(x)).collect();
        let mut phi_hat: Vec<f64> = minus.iter().map(|&x| d.phi(x)).collect();
        phi_hat[n] = d.phi(plus[n]);
        Ok(self.wrap(self.l_coeffs_from_phi(&phi_q, &phi_hat)))
    }

    // ---- residual pieces -------------------------------------------------

    fn convection_part(&self, v: &[f64], data: (f64, f64)) -> Vec<f64> {
        let f = &self.problem.convection;
        let vol: Vec<f64> = self.at_quad(v).iter().map(|&x| f.value(x)).collect();
        let (minus, plus) = self.sides(v, data);
        let hat: Vec<f64> = minus.iter().zip(&plus).map(|(&a, &b)| convection_flux(f, a, b)).collect();
        let mut out = self.weak_derivative(&vol, &hat);
        out.iter_mut().for_each(|x| *x = -*x);
        out
    }

    fn diffusion_part(&self, v: &[f64], data: (f64, f64)) -> Vec<f64> {
        let d = &self.problem.diffusion;
        let n = self.n_el();
        let vq = self.at_quad(v);
        let (minus, plus) = self.sides(v, data);
        let phi_q: Vec<f64> = vq.iter().map(|&x| d.phi(x)).collect();
        let mut phi_hat: Vec<f64> = minus.iter().map(|&x| d.phi(x)).collect();
        phi_hat[n] = d.phi(plus[n]);
        let l = self.l_coeffs_from_phi(&phi_q, &phi_hat);
        let lq = self.at_quad(&l);
        let w: Vec<f64> = vq.iter().zip(&lq).map(|(&x, &y)| d.sqrt_value(x) * y).collect();
        let lhat = self.aux_hat(&l, &minus, &plus);
        let what: Vec<f64> = (0..=n).map(|j| d.sqrt_value(0.5 * (minus[j] + plus[j])) * lhat[j]).collect();
        self.weak_derivative(&w, &what)
    }

    fn fractional_part(&self, v: &[f64], data: (f64, f64)) -> Vec<f64> {
        if self.riesz.is_none() {
            return vec![0.0; self.dim()];
        }
        let r = self.r_coeffs(v, data);
        let e = self.e_coeffs(&r);
        let (minus, plus) = self.sides(v, data);
        let ehat = self.aux_hat(&e, &minus, &plus);
        let mut out = self.weak_derivative(&self.at_quad(&e), &ehat);
        let sb = self.problem.b.sqrt();
        out.iter_mut().for_each(|x| *x *= sb);
        out
    }

    /// Source load `(g(·,t), ζ)` at step `step`.
    pub fn load(&self, t: f64, step: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        if let Some(g) = &self.problem.source {
            g.load(&self.mesh, self.order, t, step, &mut out);
        }
        out
    }

    /// Weak spatial operator tested against the basis (no mass solve):
    /// convection, diffusion, fractional diffusion, boundary data at `t`, and
    /// the source at step `step`.
    pub fn residual(&self, v: &[f64], t: f64, step: usize) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let data = self.problem.boundary.values(t);
        let mut out = self.load(t, step);
        if !matches!(self.problem.convection, super::problem::Convection::None) {
            add(&mut out, &self.convection_part(v, data));
        }
        if self.problem.diffusion.is_active() {
            add(&mut out, &self.diffusion_part(v, data));
        }
        add(&mut out, &self.fractional_part(v, data));
        Ok(out)
    }

    /// `M⁻¹ residual(V)`, the semi-discrete right-hand side as a grid function.
    pub fn spatial_rhs(&self, v: &GridFunction, t: f64, step: usize) -> Result<GridFunction> {
        self.same_space(v)?;
        let mut r = self.residual(v.coeffs(), t, step)?;
        self.mass_solve(&mut r);
        Ok(self.wrap(r))
    }

    // ---- linearization ---------------------------------------------------

    fn convection_tangent(&self, v: &[f64], data: (f64, f64), delta: &[f64]) -> Vec<f64> {
        let f = &self.problem.convection;
        let vq = self.at_quad(v);
        let dq = self.at_quad(delta);
        let vol: Vec<f64> = vq.iter().zip(&dq).map(|(&x, &d)| f.deriv(x) * d).collect();
        let (minus, plus) = self.sides(v, data);
        let (dm, dp) = self.sides(delta, (0.0, 0.0));
        let hat: Vec<f64> = (0..minus.len())
            .map(|j| {
                let lam = llf_speed(f, minus[j], plus[j]);
                0.5 * (f.deriv(minus[j]) * dm[j] + f.deriv(plus[j]) * dp[j]) - 0.5 * lam * (dp[j] - dm[j])
            })
            .collect();
        let mut out = self.weak_derivative(&vol, &hat);
        out.iter_mut().for_each(|x| *x = -*x);
        out
    }

    fn diffusion_frozen(&self, v: &[f64], data: (f64, f64)) -> DiffusionFrozen {
        let d: &Diffusion = &self.problem.diffusion;
        let (minus, plus) = self.sides(v, data);
        DiffusionFrozen {
            sqrt_s_quad: self.at_quad(v).iter().map(|&x| d.sqrt_value(x)).collect(),
            sqrt_s_hat: minus.iter().zip(&plus).map(|(&a, &b)| d.sqrt_value(0.5 * (a + b))).collect(),
            sqrt_s_minus: minus.iter().map(|&a| d.sqrt_value(a)).collect(),
        }
    }

    /// Diffusion with `√S` frozen and `φ` replaced by its tangent; linear in `delta`.
    fn diffusion_tangent(&self, fr: &DiffusionFrozen, delta: &[f64]) -> Vec<f64> {
        let n = self.n_el();
        let dq = self.at_quad(delta);
        let (dm, dp) = self.sides(delta, (0.0, 0.0));
        let phi_q: Vec<f64> = dq.iter().zip(&fr.sqrt_s_quad).map(|(a, s)| a * s).collect();
        let mut phi_hat: Vec<f64> = dm.iter().zip(&fr.sqrt_s_minus).map(|(a, s)| a * s).collect();
        phi_hat[0] = 0.0;
        phi_hat[n] = 0.0;
        let l = self.l_coeffs_from_phi(&phi_q, &phi_hat);
        let lq = self.at_quad(&l);
        let w: Vec<f64> = lq.iter().zip(&fr.sqrt_s_quad).map(|(a, s)| a * s).collect();
        let lhat = self.aux_hat(&l, &dm, &dp);
        let what: Vec<f64> = lhat.iter().zip(&fr.sqrt_s_hat).map(|(a, s)| a * s).collect();
        self.weak_derivative(&w, &what)
    }

    fn columns<F: Fn(&[f64]) -> Vec<f64> + Sync>(&self, f: F) -> DMatrix<f64> {
        use rayon::prelude::*;
        let n = self.dim();
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                f(&e)
            })
            .collect();
        DMatrix::from_fn(n, n, |i, j| cols[j][i])
    }

    /// State-independent part of the linearization: fractional diffusion,
    /// constant diffusion, and linear convection.
    fn build_constant_part(&self) -> DMatrix<f64> {
        let zero = (0.0, 0.0);
        let zeros = vec![0.0; self.dim()];
        let conv = &self.problem.convection;
        let diff = &self.problem.diffusion;
        let frozen = (diff.is_active() && diff.is_constant()).then(|| self.diffusion_frozen(&zeros, zero));
        self.columns(|e| {
            let mut col = self.fractional_part(e, zero);
            if conv.is_linear() && !matches!(conv, super::problem::Convection::None) {
                add(&mut col, &self.convection_tangent(&zeros, zero, e));
            }
            if let Some(fr) = &frozen {
                add(&mut col, &self.diffusion_tangent(fr, e));
            }
            col
        })
    }

    /// Matrix `K(v)` of the frozen-coefficient linearization at `v`: the
    /// tangent of `F` and `φ` with the Lax–Friedrichs speed and `√S` frozen.
    /// Together with `f(v) = residual(v) − K(v)v` it reproduces the residual
    /// exactly at `v`; for linear problems it is the exact operator.
    pub fn linearize(&self, v: &[f64], t: f64) -> Result<DMatrix<f64>> {
        self.check_len(v)?;
        let mut k = self.constant_part.clone();
        if self.problem.is_linear() {
            return Ok(k);
        }
        let data = self.problem.boundary.values(t);
        let conv_nl = !self.problem.convection.is_linear();
        let diff_nl = self.problem.diffusion.is_active() && !self.problem.diffusion.is_constant();
        let frozen = diff_nl.then(|| self.diffusion_frozen(v, data));
        let extra = self.columns(|e| {
            let mut col = vec![0.0; e.len()];
            if conv_nl {
                add(&mut col, &self.convection_tangent(v, data, e));
            }
            if let Some(fr) = &frozen {
                add(&mut col, &self.diffusion_tangent(fr, e));
            }
            col
        });
        k += extra;
        Ok(k)
    }
}

fn add(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gauss_radau_project, l2_project, Side};
    use crate::ldg::{BoundaryData, Convection};
    use proptest::prelude::*;

    fn op(problem: &PdeProblem, mesh: &Mesh1D, k: usize) -> LdgOperator {
        LdgOperator::new(problem, mesh, k, FluxSpec::default(), k + 2).unwrap()
    }

    fn data(l: f64, r: f64) -> BoundaryData {
        BoundaryData { left: Arc::new(move |_| l), right: Arc::new(move |_| r) }
    }

    fn heat() -> PdeProblem {
        PdeProblem::new(Convection::None, Diffusion::Constant(1.0), 0.0, 1.5)
    }

    #[test]
    fn mass_examples() {
        let mesh = Mesh1D::new(0.0, 1.0, 10).unwrap();
        let m = assemble_mass(&mesh, 1);
        assert!((m[0] - 0.1).abs() < 1e-15 && (m[1] - 0.1 / 3.0).abs() < 1e-15);
        let one = l2_project(|_| 1.0, &mesh, 1);
        let total: f64 = one.coeffs().iter().zip(&m).map(|(c, w)| c * w).sum::<f64>();
        // ∫1 = Σ_s c_{s,0}·h
        assert!((total - 1.0).abs() < 1e-14);
        let gf = l2_project(|x| (5.0 * x).sin() + x * x, &mesh, 1);
        let quad: f64 = gf.coeffs().iter().zip(&m).map(|(c, w)| c * c * w).sum();
        assert!((quad - gf.l2_norm().powi(2)).abs() < 1e-13);
    }

    #[test]
    fn aux_r_examples() {
        let mesh = Mesh1D::new(0.0, 1.0, 4).unwrap();
        let p = PdeProblem::new(Convection::None, Diffusion::None, 1.0, 1.5);
        let o = op(&p, &mesh, 1);
        let c = l2_project(|_| 2.0, &mesh, 1);
        let r = o.solve_aux_r(&c, 0.0).unwrap();
        for s in 1..3 {
            assert!(r.element(s).iter().all(|x| x.abs() < 1e-13));
        }
        let p = p.with_boundary(data(0.0, 1.0));
        let o = op(&p, &mesh, 1);
        let x = l2_project(|x| x, &mesh, 1);
        let r = o.solve_aux_r(&x, 0.0).unwrap();
        assert!(r.l2_error(|_| 1.0) < 1e-10);
        let p0 = PdeProblem::new(Convection::None, Diffusion::None, 0.0, 1.5);
        assert!(op(&p0, &mesh, 1).solve_aux_r(&x, 0.0).unwrap().l2_norm() == 0.0);
    }

    #[test]
    fn aux_e_examples() {
        let mesh = Mesh1D::new(0.0, 1.0, 8).unwrap();
        let p = PdeProblem::new(Convection::None, Diffusion::None, 1.0, 1.999);
        let o = op(&p, &mesh, 2);
        let zero = GridFunction::zeros(mesh, 2);
        assert_eq!(o.solve_aux_e(&zero).unwrap().l2_norm(), 0.0);
        let r = l2_project(|x| (3.0 * x).cos(), &mesh, 2);
        let e = o.solve_aux_e(&r).unwrap();
        let mut diff = e.clone();
        diff.add_scaled(-1.0, &r);
        assert!(diff.l2_norm() < 1e-2 * r.l2_norm());
        let p = PdeProblem::new(Convection::None, Diffusion::None, 1.0, 1.3);
        let o = op(&p, &mesh, 2);
        let e = o.solve_aux_e(&r).unwrap();
        let pairing: f64 = e.coeffs().iter().zip(r.coeffs()).zip(o.mass()).map(|((a, b), m)| a * b * m).sum();
        assert!(pairing >= 0.0);
    }

    #[test]
    fn aux_l_examples() {
        let mesh = Mesh1D::new(0.0, 1.0, 8).unwrap();
        let v = l2_project(|x| x * x, &mesh, 2);
        let none = PdeProblem::new(Convection::None, Diffusion::None, 0.0, 1.5);
        assert_eq!(op(&none, &mesh, 2).solve_aux_l(&v, 0.0).unwrap().l2_norm(), 0.0);
        let o = op(&heat().with_boundary(data(0.0, 1.0)), &mesh, 2);
        let l = o.solve_aux_l(&v, 0.0).unwrap();
        assert!(l.l2_error(|x| 2.0 * x) < 1e-9);
    }

    #[test]
    fn aux_l_converges() {
        let f = |x: f64| (2.0 * x).sin();
        let mut errs = vec![];
        for &n in &[8usize, 16, 32] {
            let mesh = Mesh1D::new(0.0, 1.0, n).unwrap();
            let o = op(&heat().with_boundary(data(0.0, 2f64.sin())), &mesh, 2);
            // the right-Radau projection makes V⁻ exact, so L is the L²
            // projection of V'
            let v = gauss_radau_project(f, &mesh, 2, Side::Minus).unwrap();
            let l = o.solve_aux_l(&v, 0.0).unwrap();
            errs.push(l.l2_error(|x| 2.0 * (2.0 * x).cos()));
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 2.7);
        }
    }

    #[test]
    fn zero_state_zero_rhs() {
        let mesh = Mesh1D::new(-1.0, 1.0, 6).unwrap();
        let p = PdeProblem::new(Convection::Burgers, Diffusion::Constant(1.0), 0.7, 1.4);
        let r = op(&p, &mesh, 2).residual(&[0.0; 18], 0.3, 1).unwrap();
        assert!(r.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn polynomial_consistency() {
        // V = 3x² − x + 1 with S ≡ 1: the operator returns V'' = 6 exactly.
        let mesh = Mesh1D::new(0.0, 1.0, 5).unwrap();
        let v = |x: f64| 3.0 * x * x - x + 1.0;
        let o = op(&heat().with_boundary(data(v(0.0), v(1.0))), &mesh, 2);
        let rhs = o.spatial_rhs(&l2_project(v, &mesh, 2), 0.0, 0).unwrap();
        assert!(rhs.l2_error(|_| 6.0) < 1e-10);
    }

    #[test]
    fn penalty_activation() {
        let mesh = Mesh1D::new(0.0, 1.0, 10).unwrap();
        let v = vec![0.0; 20];
        let p = heat().with_boundary(data(1.0, 0.0));
        let with = LdgOperator::new(&p, &mesh, 1, FluxSpec::new(1.0).unwrap(), 3).unwrap();
        let without = LdgOperator::new(&p, &mesh, 1, FluxSpec::new(0.0).unwrap(), 3).unwrap();
        let a = with.residual(&v, 0.0, 0).unwrap();
        let b = without.residual(&v, 0.0, 0).unwrap();
        // −Ŵ_0(−1)^i with Ŵ_0 ⊃ (σ/h)(V⁺ − V_D) = −10
        assert!((a[0] - b[0] - 10.0).abs() < 1e-12);
        assert!((a[1] - b[1] + 10.0).abs() < 1e-12);
        assert!(a[2..].iter().zip(&b[2..]).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn linear_problems_are_affine() {
        let mesh = Mesh1D::new(-1.0, 1.0, 5).unwrap();
        let p = PdeProblem::new(Convection::Linear { speed: 0.8 }, Diffusion::Constant(0.5), 1.0, 1.6)
            .with_boundary(data(0.3, -0.2))
            .with_source(|x: f64, t: f64| x * t);
        let o = op(&p, &mesh, 2);
        let v: Vec<f64> = (0..15).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let k = o.linearize(&v, 0.4).unwrap();
        let r0 = o.residual(&[0.0; 15], 0.4, 0).unwrap();
        let rv = o.residual(&v, 0.4, 0).unwrap();
        let kv = &k * nalgebra::DVector::from_column_slice(&v);
        for i in 0..15 {
            assert!((rv[i] - r0[i] - kv[i]).abs() < 1e-11, "{i}");
        }
    }

    #[test]
    fn nonlinear_tangent_matches_frozen_difference() {
        // With S(v) = v² frozen, φ's tangent is exact to first order; compare
        // the directional derivative of the convection-free residual.
        let mesh = Mesh1D::new(0.0, 1.0, 4).unwrap();
        let p = PdeProblem::new(Convection::None, Diffusion::Quadratic, 0.0, 1.5).with_boundary(data(1.0, 2.0));
        let o = op(&p, &mesh, 2);
        let v = l2_project(|x| 1.0 + x * x, &mesh, 2).into_coeffs();
        let k = o.linearize(&v, 0.0).unwrap();
        let delta: Vec<f64> = (0..12).map(|i| ((i * 5 % 7) as f64 - 3.0) * 0.1).collect();
        let kd = &k * nalgebra::DVector::from_column_slice(&delta);
        // the tangent omits d√S/dv terms, so compare with the frozen-√S
        // residual difference
        let fr = o.diffusion_frozen(&v, (1.0, 2.0));
        let td = o.diffusion_tangent(&fr, &delta);
        for i in 0..12 {
            assert!((kd[i] - td[i]).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn alternating_traces_are_adjoint(seed in proptest::collection::vec(-1.0f64..1.0, 24)) {
            // (Z, D⁻V) + (V, D⁺Z) = 0 for homogeneous data and σ = 0
            let mesh = Mesh1D::new(0.0, 2.0, 6).unwrap();
            let p = PdeProblem::new(Convection::None, Diffusion::None, 0.0, 1.5);
            let o = LdgOperator::new(&p, &mesh, 3, FluxSpec::new(0.0).unwrap(), 5).unwrap();
            let v = &seed[..];
            let z: Vec<f64> = seed.iter().rev().map(|x| x * 1.7 - 0.2).collect();
            let (vm, vp) = o.sides(v, (0.0, 0.0));
            let mut vhat = vm.clone();
            vhat[6] = vp[6];
            let dv = o.weak_derivative(&o.at_quad(v), &vhat);
            let zhat = o.aux_hat(&z, &vm, &vp);
            let dz = o.weak_derivative(&o.at_quad(&z), &zhat);
            let lhs: f64 = z.iter().zip(&dv).map(|(a, b)| a * b).sum::<f64>()
                + v.iter().zip(&dz).map(|(a, b)| a * b).sum::<f64>();
            prop_assert!(lhs.abs() < 1e-10);
        }
    }
}
