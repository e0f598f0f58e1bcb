use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use super::polynomial::{PiecewisePolynomial, Polynomial};
use super::riemann_liouville::{rl_integral_piecewise, rl_monomial_factor, Direction, FracExpansion};
use crate::basis::{gauss_jacobi_rule, gauss_rule, shifted_legendre_coeffs, Mesh1D, QuadRule};
use crate::error::{Error, Result};

fn check_beta(beta: f64) -> Result<()> {
    if beta > 1.0 && beta < 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("spatial order beta must lie in (1, 2), got {beta}")))
    }
}

/// Positive normalization `1/(2cos(μπ/2))` of the symmetric fractional
/// integral `𝓛 = (I_L^μ + I_R^μ)/(2cos(μπ/2))`, `μ = 2 − β`.
///
/// With this sign `𝓛 → identity` as `β → 2` and `d/dx 𝓛 d/dx` is the
/// (negative semidefinite) Riesz fractional Laplacian.
pub fn riesz_scale(beta: f64) -> f64 {
    let mu = 2.0 - beta;
    1.0 / (2.0 * (mu * PI / 2.0).cos())
}

/// `𝓛 f` for a compactly supported piecewise polynomial, in closed form.
pub fn riesz_potential(f: &PiecewisePolynomial, beta: f64) -> Result<FracExpansion> {
    check_beta(beta)?;
    let mu = 2.0 - beta;
    let mut e = rl_integral_piecewise(f, mu, Direction::Left)?;
    e.extend(rl_integral_piecewise(f, mu, Direction::Right)?);
    Ok(e.scaled(riesz_scale(beta)))
}

/// Closed-form evaluator of `−(−Δ)^{β/2} V = d/dx 𝓛 V'`.
#[derive(Debug, Clone)]
pub struct RieszEvaluator {
    expansion: FracExpansion,
}

impl RieszEvaluator {
    pub fn eval(&self, x: f64) -> f64 {
        self.expansion.eval(x)
    }

    pub fn expansion(&self) -> &FracExpansion {
        &self.expansion
    }
}

/// Builds `d/dx 𝓛 V'` for a piecewise polynomial `V`.
///
/// `V'` must be continuous and vanish at the ends of the support (`V` itself
/// may jump there); otherwise the result would carry non-integrable
/// singularities and the request is rejected.
pub fn riesz_apply_to_polynomial(v: &PiecewisePolynomial, beta: f64) -> Result<RieszEvaluator> {
    check_beta(beta)?;
    let mu = 2.0 - beta;
    let dv = v.derivative();
    let scale = dv.pieces().iter().flat_map(|p| p.coeffs().iter()).fold(1.0f64, |m, c| m.max(c.abs()));
    let jump = dv.max_jump();
    if jump > 1e-10 * scale {
        return Err(Error::domain(format!(
            "riesz term: V' is discontinuous or nonzero at the support ends (jump {jump:.3e})"
        )));
    }
    let mut pot = riesz_potential(&dv, beta)?;
    // The (x−a)^μ terms carry the jumps of V' and cancel analytically.
    let lowest = pot.split_power(mu);
    let tscale = lowest.iter().chain(pot.terms()).fold(1.0f64, |m, t| m.max(t.coef.abs()));
    let mut residual = std::collections::BTreeMap::new();
    for t in &lowest {
        *residual.entry((t.anchor.to_bits(), t.dir == Direction::Left)).or_insert(0.0) += t.coef;
    }
    if residual.values().any(|c: &f64| c.abs() > 1e-9 * tscale) {
        return Err(Error::Consistency("riesz term: leading singular terms failed to cancel".into()));
    }
    Ok(RieszEvaluator { expansion: pot.derivative() })
}

/// Dense Galerkin matrix of `𝓛` on a DG space:
/// `A[(s,p),(r,q)] = (𝓛 ζ_{q,r}, ζ_{p,s})`, row index `s(k+1)+p`.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszOperator {
    beta: f64,
    mesh: Mesh1D,
    order: usize,
    matrix: DMatrix<f64>,
}

/// Header and matrix read back from a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszDump {
    pub num_elements: usize,
    pub order: usize,
    pub beta: f64,
    pub matrix: DMatrix<f64>,
}

struct BlockRules {
    gl_far: QuadRule,
    gl_near: QuadRule,
    gj: QuadRule,
}

/// Values of the shifted Legendre polynomials `P̂_0..P̂_k` at `z ∈ [0,1]`.
fn shifted_values(coeffs: &[Polynomial], z: f64) -> Vec<f64> {
    coeffs.iter().map(|c| c.eval(z)).collect()
}

/// `∫_0^1 P̂_p(z) z^{i+μ} dz` summed against source coefficients.
fn monomial_moment(field: &Polynomial, i: usize, mu: f64) -> f64 {
    field.coeffs().iter().enumerate().map(|(j, c)| c / ((j + i) as f64 + mu + 1.0)).sum()
}

/// Left-integral block for element offset `d = s − r ≥ 0`, unit element width.
fn left_block(d: usize, k: usize, mu: f64, shifted: &[Polynomial], rules: &BlockRules) -> DMatrix<f64> {
    let mut blk = DMatrix::zeros(k + 1, k + 1);
    match d {
        0 => {
            for q in 0..=k {
                for p in 0..=k {
                    blk[(p, q)] = shifted[q]
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c * rl_monomial_factor(i, mu) * monomial_moment(&shifted[p], i, mu))
                        .sum();
                }
            }
        }
        1 => {
            for q in 0..=k {
                let c = shifted[q].coeffs();
                let e = shifted[q].shifted(1.0);
                let far = |z: f64| -> f64 {
                    c.iter()
                        .enumerate()
                        .map(|(i, ci)| ci * rl_monomial_factor(i, mu) * (1.0 + z).powf(i as f64 + mu))
                        .sum()
                };
                for p in 0..=k {
                    let smooth = rules.gl_near.integrate(0.0, 1.0, |z| shifted[p].eval(z) * far(z));
                    let near: f64 = e
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(i, ei)| ei * rl_monomial_factor(i, mu) * monomial_moment(&shifted[p], i, mu))
                        .sum();
                    blk[(p, q)] = smooth - near;
                }
            }
        }
        _ => far_block(d, k, mu, shifted, rules, false, &mut blk),
    }
    blk
}

/// Right-integral block for element offset `d = r − s ≥ 0`, unit element width.
fn right_block(d: usize, k: usize, mu: f64, shifted: &[Polynomial], rules: &BlockRules) -> DMatrix<f64> {
    let mut blk = DMatrix::zeros(k + 1, k + 1);
    // ∫_0^1 g(z)(1−z)^μ dz with Gauss–Jacobi in r = 2z − 1.
    let jacobi = |g: &dyn Fn(f64) -> f64| -> f64 {
        0.5f64.powf(1.0 + mu)
            * rules.gj.nodes.iter().zip(&rules.gj.weights).map(|(&r, &w)| w * g(0.5 * (1.0 + r))).sum::<f64>()
    };
    match d {
        0 | 1 => {
            for q in 0..=k {
                // P̂_q(y) = Σ ẽ_i (1−y)^i = Σ c̃_i (−y)^i
                let e_t = shifted[q].shifted(1.0).reflected();
                let c_t = shifted[q].reflected();
                for p in 0..=k {
                    let fp = &shifted[p];
                    let val = if d == 0 {
                        jacobi(&|z| {
                            fp.eval(z)
                                * e_t
                                    .coeffs()
                                    .iter()
                                    .enumerate()
                                    .map(|(i, ei)| ei * rl_monomial_factor(i, mu) * (1.0 - z).powi(i as i32))
                                    .sum::<f64>()
                        })
                    } else {
                        let smooth = rules.gl_near.integrate(0.0, 1.0, |z| {
                            fp.eval(z)
                                * e_t
                                    .coeffs()
                                    .iter()
                                    .enumerate()
                                    .map(|(i, ei)| ei * rl_monomial_factor(i, mu) * (2.0 - z).powf(i as f64 + mu))
                                    .sum::<f64>()
                        });
                        let near = jacobi(&|z| {
                            fp.eval(z)
                                * c_t
                                    .coeffs()
                                    .iter()
                                    .enumerate()
                                    .map(|(i, ci)| ci * rl_monomial_factor(i, mu) * (1.0 - z).powi(i as i32))
                                    .sum::<f64>()
                        });
                        smooth - near
                    };
                    blk[(p, q)] = val;
                }
            }
        }
        _ => far_block(d, k, mu, shifted, rules, true, &mut blk),
    }
    blk
}

/// Well-separated elements: tensor Gauss on the smooth kernel
/// `|distance|^{μ−1}/Γ(μ)` avoids the cancellation of the closed forms.
fn far_block(
    d: usize,
    k: usize,
    mu: f64,
    shifted: &[Polynomial],
    rules: &BlockRules,
    right: bool,
    blk: &mut DMatrix<f64>,
) {
    let rule = &rules.gl_far;
    let pts: Vec<(f64, f64, Vec<f64>)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| {
            let z = 0.5 * (1.0 + r);
            (z, 0.5 * w, shifted_values(shifted, z))
        })
        .collect();
    let df = d as f64;
    let inv_gamma = 1.0 / gamma(mu);
    for (z, wz, pz) in &pts {
        for (y, wy, py) in &pts {
            // field point z in element s, source point y in element r
            let dist = if right { df + y - z } else { df + z - y };
            let kern = wz * wy * dist.powf(mu - 1.0) * inv_gamma;
            for q in 0..=k {
                for p in 0..=k {
                    blk[(p, q)] += kern * pz[p] * py[q];
                }
            }
        }
    }
}

impl RieszOperator {
    /// Assembles the matrix from closed-form RL integrals of the shifted
    /// Legendre basis. The left and right parts are built independently and
    /// checked against the adjoint relation before symmetrizing.
    pub fn assemble(mesh: &Mesh1D, order: usize, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if order == 0 {
            return Err(Error::Unsupported("riesz assembly requires order >= 1".into()));
        }
        let mu = 2.0 - beta;
        let k = order;
        let n = mesh.num_elements();
        let shifted: Vec<Polynomial> = (0..=k).map(|q| Polynomial::new(shifted_legendre_coeffs(q))).collect();
        let rules =
            BlockRules { gl_far: gauss_rule(20)?, gl_near: gauss_rule(24)?, gj: gauss_jacobi_rule(k + 3, mu, 0.0)? };
        let blocks: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..n)
            .into_par_iter()
            .map(|d| (left_block(d, k, mu, &shifted, &rules), right_block(d, k, mu, &shifted, &rules)))
            .collect();

        let mut max_entry: f64 = 0.0;
        let mut max_asym: f64 = 0.0;
        for (l, r) in &blocks {
            max_entry = max_entry.max(l.amax()).max(r.amax());
            max_asym = max_asym.max((r - l.transpose()).amax());
        }
        if max_asym > 1e-8 * max_entry.max(f64::MIN_POSITIVE) {
            return Err(Error::Consistency(format!(
                "riesz assembly: left/right parts violate adjointness by {max_asym:.3e}"
            )));
        }

        let nb = k + 1;
        let factor = riesz_scale(beta) * mesh.h().powf(1.0 + mu);
        let mut a = DMatrix::zeros(n * nb, n * nb);
        for s in 0..n {
            for r in 0..n {
                let blk = if s > r {
                    blocks[s - r].0.clone()
                } else if s < r {
                    blocks[r - s].1.clone()
                } else {
                    &blocks[0].0 + &blocks[0].1
                };
                a.view_mut((s * nb, r * nb), (nb, nb)).copy_from(&(blk * factor));
            }
        }
        let sym = (&a + a.transpose()) * 0.5;
        Ok(Self { beta, mesh: *mesh, order, matrix: sym })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `A c`.
    pub fn apply(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.dim() {
            return Err(Error::domain(format!(
                "coefficient vector has length {}, operator dimension is {}",
                coeffs.len(),
                self.dim()
            )));
        }
        let v = &self.matrix * DVector::from_column_slice(coeffs);
        Ok(v.as_slice().to_vec())
    }

    /// CSV dump: `N,k,beta` header line, its values, then matrix rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,k,beta")?;
        writeln!(w, "{},{},{}", self.mesh.num_elements(), self.order, self.beta)?;
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Binary dump: little-endian `u64 N, u64 k, f64 beta`, then row-major `f64`s.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.mesh.num_elements() as u64).to_le_bytes())?;
        w.write_all(&(self.order as u64).to_le_bytes())?;
        w.write_all(&self.beta.to_le_bytes())?;
        for row in self.matrix.row_iter() {
            for v in row.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

impl RieszDump {
    fn dim(num_elements: usize, order: usize) -> Result<usize> {
        num_elements
            .checked_mul(order + 1)
            .filter(|&d| d <= 1 << 16)
            .ok_or_else(|| Error::Parse("matrix dimension in dump header is unreasonable".into()))
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("N,k,beta") {
            return Err(Error::Parse("missing `N,k,beta` header".into()));
        }
        let meta: Vec<&str> =
            lines.next().ok_or_else(|| Error::Parse("missing header values".into()))?.split(',').collect();
        if meta.len() != 3 {
            return Err(Error::Parse("header values must be `N,k,beta`".into()));
        }
        let bad = |what: &str| Error::Parse(format!("invalid {what} in header"));
        let num_elements: usize = meta[0].trim().parse().map_err(|_| bad("N"))?;
        let order: usize = meta[1].trim().parse().map_err(|_| bad("k"))?;
        let beta: f64 = meta[2].trim().parse().map_err(|_| bad("beta"))?;
        let dim = Self::dim(num_elements, order)?;
        let mut values = Vec::with_capacity(dim * dim);
        for (i, line) in lines.enumerate() {
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
            if row.len() != dim {
                return Err(Error::Parse(format!("row {i} has {} entries, expected {dim}", row.len())));
            }
            values.extend(row);
        }
        if values.len() != dim * dim {
            return Err(Error::Parse(format!("expected {dim} rows, found {}", values.len() / dim.max(1))));
        }
        Ok(Self { num_elements, order, beta, matrix: DMatrix::from_row_slice(dim, dim, &values) })
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut buf).map_err(|_| Error::Parse("truncated binary dump".into()))?;
            Ok(buf)
        };
        let num_elements = u64::from_le_bytes(next(&mut r)?) as usize;
        let order = u64::from_le_bytes(next(&mut r)?) as usize;
        let beta = f64::from_le_bytes(next(&mut r)?);
        let dim = Self::dim(num_elements, order)?;
        let mut values = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            values.push(f64::from_le_bytes(next(&mut r)?));
        }
        Ok(Self { num_elements, order, beta, matrix: DMatrix::from_row_slice(dim, dim, &values) })
    }
}
