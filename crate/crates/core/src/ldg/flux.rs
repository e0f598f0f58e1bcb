use super::problem::Convection;
use crate::error::{Error, Result};

/// Interface treatment shared by all LDG fluxes.
///
/// Interior traces alternate: `V̂ = V⁻`, `φ̂ = φ(V⁻)`, `L̂ = L⁺`, `Ê = E⁺`.
/// At the two boundaries `V̂` is the Dirichlet datum and the auxiliary traces
/// are penalized, `Ẑ = Z_interior + (σ/h)⟦V⟧` with the datum on the outer side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSpec {
    penalty: f64,
}

impl FluxSpec {
    pub fn new(penalty: f64) -> Result<Self> {
        if !(penalty >= 0.0 && penalty.is_finite()) {
            return Err(Error::domain(format!("penalty must be non-negative, got {penalty}")));
        }
        Ok(Self { penalty })
    }

    /// Boundary penalty coefficient `σ`.
    pub fn penalty(&self) -> f64 {
        self.penalty
    }
}

impl Default for FluxSpec {
    fn default() -> Self {
        Self { penalty: 1.0 }
    }
}

/// Local Lax–Friedrichs viscosity `λ* = max |F'|` between the two states.
pub fn llf_speed(f: &Convection, v_minus: f64, v_plus: f64) -> f64 {
    f.max_speed(v_minus, v_plus)
}

/// Local Lax–Friedrichs flux `½(F(v⁻)+F(v⁺)) − (λ*/2)(v⁺−v⁻)`.
pub fn convection_flux(f: &Convection, v_minus: f64, v_plus: f64) -> f64 {
    let lambda = llf_speed(f, v_minus, v_plus);
    0.5 * (f.value(v_minus) + f.value(v_plus)) - 0.5 * lambda * (v_plus - v_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let f = Convection::Burgers;
        assert_eq!(convection_flux(&f, 1.0, 1.0), 0.5);
        assert_eq!(convection_flux(&f, 1.0, 0.0), 0.75);
        // ψ⟦v⟧ − F̂⟦v⟧ at (1, 0)
        let e = (f.potential(0.0) - f.potential(1.0)) - convection_flux(&f, 1.0, 0.0) * (0.0 - 1.0);
        assert!((e - 0.5833333333333334).abs() < 1e-12);
        assert!(FluxSpec::new(-1.0).is_err());
        assert_eq!(FluxSpec::default().penalty(), 1.0);
    }

    proptest! {
        #[test]
        fn consistent_monotone_and_entropy(a in -3.0f64..3.0, b in -3.0f64..3.0, d in 0.0f64..0.5) {
            for f in [Convection::Burgers, Convection::QuarticPlusLinear, Convection::Linear { speed: -1.3 }] {
                prop_assert!((convection_flux(&f, a, a) - f.value(a)).abs() < 1e-12 * (1.0 + f.value(a).abs()));
                // E-flux: ψ⟦v⟧ − F̂⟦v⟧ ≥ 0
                let jump = b - a;
                let e = (f.potential(b) - f.potential(a)) - convection_flux(&f, a, b) * jump;
                prop_assert!(e >= -1e-12 * (1.0 + f.potential(a).abs() + f.potential(b).abs()));
            }
            // monotone in each argument for Burgers within the frozen speed range
            let f = Convection::Burgers;
            let lam = llf_speed(&f, a, b).max(llf_speed(&f, a + d, b)).max(llf_speed(&f, a, b + d));
            let mono = |x: f64, y: f64| 0.5 * (f.value(x) + f.value(y)) - 0.5 * lam * (y - x);
            prop_assert!(mono(a + d, b) >= mono(a, b) - 1e-12);
            prop_assert!(mono(a, b + d) <= mono(a, b) + 1e-12);
        }
    }
}
