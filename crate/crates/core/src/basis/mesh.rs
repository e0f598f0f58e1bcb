use crate::error::{Error, Result};

/// Uniform partition of `[x_left, x_right]` into `num_elements` cells.
///
/// Elements and interfaces are 0-based: element `s` covers
/// `[x_left + s h, x_left + (s + 1) h]`, and interface `i` sits at
/// `x_left + i h` for `i = 0..=num_elements` (0 and `num_elements` are the
/// domain boundaries).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    x_left: f64,
    x_right: f64,
    num_elements: usize,
}

impl Mesh1D {
    pub fn new(x_left: f64, x_right: f64, num_elements: usize) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::domain("mesh needs at least one element"));
        }
        if !(x_right > x_left) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::domain(format!("invalid mesh interval [{x_left}, {x_right}]")));
        }
        Ok(Self { x_left, x_right, num_elements })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn h(&self) -> f64 {
        (self.x_right - self.x_left) / self.num_elements as f64
    }

    /// Position of interface `i` (`0..=N`); the last one is exactly `x_right`.
    pub fn interface(&self, i: usize) -> f64 {
        if i == self.num_elements {
            self.x_right
        } else {
            self.x_left + i as f64 * self.h()
        }
    }

    pub fn element_bounds(&self, s: usize) -> (f64, f64) {
        (self.interface(s), self.interface(s + 1))
    }

    /// Maps reference coordinate `r ∈ [-1, 1]` into element `s`.
    pub fn to_physical(&self, s: usize, r: f64) -> f64 {
        let (a, b) = self.element_bounds(s);
        0.5 * (a + b) + 0.5 * (b - a) * r
    }

    /// Element containing `x` and the reference coordinate there. Points on an
    /// interior interface belong to the element on their right.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let tol = 1e-12 * (self.x_right - self.x_left);
        if x < self.x_left - tol || x > self.x_right + tol {
            return None;
        }
        let raw = ((x - self.x_left) / self.h()).floor();
        let s = (raw.max(0.0) as usize).min(self.num_elements - 1);
        let (a, b) = self.element_bounds(s);
        let r = (2.0 * (x - a) / (b - a) - 1.0).clamp(-1.0, 1.0);
        Some((s, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elements_tile_the_domain() {
        let mesh = Mesh1D::new(-2.0, 2.0, 7).unwrap();
        assert!((mesh.h() - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(mesh.interface(0), -2.0);
        assert_eq!(mesh.interface(7), 2.0);
        for s in 0..6 {
            assert_eq!(mesh.element_bounds(s).1, mesh.element_bounds(s + 1).0);
        }
    }

    #[test]
    fn locate_round_trips() {
        let mesh = Mesh1D::new(0.0, 1.0, 10).unwrap();
        let (s, r) = mesh.locate(0.35).unwrap();
        assert_eq!(s, 3);
        assert!((mesh.to_physical(s, r) - 0.35).abs() < 1e-14);
        assert_eq!(mesh.locate(1.0).unwrap().0, 9);
        assert!(mesh.locate(1.5).is_none());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Mesh1D::new(0.0, 1.0, 0).is_err());
        assert!(Mesh1D::new(1.0, 1.0, 3).is_err());
    }
}
