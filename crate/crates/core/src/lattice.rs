//! Exact enumeration of lattice points inside a positive definite binary
//! quadratic region.
//!
//! Bounds come from integer square roots of the relevant discriminants, widened
//! by one unit and then filtered exactly, so no point is ever lost to rounding.

use num_integer::Roots;

use crate::exact::ExactInt;

/// Superset window `[lo, hi]` of the integers `y` with `a y^2 + 2 b y + c < 0`.
///
/// `a` must be positive. Returns `None` when the inequality has no real solution.
pub fn quadratic_window<T: ExactInt + Roots>(a: &T, b: &T, c: &T) -> Option<(T, T)> {
    debug_assert!(a.is_positive());
    let disc = b.clone() * b.clone() - a.clone() * c.clone();
    if !disc.is_positive() {
        return None;
    }
    let s = disc.sqrt();
    let one = T::one();
    let lo = (-b.clone() - s.clone() - one.clone()).div_floor(a);
    let hi = (-b.clone() + s + one).div_ceil(a);
    Some((lo, hi))
}

/// `f(y) = g11 y1^2 + 2 g12 y1 y2 + g22 y2^2 + 2 h1 y1 + 2 h2 y2 + c0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryForm<T> {
    pub g11: T,
    pub g12: T,
    pub g22: T,
    pub h1: T,
    pub h2: T,
    pub c0: T,
}

impl<T: ExactInt + Roots> BinaryForm<T> {
    /// Homogeneous form with Gram matrix `((g11, g12), (g12, g22))`.
    pub fn homogeneous(g11: T, g12: T, g22: T) -> Self {
        Self { g11, g12, g22, h1: T::zero(), h2: T::zero(), c0: T::zero() }
    }

    pub fn det(&self) -> T {
        self.g11.clone() * self.g22.clone() - self.g12.clone() * self.g12.clone()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g11.is_positive() && self.det().is_positive()
    }

    pub fn eval(&self, y: &[T; 2]) -> T {
        let two = T::one() + T::one();
        let (y1, y2) = (y[0].clone(), y[1].clone());
        self.g11.clone() * y1.clone() * y1.clone()
            + two.clone() * self.g12.clone() * y1.clone() * y2.clone()
            + self.g22.clone() * y2.clone() * y2.clone()
            + two.clone() * self.h1.clone() * y1
            + two * self.h2.clone() * y2
            + self.c0.clone()
    }

    /// All `y` with `y = residue (mod modulus)` componentwise and `f(y) < bound`,
    /// paired with `f(y)`, in lexicographic order.
    ///
    /// Panics if the form is not positive definite or `modulus` is not positive.
    pub fn points_below(&self, bound: &T, modulus: &T, residue: &[T; 2]) -> Vec<([T; 2], T)> {
        assert!(self.is_positive_definite(), "form must be positive definite");
        assert!(modulus.is_positive(), "modulus must be positive");
        let mut out = Vec::new();
        let a1 = self.det();
        let b1 = self.h1.clone() * self.g22.clone() - self.g12.clone() * self.h2.clone();
        let c1 = self.c0.clone() * self.g22.clone()
            - self.h2.clone() * self.h2.clone()
            - bound.clone() * self.g22.clone();
        let Some((lo, hi)) = quadratic_window(&a1, &b1, &c1) else {
            return out;
        };
        let mut y1 = first_in_class(&lo, modulus, &residue[0]);
        while y1 <= hi {
            let b2 = self.g12.clone() * y1.clone() + self.h2.clone();
            let two = T::one() + T::one();
            let c2 = self.g11.clone() * y1.clone() * y1.clone()
                + two * self.h1.clone() * y1.clone()
                + self.c0.clone()
                - bound.clone();
            if let Some((lo2, hi2)) = quadratic_window(&self.g22, &b2, &c2) {
                let mut y2 = first_in_class(&lo2, modulus, &residue[1]);
                while y2 <= hi2 {
                    let y = [y1.clone(), y2.clone()];
                    let v = self.eval(&y);
                    if &v < bound {
                        out.push((y, v));
                    }
                    y2 = y2 + modulus.clone();
                }
            }
            y1 = y1 + modulus.clone();
        }
        out
    }
}

/// Smallest integer `>= lo` congruent to `residue` modulo `m`.
fn first_in_class<T: ExactInt>(lo: &T, m: &T, residue: &T) -> T {
    lo.clone() + (residue.clone() - lo.clone()).mod_floor(m)
}
