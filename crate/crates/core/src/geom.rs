//! Plane points and velocity values.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point of the plane, in lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

/// A velocity value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vel2 {
    pub u1: f64,
    pub u2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    /// Lattice point `n = (n1, n2)` as a point.
    pub fn lattice(n1: i64, n2: i64) -> Self {
        Self::new(n1 as f64, n2 as f64)
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    /// Rotation by a quarter turn: `(x1, x2) -> (-x2, x1)`.
    pub fn perp(self) -> Self {
        Self::new(-self.x2, self.x1)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Componentwise floor, i.e. the index of the unit cell containing the point.
    pub fn cell(self) -> (i64, i64) {
        (self.x1.floor() as i64, self.x2.floor() as i64)
    }
}

impl Vel2 {
    pub const ZERO: Vel2 = Vel2 { u1: 0.0, u2: 0.0 };

    pub const fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn norm(self) -> f64 {
        self.u1.hypot(self.u2)
    }

    pub fn norm_sq(self) -> f64 {
        self.u1 * self.u1 + self.u2 * self.u2
    }

    pub fn dot(self, other: Vel2) -> f64 {
        self.u1 * other.u1 + self.u2 * other.u2
    }

    pub fn is_finite(self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    pub fn max_abs_diff(self, other: Vel2) -> f64 {
        (self.u1 - other.u1).abs().max((self.u2 - other.u2).abs())
    }
}

macro_rules! impl_vec_ops {
    ($t:ident, $a:ident, $b:ident) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                $t::new(self.$a + o.$a, self.$b + o.$b)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                $t::new(self.$a - o.$a, self.$b - o.$b)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t::new(-self.$a, -self.$b)
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                $t::new(self.$a * s, self.$b * s)
            }
        }
    };
}

impl_vec_ops!(Point2, x1, x2);
impl_vec_ops!(Vel2, u1, u2);

/// Compensated (Neumaier) accumulator for an `f64` sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
