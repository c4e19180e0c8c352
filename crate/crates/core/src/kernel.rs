//! Single-patch mathematics: the Biot-Savart kernel, the velocity of the unit
//! square vortex patch, and the data behind its log-Lipschitz modulus.
//!
//! The patch velocity is `v(x) = ∫_{Q0} K(x - y) dy` with `Q0 = [0,1)^2`. It is
//! evaluated in closed form from the antiderivative of the logarithmic stream
//! function (corner terms of `x ln` and `arctan` type). Far from the patch the
//! corner terms cancel catastrophically, so beyond `MULTIPOLE_RADIUS` from the
//! centre the exact multipole series of the square is used instead; the two
//! agree to round-off on the switching circle.

use std::f64::consts::FRAC_1_PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geom::{Point2, Vel2};
use crate::quadrature::patch_velocity_quadrature;

const INV_TWO_PI: f64 = 0.5 * FRAC_1_PI;

/// Centre of the unit patch `Q0`.
pub const PATCH_CENTER: Point2 = Point2::new(0.5, 0.5);

/// Distance from the patch centre beyond which the multipole series is used.
pub const MULTIPOLE_RADIUS: f64 = 3.0;

/// Highest multipole order kept (orders are multiples of four by symmetry).
const MULTIPOLE_ORDER: usize = 24;

/// Empirical constant `C` in `|v(x) - v(y)| <= C |x-y| (1 + L) / ((1+|x|)(1+|y|))`,
/// fitted by the pair-sampling study and rounded up.
pub const LOG_LIPSCHITZ_CONSTANT: f64 = 2.0;

/// `K(z) = z^⊥ / (2π |z|^2)` without validation.
#[inline]
pub fn biot_savart_unchecked(z: Point2) -> Vel2 {
    let s = INV_TWO_PI / z.norm_sq();
    Vel2::new(-z.x2 * s, z.x1 * s)
}

/// The Biot-Savart kernel `K(z) = z^⊥ / (2π |z|^2)`.
pub fn biot_savart(z: Point2) -> Result<Vel2> {
    if !z.is_finite() {
        return domain(format!("non-finite argument ({}, {})", z.x1, z.x2));
    }
    if z.x1 == 0.0 && z.x2 == 0.0 {
        return domain("Biot-Savart kernel is singular at the origin");
    }
    Ok(biot_savart_unchecked(z))
}

/// `K(a) - K(b)` evaluated without cancellation when `a` and `b` are close.
///
/// Uses `a/|a|^2 - b/|b|^2 = (a (d·(a+b)) - d |a|^2) / (|a|^2 |b|^2)` with
/// `d = b - a`, taking `|a| <= |b|` so that the rounding error of each term
/// is bounded by a small multiple of `|a| |b| |d|`.
pub fn biot_savart_difference(a: Point2, b: Point2) -> Result<Vel2> {
    if !a.is_finite() || !b.is_finite() {
        return domain("non-finite argument");
    }
    if a.norm_sq() == 0.0 || b.norm_sq() == 0.0 {
        return domain("Biot-Savart kernel is singular at the origin");
    }
    if a.norm_sq() > b.norm_sq() {
        return Ok(-biot_savart_difference(b, a)?);
    }
    let d = b - a;
    let na = a.norm_sq();
    let nb = b.norm_sq();
    let n = a * d.dot(a + b) - d * na;
    let s = INV_TWO_PI / (na * nb);
    Ok(Vel2::new(-n.x2 * s, n.x1 * s))
}

/// Both sides of `|K(a) - K(b)| = |a - b| / (2π |a| |b|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn kernel_difference_identity(a: Point2, b: Point2) -> Result<KernelIdentity> {
    if a == b {
        return domain("kernel difference identity needs a != b");
    }
    let lhs = biot_savart_difference(a, b)?.norm();
    let rhs = INV_TWO_PI * (a - b).norm() / (a.norm() * b.norm());
    Ok(KernelIdentity { lhs, rhs })
}

/// Complex moments `∫ (w1 + i w2)^k dw` of `[-1/2, 1/2]^2` for `k = 4, 8, ...`.
fn square_moments() -> &'static [f64] {
    static MOMENTS: OnceLock<Vec<f64>> = OnceLock::new();
    MOMENTS.get_or_init(|| {
        let line = |p: usize| if p % 2 == 1 { 0.0 } else { 0.5f64.powi(p as i32) / (p as f64 + 1.0) };
        (1..=MULTIPOLE_ORDER / 4)
            .map(|j| {
                let k = 4 * j;
                let mut acc = Complex64::new(0.0, 0.0);
                let mut binom = 1.0;
                for m in 0..=k {
                    acc += Complex64::i().powu(m as u32) * (binom * line(k - m) * line(m));
                    binom = binom * (k - m) as f64 / (m + 1) as f64;
                }
                debug_assert!(acc.im.abs() < 1e-15);
                acc.re
            })
            .collect()
    })
}

/// Multipole series of the patch velocity about the patch centre.
///
/// With `z = x - c` as a complex number, `u2 + i u1 = (1/2π) (1/z + Σ m_k z^{-k-1})`.
fn multipole_velocity(x: Point2) -> Vel2 {
    let z = Complex64::new(x.x1 - PATCH_CENTER.x1, x.x2 - PATCH_CENTER.x2);
    let q = z.inv();
    let q4 = (q * q) * (q * q);
    let moments = square_moments();
    let mut poly = Complex64::new(0.0, 0.0);
    for m in moments.iter().rev() {
        poly = (poly + m) * q4;
    }
    let w = q * (poly + 1.0) * INV_TWO_PI;
    Vel2::new(w.im, w.re)
}

/// Antiderivative with `∂a ∂b G = a / (a^2 + b^2)`.
#[inline]
fn corner_term(a: f64, b: f64) -> f64 {
    let r2 = a * a + b * b;
    let log_part = if b == 0.0 { 0.0 } else { 0.5 * b * r2.ln() };
    let atan_part = if a == 0.0 { 0.0 } else { a * (b / a).atan() };
    log_part + atan_part
}

/// Closed-form corner-term evaluation of the patch velocity.
pub fn patch_velocity_corners(x: Point2) -> Vel2 {
    let (a1, a0) = (x.x1, x.x1 - 1.0);
    let (b1, b0) = (x.x2, x.x2 - 1.0);
    let v2 = corner_term(a1, b1) - corner_term(a0, b1) - corner_term(a1, b0) + corner_term(a0, b0);
    let v1 = corner_term(b1, a1) - corner_term(b1, a0) - corner_term(b0, a1) + corner_term(b0, a0);
    Vel2::new(-INV_TWO_PI * v1, INV_TWO_PI * v2)
}

/// Patch velocity `v(x)` in closed form (no validation).
#[inline]
pub fn patch_velocity_closed_form(x: Point2) -> Vel2 {
    if (x - PATCH_CENTER).norm_sq() >= MULTIPOLE_RADIUS * MULTIPOLE_RADIUS {
        multipole_velocity(x)
    } else {
        patch_velocity_corners(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchMethod {
    ClosedForm,
    AdaptiveQuadrature,
}

/// Evaluator for the single-patch velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchVelocityEvaluator {
    method: PatchMethod,
    tolerance: f64,
}

impl PatchVelocityEvaluator {
    pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;
    /// Nominal accuracy claimed by the closed form.
    pub const CLOSED_FORM_TOL: f64 = 1e-12;

    pub fn new(method: PatchMethod, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {tolerance}")));
        }
        Ok(Self { method, tolerance })
    }

    pub fn closed_form() -> Self {
        Self { method: PatchMethod::ClosedForm, tolerance: Self::CLOSED_FORM_TOL }
    }

    pub fn quadrature(tolerance: f64) -> Result<Self> {
        Self::new(PatchMethod::AdaptiveQuadrature, tolerance)
    }

    pub fn method(&self) -> PatchMethod {
        self.method
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `v(x)`, to within `tolerance` per component.
    pub fn velocity(&self, x: Point2) -> Result<Vel2> {
        if !x.is_finite() {
            return domain(format!("non-finite point ({}, {})", x.x1, x.x2));
        }
        match self.method {
            PatchMethod::ClosedForm => Ok(patch_velocity_closed_form(x)),
            PatchMethod::AdaptiveQuadrature => patch_velocity_quadrature(x, self.tolerance),
        }
    }
}

impl Default for PatchVelocityEvaluator {
    fn default() -> Self {
        Self::closed_form()
    }
}

/// `v(x)` with the given evaluator.
pub fn patch_velocity(x: Point2, eval: &PatchVelocityEvaluator) -> Result<Vel2> {
    eval.velocity(x)
}

/// `ln^-(z) = -min(0, ln z)`.
pub fn log_minus(z: f64) -> f64 {
    -(z.ln().min(0.0))
}

/// Membership in the concentric triple `3Q0 = [-1, 2)^2`.
pub fn in_triple_patch(p: Point2) -> bool {
    (-1.0..2.0).contains(&p.x1) && (-1.0..2.0).contains(&p.x2)
}

/// Raw data of the log-Lipschitz bound `|v(x) - v(y)| <= C · envelope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLipschitzData {
    /// `|v(x) - v(y)|`.
    pub lhs: f64,
    /// `|x - y| (1 + L) / ((1 + |x|)(1 + |y|))`.
    pub envelope: f64,
    /// `L(x, y) = 1{x, y ∈ 3Q0} ln^-|x - y|`.
    pub log_factor: f64,
}

impl LogLipschitzData {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.envelope
    }
}

pub fn log_lipschitz_data(
    x: Point2,
    y: Point2,
    eval: &PatchVelocityEvaluator,
) -> Result<LogLipschitzData> {
    if x == y {
        return domain("log-Lipschitz data needs x != y");
    }
    let sep = x.dist(y);
    let log_factor =
        if in_triple_patch(x) && in_triple_patch(y) { log_minus(sep) } else { 0.0 };
    let lhs = (eval.velocity(x)? - eval.velocity(y)?).norm();
    let envelope = sep * (1.0 + log_factor) / ((1.0 + x.norm()) * (1.0 + y.norm()));
    Ok(LogLipschitzData { lhs, envelope, log_factor })
}

/// Quarter-turn rotation about the patch centre.
pub fn rotate_about_center(p: Point2) -> Point2 {
    PATCH_CENTER + (p - PATCH_CENTER).perp()
}

/// Quarter-turn rotation of a velocity vector.
pub fn rotate_velocity(v: Vel2) -> Vel2 {
    Vel2::new(-v.u2, v.u1)
}
