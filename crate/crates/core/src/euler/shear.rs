//! Stationary strip shears.
//!
//! Vorticity constant on each vertical strip `[n, n+1) x R` gives the
//! velocity `u = (0, g(x1))` with `g' = ω`. Such flows are exact stationary
//! solutions of the Euler equations.

use crate::geom::{Point2, Vel2};

/// Velocity of the strip vorticity `ω(x) = a_{n mod L}` for `x1 ∈ [n, n+1)`,
/// normalized by `u2(0) = 0`:
/// `u2(x) = a_n (x1 - n) + Σ_{k=0}^{n-1} a_k`, where the sum runs backwards
/// for negative `n`. The profile is periodic exactly when the weights sum to
/// zero.
pub fn shear_profile(weights: &[f64], x: Point2) -> Vel2 {
    assert!(!weights.is_empty(), "at least one strip weight is required");
    let l = weights.len() as i64;
    let n = x.x1.floor() as i64;
    let (q, r) = (n.div_euclid(l), n.rem_euclid(l) as usize);
    let period: f64 = weights.iter().sum();
    let prefix: f64 = weights[..r].iter().sum();
    Vel2::new(0.0, weights[r] * (x.x1 - n as f64) + (q as f64 * period + prefix))
}
