//! Residual of the weak formulation against divergence-free test fields.
//!
//! For `Φ(x, t) = η(t) ∇⊥φ(x)` the residual is
//! `∫∫ (u · ∂tΦ + u · (u · ∇)Φ) dx dt + ∫ u0 · Φ(0, ·) dx`,
//! which vanishes for weak solutions.

use serde::{Deserialize, Serialize};

use super::state::{velocity_from_vorticity, TorusState};
use crate::error::{Error, Result};
use crate::geom::{Point2, Vel2};

/// `Φ(x, t) = η(t/T) ∇⊥φ((x - c)/r)` with the bumps
/// `φ(z) = exp(-1/(1 - |z|^2))` and `η(s) = exp(1 - 1/(1 - s^2))`,
/// supported in the disk of radius `r` and in `[0, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestField {
    pub center: Point2,
    pub radius: f64,
    pub t_support: f64,
}

/// Second-order jet of `φ` at a point.
#[derive(Debug, Clone, Copy, Default)]
struct Jet {
    d1: f64,
    d2: f64,
    d11: f64,
    d12: f64,
    d22: f64,
}

impl TestField {
    pub fn new(center: Point2, radius: f64, t_support: f64) -> Self {
        Self { center, radius, t_support }
    }

    /// Time profile `η`, with `η(0) = 1`.
    pub fn eta(&self, t: f64) -> f64 {
        let s = t / self.t_support;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn eta_dot(&self, t: f64) -> f64 {
        let s = t / self.t_support;
        if s.abs() >= 1.0 {
            0.0
        } else {
            let d = 1.0 - s * s;
            -2.0 * s / (d * d) * self.eta(t) / self.t_support
        }
    }

    fn jet(&self, x: Point2) -> Option<Jet> {
        let r2 = self.radius * self.radius;
        let z = x - self.center;
        let rho = z.norm_sq() / r2;
        if rho >= 1.0 {
            return None;
        }
        // φ = b(ρ) with ρ = |x - c|^2 / r^2.
        let d = 1.0 - rho;
        let b = (-1.0 / d).exp();
        let b1 = -b / (d * d);
        let b2 = b * (1.0 / (d * d * d * d) - 2.0 / (d * d * d));
        let (z1, z2) = (z.x1, z.x2);
        Some(Jet {
            d1: 2.0 * b1 * z1 / r2,
            d2: 2.0 * b1 * z2 / r2,
            d11: 4.0 * b2 * z1 * z1 / (r2 * r2) + 2.0 * b1 / r2,
            d12: 4.0 * b2 * z1 * z2 / (r2 * r2),
            d22: 4.0 * b2 * z2 * z2 / (r2 * r2) + 2.0 * b1 / r2,
        })
    }

    /// Spatial part `∇⊥φ = (-∂2 φ, ∂1 φ)`.
    pub fn spatial(&self, x: Point2) -> Vel2 {
        match self.jet(x) {
            Some(j) => Vel2::new(-j.d2, j.d1),
            None => Vel2::ZERO,
        }
    }

    fn validate(&self, l: f64, t_end: f64) -> Result<()> {
        let c = self.center;
        let r = self.radius;
        if !(r > 0.0) || !c.is_finite() || !r.is_finite() {
            return Err(Error::Support(format!("bad test field centre {c:?} / radius {r}")));
        }
        let inside = |v: f64| v - r > 0.0 && v + r < l;
        if !(inside(c.x1) && inside(c.x2)) {
            return Err(Error::Support(format!(
                "disk of radius {r} about {c:?} is not strictly inside [0, {l})^2"
            )));
        }
        if !(self.t_support > 0.0 && self.t_support <= t_end) {
            return Err(Error::Support(format!(
                "time support [0, {}) not inside the trajectory window [0, {t_end}]",
                self.t_support
            )));
        }
        Ok(())
    }
}

/// Grid velocities on the nodes `(j1 h, j2 h)` at increasing times starting
/// from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub l: f64,
    pub n: usize,
    pub times: Vec<f64>,
    pub u1: Vec<Vec<f64>>,
    pub u2: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn from_states(states: &[TorusState]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::Config("trajectory needs at least one snapshot".into()))?;
        let mut tr = Self { l: first.l, n: first.n, times: vec![], u1: vec![], u2: vec![] };
        for s in states {
            if s.l != tr.l || s.n != tr.n {
                return Err(Error::Config("snapshots have different grids".into()));
            }
            let u = velocity_from_vorticity(s);
            tr.times.push(s.t);
            tr.u1.push(u.u1);
            tr.u2.push(u.u2);
        }
        Ok(tr)
    }

    /// Sample a velocity field `u(x, t)` on the grid at the given times.
    pub fn from_fn(l: f64, n: usize, times: &[f64], u: impl Fn(Point2, f64) -> Vel2) -> Self {
        let h = l / n as f64;
        let mut tr = Self { l, n, times: times.to_vec(), u1: vec![], u2: vec![] };
        for &t in times {
            let (mut a, mut b) = (Vec::with_capacity(n * n), Vec::with_capacity(n * n));
            for j2 in 0..n {
                for j1 in 0..n {
                    let v = u(Point2::new(j1 as f64 * h, j2 as f64 * h), t);
                    a.push(v.u1);
                    b.push(v.u2);
                }
            }
            tr.u1.push(a);
            tr.u2.push(b);
        }
        tr
    }
}

/// Weak-formulation residual of `traj` against `test`: trapezoidal rule over
/// the snapshot times, grid sums in space.
pub fn weak_residual(traj: &Trajectory, test: &TestField) -> Result<f64> {
    let k = traj.times.len();
    if k < 2 || traj.times[0] != 0.0 || traj.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("snapshot times must start at 0 and increase".into()));
    }
    test.validate(traj.l, traj.times[k - 1])?;
    let n = traj.n;
    let h = traj.l / n as f64;
    let area = h * h;
    let jets: Vec<(usize, Jet)> = (0..n * n)
        .filter_map(|idx| {
            let p = Point2::new((idx % n) as f64 * h, (idx / n) as f64 * h);
            test.jet(p).map(|j| (idx, j))
        })
        .collect();
    // Per snapshot: A = ∫ u · ∇⊥φ and B = ∫ u · (u · ∇)∇⊥φ.
    let moments = |s: usize| {
        let (u1, u2) = (&traj.u1[s], &traj.u2[s]);
        let (mut a, mut b) = (0.0, 0.0);
        for &(idx, j) in &jets {
            let (v1, v2) = (u1[idx], u2[idx]);
            a += -v1 * j.d2 + v2 * j.d1;
            b += (v2 * v2 - v1 * v1) * j.d12 + v1 * v2 * (j.d11 - j.d22);
        }
        (a * area, b * area)
    };
    let mut total = 0.0;
    for s in 0..k {
        let t = traj.times[s];
        let left = if s > 0 { t - traj.times[s - 1] } else { 0.0 };
        let right = if s + 1 < k { traj.times[s + 1] - t } else { 0.0 };
        let w = 0.5 * (left + right);
        let (eta, eta_dot) = (test.eta(t), test.eta_dot(t));
        if eta == 0.0 && eta_dot == 0.0 && s > 0 {
            continue;
        }
        let (a, b) = moments(s);
        total += w * (eta_dot * a + eta * b);
        if s == 0 {
            total += eta * a;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::shear_profile;

    fn test_field() -> TestField {
        TestField::new(Point2::new(4.3, 3.9), 2.5, 1.0)
    }

    #[test]
    fn zero_trajectory_has_zero_residual() {
        let tr = Trajectory::from_fn(8.0, 64, &[0.0, 0.5, 1.0], |_, _| Vel2::ZERO);
        assert_eq!(weak_residual(&tr, &test_field()).unwrap(), 0.0);
    }

    #[test]
    fn support_violations() {
        let tr = Trajectory::from_fn(8.0, 64, &[0.0, 0.5, 1.0], |_, _| Vel2::ZERO);
        for bad in [
            TestField::new(Point2::new(1.0, 4.0), 1.5, 1.0),
            TestField::new(Point2::new(4.0, 7.5), 1.0, 1.0),
            TestField::new(Point2::new(4.0, 4.0), 1.0, 1.5),
            TestField::new(Point2::new(4.0, 4.0), 0.0, 1.0),
        ] {
            assert!(matches!(weak_residual(&tr, &bad), Err(Error::Support(_))), "{bad:?}");
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let tf = test_field();
        let x = Point2::new(5.1, 3.2);
        let e = 1e-5;
        let j = tf.jet(x).unwrap();
        let phi = |p: Point2| {
            let rho = (p - tf.center).norm_sq() / (tf.radius * tf.radius);
            (-1.0 / (1.0 - rho)).exp()
        };
        let d1 = (phi(x + Point2::new(e, 0.0)) - phi(x - Point2::new(e, 0.0))) / (2.0 * e);
        let d2 = (phi(x + Point2::new(0.0, e)) - phi(x - Point2::new(0.0, e))) / (2.0 * e);
        assert!((d1 - j.d1).abs() < 1e-8 && (d2 - j.d2).abs() < 1e-8);
        let g = |p: Point2| tf.jet(p).unwrap();
        let d11 = (g(x + Point2::new(e, 0.0)).d1 - g(x - Point2::new(e, 0.0)).d1) / (2.0 * e);
        let d12 = (g(x + Point2::new(0.0, e)).d1 - g(x - Point2::new(0.0, e)).d1) / (2.0 * e);
        let d22 = (g(x + Point2::new(0.0, e)).d2 - g(x - Point2::new(0.0, e)).d2) / (2.0 * e);
        assert!((d11 - j.d11).abs() < 1e-7 && (d12 - j.d12).abs() < 1e-7 && (d22 - j.d22).abs() < 1e-7);
        let de = (tf.eta(0.3 + e) - tf.eta(0.3 - e)) / (2.0 * e);
        assert!((de - tf.eta_dot(0.3)).abs() < 1e-8);
    }

    #[test]
    fn stationary_shear_residual_is_second_order_in_time() {
        // The trapezoidal rule applied to η' leaves (Δt^2 / 12) η''(0) ∫ u0 · ∇⊥φ.
        let w = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0];
        let residual = |k: usize| {
            let times: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
            let tr = Trajectory::from_fn(8.0, 128, &times, |x, _| shear_profile(&w, x));
            weak_residual(&tr, &test_field()).unwrap()
        };
        let (a, b) = (residual(64), residual(128));
        assert!(a.abs() < 1e-4, "{a}");
        assert!((3.5..4.5).contains(&(a / b)), "{a} {b}");
    }
}
