//! Deterministic lattice sums for second moments of `u0`.
//!
//! For independent mean-zero unit-variance weights,
//! `E[(Σ a_n c_n)·(Σ a_n d_n)] = Σ c_n·d_n`, so every second moment of the
//! field is a lattice sum of products of patch-velocity differences.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::geom::{Point2, Vel2};
use crate::kernel::{patch_velocity, PatchVelocityEvaluator, PATCH_CENTER};
use crate::lattice_sum::{lattice_sum, LatticeRange};

// Corners of a translated patch lie within √2/2 of its centre.
const PATCH_PAD: f64 = 1.0;

fn checked_sum(
    centers: &[Point2],
    pad: f64,
    range: LatticeRange,
    f: impl Fn(Point2) -> Result<f64>,
) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let g = |n: Point2| match f(n) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let s = lattice_sum(&g, centers, pad, range);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(s),
    }
}

fn diff(eval: &PatchVelocityEvaluator, p: Point2, q: Point2) -> Result<Vel2> {
    Ok(patch_velocity(p, eval)? - patch_velocity(q, eval)?)
}

fn finite(p: Point2) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("non-finite evaluation point".into()))
    }
}

/// `E|u0(x)|^2 = Σ_n |v(x+n) - v(n)|^2`.
pub fn exact_second_moment(
    x: Point2,
    range: LatticeRange,
    eval: &PatchVelocityEvaluator,
) -> Result<f64> {
    finite(x)?;
    checked_sum(&[PATCH_CENTER - x, PATCH_CENTER], PATCH_PAD, range, |n| {
        Ok(diff(eval, x + n, n)?.norm_sq())
    })
}

/// `E|u0(x) - u0(y)|^2 = Σ_n |v(x+n) - v(y+n)|^2`.
pub fn exact_increment_moment(
    x: Point2,
    y: Point2,
    range: LatticeRange,
    eval: &PatchVelocityEvaluator,
) -> Result<f64> {
    finite(x)?;
    finite(y)?;
    checked_sum(&[PATCH_CENTER - x, PATCH_CENTER - y], PATCH_PAD, range, |n| {
        Ok(diff(eval, x + n, y + n)?.norm_sq())
    })
}

/// `E[u0(x)·u0(y)] = Σ_n (v(x+n) - v(n))·(v(y+n) - v(n))`.
pub fn exact_covariance(
    x: Point2,
    y: Point2,
    range: LatticeRange,
    eval: &PatchVelocityEvaluator,
) -> Result<f64> {
    finite(x)?;
    finite(y)?;
    if x == y {
        return exact_second_moment(x, range, eval);
    }
    checked_sum(&[PATCH_CENTER - x, PATCH_CENTER - y, PATCH_CENTER], PATCH_PAD, range, |n| {
        let vn = patch_velocity(n, eval)?;
        Ok((patch_velocity(x + n, eval)? - vn).dot(patch_velocity(y + n, eval)? - vn))
    })
}

/// `S(x, y) = Σ_n (1 + |n - x|)^{-2} (1 + |n - y|)^{-2}`.
pub fn s_sum(x: Point2, y: Point2, range: LatticeRange) -> Result<f64> {
    finite(x)?;
    finite(y)?;
    // Summing the symmetric product with the centres in a fixed order makes
    // the result exactly symmetric in (x, y).
    let (p, q) = if (x.x1, x.x2) <= (y.x1, y.x2) { (x, y) } else { (y, x) };
    checked_sum(&[p, q], 1.0, range, |n| {
        let a = 1.0 + n.dist(p);
        let b = 1.0 + n.dist(q);
        Ok(1.0 / (a * a * b * b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev() -> PatchVelocityEvaluator {
        PatchVelocityEvaluator::closed_form()
    }

    #[test]
    fn trivial_values() {
        let r = LatticeRange::Disk(30);
        assert_eq!(exact_second_moment(Point2::ORIGIN, r, &ev()).unwrap(), 0.0);
        let x = Point2::new(3.0, 1.5);
        assert_eq!(exact_increment_moment(x, x, r, &ev()).unwrap(), 0.0);
        assert_eq!(exact_covariance(x, Point2::ORIGIN, r, &ev()).unwrap(), 0.0);
        assert_eq!(
            exact_increment_moment(x, Point2::ORIGIN, r, &ev()).unwrap(),
            exact_second_moment(x, r, &ev()).unwrap()
        );
        assert_eq!(exact_covariance(x, x, r, &ev()).unwrap(), exact_second_moment(x, r, &ev()).unwrap());
    }

    #[test]
    fn polarization_identity() {
        let x = Point2::new(7.2, -3.1);
        let y = Point2::new(-2.5, 4.0);
        for r in [LatticeRange::Disk(60), LatticeRange::Whole] {
            let mx = exact_second_moment(x, r, &ev()).unwrap();
            let my = exact_second_moment(y, r, &ev()).unwrap();
            let c = exact_covariance(x, y, r, &ev()).unwrap();
            let inc = exact_increment_moment(x, y, r, &ev()).unwrap();
            assert!((inc - (mx + my - 2.0 * c)).abs() <= 1e-10 * inc, "{r:?}");
            assert!(c * c <= mx * my);
        }
    }

    #[test]
    fn whole_lattice_is_the_limit_of_disks() {
        let x = Point2::new(10.0, 0.0);
        let whole = exact_second_moment(x, LatticeRange::Whole, &ev()).unwrap();
        let disk = exact_second_moment(x, LatticeRange::Disk(400), &ev()).unwrap();
        // Tail beyond |n| = M is about |x|^2 / (4π M^2).
        let tail = x.norm_sq() / (4.0 * std::f64::consts::PI * 400.0 * 400.0);
        assert!((whole - disk - tail).abs() < 0.05 * tail, "{whole} {disk} {tail}");
    }

    #[test]
    fn square_engine_matches_direct_moment() {
        let x = Point2::new(25.5, 13.25);
        let fast = exact_second_moment(x, LatticeRange::Square(200), &ev()).unwrap();
        let mut slow = crate::geom::KahanSum::new();
        for n2 in -200i64..=200 {
            for n1 in -200i64..=200 {
                let n = Point2::lattice(n1, n2);
                slow.add(diff(&ev(), x + n, n).unwrap().norm_sq());
            }
        }
        assert!((fast - slow.value()).abs() < 1e-11 * fast);
    }

    #[test]
    fn s_sum_at_origin() {
        let o = Point2::ORIGIN;
        let a = s_sum(o, o, LatticeRange::Disk(500)).unwrap();
        let b = s_sum(o, o, LatticeRange::Disk(1000)).unwrap();
        assert!(a > 1.0 && a < 2.0);
        // The annulus 500 < |n| <= 1000 carries about π (1/501² - 1/1001²).
        let annulus = std::f64::consts::PI * (501f64.powi(-2) - 1001f64.powi(-2));
        assert!(((b - a) / annulus - 1.0).abs() < 0.02, "{}", b - a);
        let w = s_sum(o, o, LatticeRange::Whole).unwrap();
        let tail = std::f64::consts::PI * 1001f64.powi(-2);
        assert!(((w - b) / tail - 1.0).abs() < 0.02, "{}", w - b);
        let x = Point2::new(3.3, -1.0);
        let y = Point2::new(-40.0, 7.5);
        assert_eq!(s_sum(x, y, LatticeRange::Whole).unwrap(), s_sum(y, x, LatticeRange::Whole).unwrap());
    }
}
