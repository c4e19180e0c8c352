//! Gauss rules from three-term recurrences, and the adaptive cubature used as
//! the independent oracle for the patch velocity.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geom::{Point2, Vel2};
use crate::kernel::biot_savart_unchecked;

/// A one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub-Welsch: nodes and weights of the `n`-point Gauss rule for a measure of
/// total mass `mass` whose monic orthogonal polynomials have zero diagonal
/// recurrence coefficients and off-diagonal coefficients `beta(k)`, `k >= 1`.
fn golub_welsch(n: usize, mass: f64, beta: impl Fn(usize) -> f64) -> Rule {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = beta(k);
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize: the measures used here are symmetric about the origin.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    golub_welsch(n, 2.0, |k| {
        let k = k as f64;
        k / (4.0 * k * k - 1.0).sqrt()
    })
}

/// Discrete Gauss rule for sums over the integers `0, 1, ..., len - 1`.
///
/// The rule has `min(n, len)` nodes; when `len <= n` it is the trivial rule
/// with unit weights at every integer, otherwise it integrates polynomials of
/// degree `< 2n` exactly against the counting measure (Gram polynomials).
pub fn discrete_gauss(n: usize, len: u64) -> Rule {
    assert!(len >= 1 && n >= 1);
    if len <= n as u64 {
        return Rule {
            nodes: (0..len).map(|j| j as f64).collect(),
            weights: vec![1.0; len as usize],
        };
    }
    let b = len as f64;
    let scaled = golub_welsch(n, b, |k| {
        let k = k as f64;
        k * ((1.0 - (k / b).powi(2)) / (4.0 * k * k - 1.0)).sqrt()
    });
    let mid = 0.5 * (b - 1.0);
    let half = 0.5 * b;
    Rule {
        nodes: scaled.nodes.iter().map(|s| mid + half * s).collect(),
        weights: scaled.weights,
    }
}

const PATCH_GL_POINTS: usize = 10;
const MAX_DEPTH: u32 = 40;
const MAX_CORNER_LEVELS: u32 = 64;

fn patch_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PATCH_GL_POINTS))
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    lo: Point2,
    hi: Point2,
}

impl Rect {
    fn diag(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    fn mid(&self) -> Point2 {
        (self.lo + self.hi) * 0.5
    }

    fn quadrants(&self) -> [Rect; 4] {
        let m = self.mid();
        [
            Rect { lo: self.lo, hi: m },
            Rect { lo: Point2::new(m.x1, self.lo.x2), hi: Point2::new(self.hi.x1, m.x2) },
            Rect { lo: Point2::new(self.lo.x1, m.x2), hi: Point2::new(m.x1, self.hi.x2) },
            Rect { lo: m, hi: self.hi },
        ]
    }

    fn contains(&self, p: Point2) -> bool {
        p.x1 >= self.lo.x1 && p.x1 <= self.hi.x1 && p.x2 >= self.lo.x2 && p.x2 <= self.hi.x2
    }

    fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(p.x1.clamp(self.lo.x1, self.hi.x1), p.x2.clamp(self.lo.x2, self.hi.x2))
    }
}

/// Tensor-product Gauss-Legendre estimate of `∫_rect K(x - y) dy`.
fn gl_rect(x: Point2, r: &Rect) -> Vel2 {
    let rule = patch_rule();
    let c = r.mid();
    let h1 = 0.5 * (r.hi.x1 - r.lo.x1);
    let h2 = 0.5 * (r.hi.x2 - r.lo.x2);
    let (mut s1, mut s2) = (0.0, 0.0);
    for (t1, w1) in rule.nodes.iter().zip(&rule.weights) {
        for (t2, w2) in rule.nodes.iter().zip(&rule.weights) {
            let y = Point2::new(c.x1 + h1 * t1, c.x2 + h2 * t2);
            let k = biot_savart_unchecked(x - y);
            s1 += w1 * w2 * k.u1;
            s2 += w1 * w2 * k.u2;
        }
    }
    Vel2::new(s1 * h1 * h2, s2 * h1 * h2)
}

fn adaptive_rect(x: Point2, r: &Rect, tol: f64, depth: u32) -> Result<Vel2> {
    let coarse = gl_rect(x, r);
    let quads = r.quadrants();
    let fine = quads.iter().fold(Vel2::ZERO, |acc, q| acc + gl_rect(x, q));
    if coarse.max_abs_diff(fine) <= tol {
        return Ok(fine);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!(
            "subdivision depth {MAX_DEPTH} reached at x = ({}, {})",
            x.x1, x.x2
        )));
    }
    let mut acc = Vel2::ZERO;
    for q in &quads {
        acc = acc + adaptive_rect(x, q, 0.25 * tol, depth + 1)?;
    }
    Ok(acc)
}

/// Integrates over a rectangle whose closest point to `x` is one of its
/// corners, grading dyadically toward that corner.
fn graded_rect(x: Point2, rect: Rect, tol: f64) -> Result<Vel2> {
    let corner = rect.clamp(x);
    let dist = x.dist(corner);
    let tail_tol = 0.5 * tol;
    let piece_tol = 0.5 * tol / (3.0 * MAX_CORNER_LEVELS as f64);
    let mut acc = Vel2::ZERO;
    let mut current = rect;
    for _ in 0..MAX_CORNER_LEVELS {
        let diag = current.diag();
        if diag <= 0.5 * dist {
            return Ok(acc + adaptive_rect(x, &current, tail_tol, 0)?);
        }
        // |∫_R K(x - y) dy| <= (1/2π) ∫_R |corner - y|^{-1} dy <= diag / 4.
        if 0.25 * diag <= tail_tol {
            return Ok(acc);
        }
        let mut next = None;
        for q in current.quadrants() {
            if next.is_none() && q.contains(corner) {
                next = Some(q);
            } else {
                acc = acc + adaptive_rect(x, &q, piece_tol, 0)?;
            }
        }
        current = next.expect("corner lies in one quadrant");
    }
    Err(Error::Quadrature(format!(
        "corner grading exhausted at x = ({}, {})",
        x.x1, x.x2
    )))
}

/// Adaptive cubature of `∫_{[0,1]^2} K(x - y) dy` to absolute tolerance `tol`
/// per component.
pub fn patch_velocity_quadrature(x: Point2, tol: f64) -> Result<Vel2> {
    let mut cuts1 = vec![0.0];
    if x.x1 > 0.0 && x.x1 < 1.0 {
        cuts1.push(x.x1);
    }
    cuts1.push(1.0);
    let mut cuts2 = vec![0.0];
    if x.x2 > 0.0 && x.x2 < 1.0 {
        cuts2.push(x.x2);
    }
    cuts2.push(1.0);
    let pieces = ((cuts1.len() - 1) * (cuts2.len() - 1)) as f64;
    let mut acc = Vel2::ZERO;
    for i in 0..cuts1.len() - 1 {
        for j in 0..cuts2.len() - 1 {
            let rect = Rect {
                lo: Point2::new(cuts1[i], cuts2[j]),
                hi: Point2::new(cuts1[i + 1], cuts2[j + 1]),
            };
            acc = acc + graded_rect(x, rect, tol / pieces)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(6);
        for p in 0..12 {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum();
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {p}: {got} vs {want}");
        }
    }

    #[test]
    fn discrete_rule_matches_direct_sums() {
        for &len in &[9u64, 16, 37, 1000, 1 << 20] {
            let r = discrete_gauss(8, len);
            for p in 0..16 {
                let scale = len as f64;
                let got: f64 =
                    r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (x / scale).powi(p)).sum();
                let want: f64 = if len <= 4096 {
                    (0..len).map(|j| (j as f64 / scale).powi(p)).sum()
                } else {
                    // Faulhaber leading terms suffice at this size.
                    scale / (p as f64 + 1.0) - if p == 0 { 0.0 } else { 0.5 }
                        + if p >= 1 { p as f64 / (12.0 * scale) } else { 0.0 }
                };
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "len {len} degree {p}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn short_discrete_rule_is_the_point_set() {
        let r = discrete_gauss(8, 5);
        assert_eq!(r.nodes, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.weights, vec![1.0; 5]);
    }

    #[test]
    fn quadrature_vanishes_at_center() {
        let v = patch_velocity_quadrature(Point2::new(0.5, 0.5), 1e-12).unwrap();
        assert!(v.norm() < 1e-12, "{v:?}");
    }
}
