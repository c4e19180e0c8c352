//! The renormalized random velocity `u0(x) = Σ a_n (v(x+n) - v(n))`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geom::{KahanSum, Point2, Vel2};
use crate::kernel::{patch_velocity, PatchVelocityEvaluator, LOG_LIPSCHITZ_CONSTANT};
use crate::lattice_sum::{disk_rows, LatticeRange};
use crate::weights::{WeightLattice, WeightSource};

/// Constant in front of the tail majorant: the square of the fitted
/// log-Lipschitz constant, since the series bounds squared increments.
pub const TAIL_CONSTANT: f64 = LOG_LIPSCHITZ_CONSTANT * LOG_LIPSCHITZ_CONSTANT;

pub const DEFAULT_TAIL_TOL: f64 = 1e-6;

const TAIL_BAND: i64 = 32;
const MAX_AUTO_RADIUS: u32 = 1 << 24;

/// Truncation of the lattice sum to `|n| <= radius_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub radius_m: u32,
    pub tail_tol: f64,
}

impl TruncationSpec {
    /// A fixed radius; `tail_tol` is recorded only.
    pub fn fixed(radius_m: u32) -> Result<Self> {
        if radius_m < 3 {
            return Err(Error::Config(format!("truncation radius {radius_m} < 3")));
        }
        Ok(Self { radius_m, tail_tol: DEFAULT_TAIL_TOL })
    }

    /// Smallest power of two `M` with `truncation_tail_bound(M, r) <= tail_tol`.
    pub fn auto(r: f64, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0) || !r.is_finite() {
            return Err(Error::Config(format!("bad auto truncation (r = {r}, tol = {tail_tol})")));
        }
        let r = r.max(1.0);
        let mut m: u32 = 4;
        while (m as f64) <= r {
            m *= 2;
        }
        loop {
            if truncation_tail_bound(m, r)? <= tail_tol {
                return Ok(Self { radius_m: m, tail_tol });
            }
            if m >= MAX_AUTO_RADIUS {
                return Err(Error::Config(format!(
                    "no truncation radius up to {MAX_AUTO_RADIUS} meets tail tolerance {tail_tol} at R = {r}"
                )));
            }
            m *= 2;
        }
    }

    /// Auto truncation for evaluating at `x`, using `R = |x| + 1`.
    pub fn auto_for(x: Point2, tail_tol: f64) -> Result<Self> {
        Self::auto(x.norm() + 1.0, tail_tol)
    }

    pub fn range(&self) -> LatticeRange {
        LatticeRange::Disk(self.radius_m)
    }
}

impl From<TruncationSpec> for LatticeRange {
    fn from(t: TruncationSpec) -> Self {
        t.range()
    }
}

// Σ_{k>=2} (-1)^k c_k q^k / q^2 for the two partial-fraction remainders below,
// switching to the closed forms once cancellation is harmless.
fn h_over_q2(q: f64) -> f64 {
    if q > 0.5 {
        (1.0 + 1.0 / (1.0 + q) - 2.0 * q.ln_1p() / q) / (q * q)
    } else {
        let mut s = 0.0;
        let mut p = 1.0;
        for k in 2..80 {
            s += p * (k as f64 - 1.0) / (k as f64 + 1.0);
            p *= -q;
        }
        s
    }
}

fn k_over_q2(q: f64) -> f64 {
    if q > 0.5 {
        (q.ln_1p() - q / (1.0 + q)) / (q * q)
    } else {
        let mut s = 0.0;
        let mut p = 1.0;
        for k in 2..80 {
            s += p * (k as f64 - 1.0) / k as f64;
            p *= -q;
        }
        s
    }
}

/// `Σ_{|n| >= M} C R^4 / ((1 + |n| - R)^2 (1 + |n|)^2)` with `C = TAIL_CONSTANT`.
///
/// Terms with `M <= |n| < M + 32` are summed directly; the rest is bounded by
/// comparison with the radial integral, so the result is an upper bound.
pub fn truncation_tail_bound(m: u32, r: f64) -> Result<f64> {
    if m < 3 || !(r >= 1.0) || (m as f64) <= r {
        return domain(format!("tail bound needs M > R >= 1 and M >= 3 (M = {m}, R = {r})"));
    }
    let term = |rho: f64| 1.0 / ((1.0 + rho - r).powi(2) * (1.0 + rho).powi(2));
    let m = m as i64;
    let p = m + TAIL_BAND;
    let (m2, p2) = (m * m, p * p);
    let mut acc = KahanSum::new();
    for n2 in -(p - 1)..p {
        let rest_hi = p2 - 1 - n2 * n2;
        let hi = (rest_hi as u64).isqrt() as i64;
        let rest_lo = m2 - n2 * n2;
        let lo = if rest_lo <= 0 { 0 } else { ((rest_lo - 1) as u64).isqrt() as i64 + 1 };
        for n1 in lo..=hi {
            let t = term(((n1 * n1 + n2 * n2) as f64).sqrt());
            acc.add(if n1 == 0 { t } else { 2.0 * t });
        }
    }
    // Every cell n + [-1/2, 1/2]^2 with |n| >= P lies in |y| >= P - s, and the
    // summand is at most term(|y| - s) on it (s = √2/2). Substituting
    // t = |y| - s gives 2π ∫_T^∞ term(t) (t + s) dt with T = P - 2s.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = 1.0 - r;
    let d = r;
    let big_t = p as f64 - 2.0 * s;
    let ta = big_t + a;
    let q = d / ta;
    let i0 = h_over_q2(q) / (ta * ta * ta);
    let j = k_over_q2(q) / (ta * ta);
    let i1 = j - a * i0;
    let remainder = 2.0 * std::f64::consts::PI * (i1 + s * i0);
    Ok(TAIL_CONSTANT * r.powi(4) * (acc.value() + remainder))
}

#[derive(Debug, Clone, Copy)]
struct RowSpan {
    n2: i64,
    n1_start: i64,
    offset: usize,
    len: usize,
}

/// Precomputed coefficients `c_n` of a linear functional `Σ_{|n|<=M} a_n c_n`
/// of the weights, stored row by row.
#[derive(Debug, Clone)]
pub struct SumPlan {
    radius_m: u32,
    rows: Vec<RowSpan>,
    c1: Vec<f64>,
    c2: Vec<f64>,
}

impl SumPlan {
    fn build(radius_m: u32, coef: impl Fn(Point2) -> Result<Vel2>) -> Result<Self> {
        let mut rows = Vec::with_capacity(2 * radius_m as usize + 1);
        let mut c1 = Vec::new();
        let mut c2 = Vec::new();
        for (n2, w) in disk_rows(radius_m) {
            rows.push(RowSpan { n2, n1_start: -w, offset: c1.len(), len: (2 * w + 1) as usize });
            for n1 in -w..=w {
                let c = coef(Point2::lattice(n1, n2))?;
                c1.push(c.u1);
                c2.push(c.u2);
            }
        }
        Ok(Self { radius_m, rows, c1, c2 })
    }

    /// Coefficients of `u0(x)`: `v(x+n) - v(n)`.
    pub fn velocity(x: Point2, radius_m: u32, eval: &PatchVelocityEvaluator) -> Result<Self> {
        if !x.is_finite() {
            return domain("non-finite evaluation point");
        }
        Self::build(radius_m, |n| Ok(patch_velocity(x + n, eval)? - patch_velocity(n, eval)?))
    }

    /// Coefficients of `u0(x) - u0(y)`: `v(x+n) - v(y+n)`.
    pub fn increment(
        x: Point2,
        y: Point2,
        radius_m: u32,
        eval: &PatchVelocityEvaluator,
    ) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return domain("non-finite evaluation point");
        }
        Self::build(radius_m, |n| Ok(patch_velocity(x + n, eval)? - patch_velocity(y + n, eval)?))
    }

    /// Coefficients of the anchor `Σ a_n v(n)`.
    pub fn anchor(radius_m: u32, eval: &PatchVelocityEvaluator) -> Result<Self> {
        Self::build(radius_m, |n| patch_velocity(n, eval))
    }

    pub fn radius(&self) -> u32 {
        self.radius_m
    }

    pub fn len(&self) -> usize {
        self.c1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }

    /// `Σ c_n a_n` for each weight source. Rows are summed in order of
    /// increasing `n2` and combined with compensated summation; within a row
    /// four interleaved partial sums are used. The result for a source does not
    /// depend on which other sources are evaluated alongside it.
    pub fn contract_many<W: WeightSource + ?Sized>(&self, sources: &[&W]) -> Vec<Vel2> {
        let width = self.rows.iter().map(|r| r.len).max().unwrap_or(0);
        let mut buf = vec![0.0; width];
        let mut acc = vec![(KahanSum::new(), KahanSum::new()); sources.len()];
        for row in &self.rows {
            let c1 = &self.c1[row.offset..row.offset + row.len];
            let c2 = &self.c2[row.offset..row.offset + row.len];
            for (src, (s1, s2)) in sources.iter().zip(acc.iter_mut()) {
                let a = &mut buf[..row.len];
                src.fill_row(row.n2, row.n1_start, a);
                let (r1, r2) = row_dot(a, c1, c2);
                s1.add(r1);
                s2.add(r2);
            }
        }
        acc.iter().map(|(s1, s2)| Vel2::new(s1.value(), s2.value())).collect()
    }

    pub fn contract<W: WeightSource + ?Sized>(&self, source: &W) -> Vel2 {
        self.contract_many(&[source])[0]
    }
}

fn row_dot(a: &[f64], c1: &[f64], c2: &[f64]) -> (f64, f64) {
    let mut l1 = [0.0f64; 4];
    let mut l2 = [0.0f64; 4];
    let ac = a.chunks_exact(4);
    let (ra, r1, r2) = (ac.remainder(), c1.chunks_exact(4).remainder(), c2.chunks_exact(4).remainder());
    for ((a4, p4), q4) in ac.zip(c1.chunks_exact(4)).zip(c2.chunks_exact(4)) {
        for j in 0..4 {
            l1[j] += a4[j] * p4[j];
            l2[j] += a4[j] * q4[j];
        }
    }
    for ((a, p), q) in ra.iter().zip(r1).zip(r2) {
        l1[0] += a * p;
        l2[0] += a * q;
    }
    ((l1[0] + l1[1]) + (l1[2] + l1[3]), (l2[0] + l2[1]) + (l2[2] + l2[3]))
}

/// `Σ_{|n| <= M} a_n (v(x+n) - v(n))` for an arbitrary weight source.
pub fn velocity_u0_with<W: WeightSource + ?Sized>(
    source: &W,
    x: Point2,
    trunc: &TruncationSpec,
    eval: &PatchVelocityEvaluator,
) -> Result<Vel2> {
    Ok(SumPlan::velocity(x, trunc.radius_m, eval)?.contract(source))
}

/// `u0(x)` truncated to `|n| <= trunc.radius_m`.
pub fn velocity_u0(
    lattice: &WeightLattice,
    x: Point2,
    trunc: &TruncationSpec,
    eval: &PatchVelocityEvaluator,
) -> Result<Vel2> {
    velocity_u0_with(lattice, x, trunc, eval)
}

/// `u0^ε(x) = ε u0(x / ε)`.
pub fn scaled_velocity(
    lattice: &WeightLattice,
    x: Point2,
    eps: f64,
    trunc: &TruncationSpec,
    eval: &PatchVelocityEvaluator,
) -> Result<Vel2> {
    if !(eps > 0.0) || !eps.is_finite() {
        return domain(format!("scale factor must be positive (got {eps})"));
    }
    let x_eps = Point2::new(x.x1 / eps, x.x2 / eps);
    Ok(velocity_u0(lattice, x_eps, trunc, eval)? * eps)
}
