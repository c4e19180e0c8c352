//! Local Morrey norms `sup_{R>=1} R^{-(α+1)} ||f||_{L²(B_R)}` of sampled fields,
//! and FFT sampling of `u0` on a unit grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::field::SumPlan;
use crate::geom::{Point2, Vel2};
use crate::kernel::{patch_velocity, PatchVelocityEvaluator};
use crate::lattice_sum::disk_rows;
use crate::weights::WeightSource;

/// A velocity field sampled at the centres of a `2 half × 2 half` grid of
/// cells of side `h`, centred on the origin.
#[derive(Debug, Clone)]
pub struct SampledField {
    h: f64,
    half: usize,
    scale: f64,
    values: Arc<Vec<Vel2>>,
}

impl SampledField {
    /// `values[j * 2 half + i]` is the value at cell `(i, j)`.
    pub fn new(h: f64, half: usize, values: Vec<Vel2>) -> Result<Self> {
        if !(h > 0.0) || values.len() != 4 * half * half {
            return domain("sampled field needs h > 0 and (2 half)^2 values");
        }
        Ok(Self { h, half, scale: 1.0, values: Arc::new(values) })
    }

    pub fn from_fn(h: f64, half: usize, f: impl Fn(Point2) -> Vel2) -> Result<Self> {
        let side = 2 * half;
        let mut values = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                values.push(f(Self::center_of(h, half, i, j)));
            }
        }
        Self::new(h, half, values)
    }

    fn center_of(h: f64, half: usize, i: usize, j: usize) -> Point2 {
        Point2::new(
            (i as f64 - half as f64 + 0.5) * h,
            (j as f64 - half as f64 + 0.5) * h,
        )
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_cells(&self) -> usize {
        self.half
    }

    /// Radius of the largest centred ball covered by the grid.
    pub fn radius(&self) -> f64 {
        self.half as f64 * self.h
    }

    pub fn center(&self, i: usize, j: usize) -> Point2 {
        Self::center_of(self.h, self.half, i, j)
    }

    pub fn value(&self, i: usize, j: usize) -> Vel2 {
        self.values[j * 2 * self.half + i] * self.scale
    }

    /// The field `ε f(x / ε)`, sharing storage with `self`.
    pub fn scaled(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return domain(format!("scale factor must be positive (got {eps})"));
        }
        Ok(Self { h: self.h * eps, half: self.half, scale: self.scale * eps, values: self.values.clone() })
    }
}

/// Result of a discretized Morrey norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyEstimate {
    pub alpha: f64,
    pub r_values: Vec<f64>,
    /// `||f||_{L²(B_R)}` at each radius.
    pub profile: Vec<f64>,
    pub norm_value: f64,
    pub argmax_r: f64,
    pub grid_h: f64,
}

/// `{1, √2, 2, ..., r_max}`.
pub fn geometric_radii(r_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0i32;
    loop {
        let r = if k % 2 == 0 {
            2f64.powi(k / 2)
        } else {
            std::f64::consts::SQRT_2 * 2f64.powi((k - 1) / 2)
        };
        if r > r_max * (1.0 + 1e-12) {
            break;
        }
        out.push(r);
        k += 1;
    }
    if out.last().is_some_and(|&r| r < r_max * (1.0 - 1e-12)) {
        out.push(r_max);
    }
    out
}

/// Midpoint-rule Morrey norm: a cell belongs to `B_R` when its centre does.
pub fn morrey_norm(field: &SampledField, alpha: f64, r_values: &[f64]) -> Result<MorreyEstimate> {
    if r_values.is_empty() {
        return domain("empty radius list");
    }
    if !(alpha >= 0.0) {
        return domain(format!("alpha must be >= 0 (got {alpha})"));
    }
    if r_values[0] < 1.0 || r_values.windows(2).any(|w| w[1] <= w[0]) {
        return domain("radii must be ascending and >= 1");
    }
    let r_last = *r_values.last().expect("non-empty");
    if r_last > field.radius() * (1.0 + 1e-12) {
        return domain(format!("radius {r_last} exceeds sampled region {}", field.radius()));
    }
    let r2: Vec<f64> = r_values.iter().map(|r| r * r).collect();
    let r2_last = r_last * r_last;
    let mut bins = vec![0.0f64; r_values.len()];
    let side = 2 * field.half;
    for j in 0..side {
        let row = &field.values[j * side..(j + 1) * side];
        let y = field.center(0, j).x2;
        let y2 = y * y;
        if y2 > r2_last {
            continue;
        }
        for (i, v) in row.iter().enumerate() {
            let x = field.center(i, j).x1;
            let d2 = x * x + y2;
            if d2 > r2_last {
                continue;
            }
            let k = r2.partition_point(|&q| q < d2);
            bins[k] += v.norm_sq();
        }
    }
    let cell = field.h * field.h * field.scale * field.scale;
    let mut cum = 0.0;
    let mut profile = Vec::with_capacity(bins.len());
    for b in &bins {
        cum += b;
        profile.push((cum * cell).sqrt());
    }
    let mut norm_value = f64::NEG_INFINITY;
    let mut argmax_r = r_values[0];
    for (r, p) in r_values.iter().zip(&profile) {
        let val = r.powf(-(alpha + 1.0)) * p;
        if val > norm_value {
            norm_value = val;
            argmax_r = *r;
        }
    }
    Ok(MorreyEstimate {
        alpha,
        r_values: r_values.to_vec(),
        profile,
        norm_value,
        argmax_r,
        grid_h: field.h,
    })
}

fn transpose(a: &mut [Complex64], p: usize) {
    const B: usize = 32;
    for bi in (0..p).step_by(B) {
        for bj in (bi..p).step_by(B) {
            for i in bi..(bi + B).min(p) {
                let j0 = if bi == bj { i + 1 } else { bj };
                for j in j0..(bj + B).min(p) {
                    a.swap(i * p + j, j * p + i);
                }
            }
        }
    }
}

/// Samples `u0` truncated to `|n| <= M` at the cell centres `m + (1/2, 1/2)`,
/// `m ∈ [-half, half)^2`, by FFT convolution of the weights with the sampled
/// patch velocity.
pub struct U0GridSampler {
    radius_m: u32,
    half: usize,
    p: usize,
    g_hat: Vec<Complex64>,
    anchor: SumPlan,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for U0GridSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("U0GridSampler")
            .field("radius_m", &self.radius_m)
            .field("half", &self.half)
            .field("fft_size", &self.p)
            .finish()
    }
}

impl U0GridSampler {
    pub fn new(radius_m: u32, half: usize, eval: &PatchVelocityEvaluator) -> Result<Self> {
        if half == 0 || radius_m < 3 {
            return domain("grid sampler needs half >= 1 and M >= 3");
        }
        let m = radius_m as i64;
        let h = half as i64;
        let p = ((2 * h + 2 * m).max(2) as usize).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(p);
        let inv = planner.plan_fft_inverse(p);
        let mut g = vec![Complex64::new(0.0, 0.0); p * p];
        let idx = |k: i64| k.rem_euclid(p as i64) as usize;
        for k2 in (-h - m)..(h + m) {
            for k1 in (-h - m)..(h + m) {
                let v = patch_velocity(Point2::new(k1 as f64 + 0.5, k2 as f64 + 0.5), eval)?;
                g[idx(k2) * p + idx(k1)] = Complex64::new(v.u1, v.u2);
            }
        }
        let mut s = Self {
            radius_m,
            half,
            p,
            g_hat: Vec::new(),
            anchor: SumPlan::anchor(radius_m, eval)?,
            fwd,
            inv,
        };
        s.forward(&mut g);
        s.g_hat = g;
        Ok(s)
    }

    pub fn fft_size(&self) -> usize {
        self.p
    }

    pub fn radius_m(&self) -> u32 {
        self.radius_m
    }

    fn forward(&self, a: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()];
        self.fwd.process_with_scratch(a, &mut scratch);
        transpose(a, self.p);
        self.fwd.process_with_scratch(a, &mut scratch);
    }

    fn inverse(&self, a: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inv.get_inplace_scratch_len()];
        self.inv.process_with_scratch(a, &mut scratch);
        transpose(a, self.p);
        self.inv.process_with_scratch(a, &mut scratch);
    }

    pub fn sample<W: WeightSource + ?Sized>(&self, weights: &W) -> SampledField {
        let p = self.p;
        let idx = |k: i64| k.rem_euclid(p as i64) as usize;
        let mut a = vec![Complex64::new(0.0, 0.0); p * p];
        let mut row = vec![0.0; 2 * self.radius_m as usize + 1];
        for (n2, w) in disk_rows(self.radius_m) {
            let seg = &mut row[..(2 * w + 1) as usize];
            weights.fill_row(n2, -w, seg);
            let base = idx(-n2) * p;
            for (k, &val) in seg.iter().enumerate() {
                a[base + idx(w - k as i64)] = Complex64::new(val, 0.0);
            }
        }
        self.forward(&mut a);
        for (x, g) in a.iter_mut().zip(&self.g_hat) {
            *x *= g;
        }
        self.inverse(&mut a);
        let norm = 1.0 / (p as f64 * p as f64);
        let anchor = self.anchor.contract(weights);
        let side = 2 * self.half;
        let h = self.half as i64;
        let mut values = Vec::with_capacity(side * side);
        for j in 0..side as i64 {
            for i in 0..side as i64 {
                let c = a[idx(j - h) * p + idx(i - h)] * norm;
                values.push(Vel2::new(c.re - anchor.u1, c.im - anchor.u2));
            }
        }
        SampledField::new(1.0, self.half, values).expect("grid shape is consistent")
    }
}
