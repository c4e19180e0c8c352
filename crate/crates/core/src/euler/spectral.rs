//! Two-dimensional FFTs on an `N x N` periodic grid.
//!
//! Arrays are row-major with `x1` varying fastest: entry `j2 * N + j1` holds
//! the value at grid node `(j1 h, j2 h)`. Spectral arrays use the same layout
//! with signed mode numbers `m = j` for `j <= N/2` and `m = j - N` otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Grid2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Grid2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { n, forward, inverse, scratch: vec![Complex64::default(); len * n] }
    }

    fn transpose(&self, a: &mut [Complex64]) {
        let n = self.n;
        for r in 0..n {
            for c in r + 1..n {
                a.swap(r * n + c, c * n + r);
            }
        }
    }

    fn both_axes(&mut self, a: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        let fft = Arc::clone(fft);
        fft.process_with_scratch(a, &mut self.scratch);
        self.transpose(a);
        fft.process_with_scratch(a, &mut self.scratch);
        self.transpose(a);
    }

    /// Grid values to coefficients `c_m` with `f(x_j) = Σ_m c_m e^{i k_m · x_j}`.
    pub fn forward(&mut self, a: &mut [Complex64]) {
        self.both_axes(a, false);
        let s = 1.0 / (self.n * self.n) as f64;
        for v in a.iter_mut() {
            *v *= s;
        }
    }

    /// Coefficients to grid values.
    pub fn inverse(&mut self, a: &mut [Complex64]) {
        self.both_axes(a, true);
    }

    /// Real parts of the grid values of `coeffs`.
    pub fn to_real(&mut self, coeffs: &[Complex64], work: &mut Vec<Complex64>) -> Vec<f64> {
        work.clear();
        work.extend_from_slice(coeffs);
        self.inverse(work);
        work.iter().map(|z| z.re).collect()
    }
}

/// Signed mode number of index `j` on a grid of size `n`.
pub(crate) fn mode(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Wavenumber `2π m / L` of index `j`.
pub(crate) fn wavenumber(j: usize, n: usize, l: f64) -> f64 {
    2.0 * PI * mode(j, n) as f64 / l
}

/// Whether index `j` survives the 2/3 rule.
pub(crate) fn kept(j: usize, n: usize) -> bool {
    3 * mode(j, n).unsigned_abs() < n as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_single_mode() {
        let n = 16;
        let mut g = Grid2::new(n);
        let mut a: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), 0.0))
            .collect();
        let orig = a.clone();
        g.forward(&mut a);
        g.inverse(&mut a);
        for (x, y) in a.iter().zip(&orig) {
            assert!((x - y).norm() < 1e-13);
        }
        // cos(2π x1 / L) has coefficients 1/2 at m1 = ±1.
        let mut b: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((2.0 * PI * (i % n) as f64 / n as f64).cos(), 0.0))
            .collect();
        g.forward(&mut b);
        assert!((b[1].re - 0.5).abs() < 1e-14);
        assert!((b[n - 1].re - 0.5).abs() < 1e-14);
        assert!(b[n].norm() < 1e-14);
    }

    #[test]
    fn mode_numbers() {
        assert_eq!(mode(0, 8), 0);
        assert_eq!(mode(4, 8), 4);
        assert_eq!(mode(5, 8), -3);
        assert!(kept(2, 8) && !kept(3, 8) && kept(6, 8) && !kept(5, 8));
    }
}
