//! Spectral vorticity on the flat torus `[0, L)^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::{kept, wavenumber, Grid2};
use crate::error::{Error, Result};
use crate::geom::Point2;

/// Vorticity on the torus of side `l`, as `n x n` Fourier coefficients with
/// `ω(x) = Σ_m ω̂_m e^{i k_m · x}`.
///
/// The mean mode and every mode beyond the 2/3 cutoff are zero, and the
/// spectrum is Hermitian so `ω` is real.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusState {
    pub l: f64,
    pub n: usize,
    pub omega_hat: Vec<Complex64>,
    pub t: f64,
}

/// Velocity on the grid nodes `(j1 h, j2 h)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    pub n: usize,
    pub l: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

/// Grid-level summary of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub max_abs_omega: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub mean_omega: f64,
}

pub(crate) fn validate_grid(l: f64, n: usize) -> Result<()> {
    if !(l >= 8.0) || !l.is_finite() || l.fract() != 0.0 {
        return Err(Error::Config(format!("box side must be an integer >= 8 (got {l})")));
    }
    if n < 64 || !n.is_power_of_two() {
        return Err(Error::Config(format!("grid size must be a power of two >= 64 (got {n})")));
    }
    Ok(())
}

impl TorusState {
    pub fn zero(l: f64, n: usize) -> Result<Self> {
        validate_grid(l, n)?;
        Ok(Self { l, n, omega_hat: vec![Complex64::default(); n * n], t: 0.0 })
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Zero the mean mode, every mode beyond the 2/3 cutoff and the
    /// anti-Hermitian part of the spectrum.
    pub(crate) fn project(&mut self) {
        let n = self.n;
        let mut out = vec![Complex64::default(); n * n];
        for j2 in 0..n {
            for j1 in 0..n {
                if !(kept(j1, n) && kept(j2, n)) || (j1 == 0 && j2 == 0) {
                    continue;
                }
                let a = self.omega_hat[j2 * n + j1];
                let b = self.omega_hat[((n - j2) % n) * n + (n - j1) % n].conj();
                out[j2 * n + j1] = 0.5 * (a + b);
            }
        }
        self.omega_hat = out;
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.omega_hat.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Grid-node values of `ω`.
    pub fn omega_grid(&self) -> Vec<f64> {
        let mut g = Grid2::new(self.n);
        g.to_real(&self.omega_hat, &mut Vec::new())
    }

    /// Velocity coefficients `(û1, û2)` with `curl u = ω` and `div u = 0`.
    pub fn velocity_hat(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        velocity_hat(self.l, self.n, &self.omega_hat)
    }
}

pub(crate) fn velocity_hat(l: f64, n: usize, w: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut u1 = vec![Complex64::default(); n * n];
    let mut u2 = vec![Complex64::default(); n * n];
    let i = Complex64::i();
    for j2 in 0..n {
        let k2 = wavenumber(j2, n, l);
        for j1 in 0..n {
            let k1 = wavenumber(j1, n, l);
            let k_sq = k1 * k1 + k2 * k2;
            if k_sq == 0.0 {
                continue;
            }
            // Stream function ψ̂ = -ω̂/|k|^2 and u = (-∂2 ψ, ∂1 ψ).
            let c = w[j2 * n + j1] / k_sq;
            u1[j2 * n + j1] = i * k2 * c;
            u2[j2 * n + j1] = -i * k1 * c;
        }
    }
    (u1, u2)
}

/// Sample `sampler` at the cell centres of the `n x n` grid on `[0, l)^2`,
/// smooth with a Gaussian of standard deviation `width` (0 for none), remove
/// the mean and truncate to the 2/3 band.
pub fn init_torus(
    l: f64,
    n: usize,
    sampler: impl Fn(Point2) -> f64,
    width: f64,
) -> Result<TorusState> {
    validate_grid(l, n)?;
    if !(width >= 0.0) || !width.is_finite() {
        return Err(Error::Config(format!("mollification width must be >= 0 (got {width})")));
    }
    let h = l / n as f64;
    let mut a = Vec::with_capacity(n * n);
    for j2 in 0..n {
        for j1 in 0..n {
            let p = Point2::new((j1 as f64 + 0.5) * h, (j2 as f64 + 0.5) * h);
            let v = sampler(p);
            if !v.is_finite() {
                return Err(Error::Config(format!("vorticity sampler returned {v} at {p:?}")));
            }
            a.push(Complex64::new(v, 0.0));
        }
    }
    let mut g = Grid2::new(n);
    g.forward(&mut a);
    // Samples sit at (j + 1/2) h, so shift the phases back to the origin and
    // apply the Gaussian multiplier in the same pass.
    for j2 in 0..n {
        let k2 = wavenumber(j2, n, l);
        for j1 in 0..n {
            let k1 = wavenumber(j1, n, l);
            let phase = Complex64::from_polar(1.0, -0.5 * h * (k1 + k2));
            let damp = (-0.5 * width * width * (k1 * k1 + k2 * k2)).exp();
            a[j2 * n + j1] *= phase * damp;
        }
    }
    let mut s = TorusState { l, n, omega_hat: a, t: 0.0 };
    s.project();
    Ok(s)
}

/// Grid velocity of a state.
pub fn velocity_from_vorticity(state: &TorusState) -> VelocityGrid {
    let (u1, u2) = state.velocity_hat();
    let mut g = Grid2::new(state.n);
    let mut work = Vec::new();
    VelocityGrid {
        n: state.n,
        l: state.l,
        u1: g.to_real(&u1, &mut work),
        u2: g.to_real(&u2, &mut work),
    }
}

/// Grid max of `|ω|`, energy `½ Σ |u|^2 h^2`, enstrophy `½ Σ ω^2 h^2` and
/// mean vorticity (the zero mode).
pub fn diagnostics(state: &TorusState) -> Diagnostics {
    let w = state.omega_grid();
    let u = velocity_from_vorticity(state);
    diagnostics_from_grids(state, &w, &u)
}

pub(crate) fn diagnostics_from_grids(state: &TorusState, w: &[f64], u: &VelocityGrid) -> Diagnostics {
    let (t, h) = (state.t, state.h());
    let area = h * h;
    let max_abs_omega = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let enstrophy = 0.5 * area * w.iter().map(|v| v * v).sum::<f64>();
    let energy =
        0.5 * area * u.u1.iter().zip(&u.u2).map(|(a, b)| a * a + b * b).sum::<f64>();
    let mean_omega = state.omega_hat[0].re;
    Diagnostics { t, max_abs_omega, energy, enstrophy, mean_omega }
}
