//! RK4 pseudo-spectral integration of `∂t ω + u · ∇ω = 0` on the torus.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::{kept, wavenumber, Grid2};
use super::state::{diagnostics_from_grids, velocity_hat, Diagnostics, TorusState, VelocityGrid};
use crate::error::{Error, Result};

/// Default Courant number.
pub const DEFAULT_CFL: f64 = 0.5;

/// Settings for [`Solver::evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    /// Final time, measured from the state's current time.
    pub t_final: f64,
    pub cfl: f64,
    /// Number of equal intervals between stored snapshots; 0 stores none.
    pub snapshots: usize,
}

impl EvolveConfig {
    pub fn new(t_final: f64) -> Self {
        Self { t_final, cfl: DEFAULT_CFL, snapshots: 0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!("final time must be >= 0 (got {})", self.t_final)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 2.0) {
            return Err(Error::Config(format!("CFL number must lie in (0, 2] (got {})", self.cfl)));
        }
        Ok(())
    }
}

/// Output of [`Solver::evolve`]: the final state, diagnostics after every
/// step (the first record is the initial state) and snapshots at the
/// requested equally spaced times, including both ends.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: TorusState,
    pub diagnostics: Vec<Diagnostics>,
    pub snapshots: Vec<TorusState>,
    pub steps: usize,
}

/// Work space for one grid size and box side. A solver is not shared between
/// simulations.
pub struct Solver {
    l: f64,
    n: usize,
    grid: Grid2,
    k1: Vec<f64>,
    mask: Vec<bool>,
    bufs: [Vec<Complex64>; 4],
}

impl Solver {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        super::state::validate_grid(l, n)?;
        let k1 = (0..n).map(|j| wavenumber(j, n, l)).collect();
        let mut mask = vec![false; n * n];
        for j2 in 0..n {
            for j1 in 0..n {
                mask[j2 * n + j1] = kept(j1, n) && kept(j2, n) && (j1, j2) != (0, 0);
            }
        }
        let z = vec![Complex64::default(); n * n];
        Ok(Self { l, n, grid: Grid2::new(n), k1, mask, bufs: [z.clone(), z.clone(), z.clone(), z] })
    }

    pub fn for_state(state: &TorusState) -> Result<Self> {
        Self::new(state.l, state.n)
    }

    fn check(&self, state: &TorusState) -> Result<()> {
        if state.l != self.l || state.n != self.n || state.omega_hat.len() != self.n * self.n {
            return Err(Error::Config(format!(
                "state (L = {}, N = {}) does not match solver (L = {}, N = {})",
                state.l, state.n, self.l, self.n
            )));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    fn grids(&mut self, w: &[Complex64]) -> VelocityGrid {
        let (u1, u2) = velocity_hat(self.l, self.n, w);
        let mut work = std::mem::take(&mut self.bufs[0]);
        let g = VelocityGrid {
            n: self.n,
            l: self.l,
            u1: self.grid.to_real(&u1, &mut work),
            u2: self.grid.to_real(&u2, &mut work),
        };
        self.bufs[0] = work;
        g
    }

    /// Largest grid speed.
    pub fn max_speed(&mut self, state: &TorusState) -> f64 {
        let u = self.grids(&state.omega_hat);
        u.u1.iter().zip(&u.u2).fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Largest step allowed by `cfl` for this state.
    pub fn dt_limit(&mut self, state: &TorusState, cfl: f64) -> f64 {
        let s = self.max_speed(state);
        if s > 0.0 {
            cfl * self.h() / s
        } else {
            f64::INFINITY
        }
    }

    pub fn diagnostics(&mut self, state: &TorusState) -> Diagnostics {
        let mut work = std::mem::take(&mut self.bufs[0]);
        let w = self.grid.to_real(&state.omega_hat, &mut work);
        self.bufs[0] = work;
        let u = self.grids(&state.omega_hat);
        diagnostics_from_grids(state, &w, &u)
    }

    /// Dealiased `-(u · ∇ω)^` into `out`.
    fn rhs(&mut self, w: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let u = self.grids(w);
        let [dx, dy, _, _] = &mut self.bufs;
        let i = Complex64::i();
        for j2 in 0..n {
            let k2 = self.k1[j2];
            for j1 in 0..n {
                let idx = j2 * n + j1;
                dx[idx] = i * self.k1[j1] * w[idx];
                dy[idx] = i * k2 * w[idx];
            }
        }
        self.grid.inverse(dx);
        self.grid.inverse(dy);
        for idx in 0..n * n {
            out[idx] = Complex64::new(-(u.u1[idx] * dx[idx].re + u.u2[idx] * dy[idx].re), 0.0);
        }
        self.grid.forward(out);
        for (v, &keep) in out.iter_mut().zip(&self.mask) {
            if !keep {
                *v = Complex64::default();
            }
        }
    }

    /// One classical RK4 step of size `dt`, refused if `dt` exceeds the CFL
    /// limit for `cfl`.
    pub fn step(&mut self, state: &mut TorusState, dt: f64, cfl: f64) -> Result<()> {
        self.check(state)?;
        let limit = self.dt_limit(state, cfl);
        if !(dt > 0.0) || dt > limit {
            return Err(Error::Cfl { dt, limit });
        }
        self.rk4(state, dt);
        if !state.is_finite() {
            let d = self.diagnostics(state);
            return Err(Error::NonFinite { t: state.t, detail: format!("after step dt = {dt}: {d:?}") });
        }
        Ok(())
    }

    fn rk4(&mut self, state: &mut TorusState, dt: f64) {
        let len = self.n * self.n;
        let w0 = state.omega_hat.clone();
        let mut acc = vec![Complex64::default(); len];
        let mut k = vec![Complex64::default(); len];
        let mut stage = w0.clone();
        let weights = [1.0, 2.0, 2.0, 1.0];
        let offsets = [0.5, 0.5, 1.0];
        for s in 0..4 {
            self.rhs(&stage, &mut k);
            for idx in 0..len {
                acc[idx] += weights[s] * k[idx];
            }
            if s < 3 {
                for idx in 0..len {
                    stage[idx] = w0[idx] + offsets[s] * dt * k[idx];
                }
            }
        }
        for idx in 0..len {
            state.omega_hat[idx] = w0[idx] + (dt / 6.0) * acc[idx];
        }
        state.t += dt;
    }

    /// Integrate to `state.t + cfg.t_final`, recording diagnostics after
    /// every step. Steps are uniform within each snapshot interval and sized
    /// from the CFL limit at the start of the step.
    pub fn evolve(&mut self, state: &TorusState, cfg: &EvolveConfig) -> Result<Evolution> {
        cfg.validate()?;
        self.check(state)?;
        let mut s = state.clone();
        let t0 = s.t;
        let intervals = cfg.snapshots.max(1);
        let mut diagnostics = vec![self.diagnostics(&s)];
        let mut snapshots = Vec::new();
        if cfg.snapshots > 0 {
            snapshots.push(s.clone());
        }
        let mut steps = 0;
        for k in 1..=intervals {
            let stop = t0 + cfg.t_final * k as f64 / intervals as f64;
            while s.t < stop {
                let remaining = stop - s.t;
                let limit = self.dt_limit(&s, cfg.cfl);
                let count = (remaining / limit).ceil().max(1.0);
                let dt = remaining / count;
                if count == 1.0 {
                    self.step(&mut s, dt, cfg.cfl)?;
                    s.t = stop;
                } else {
                    self.step(&mut s, dt, cfg.cfl)?;
                }
                steps += 1;
                diagnostics.push(self.diagnostics(&s));
            }
            if cfg.snapshots > 0 {
                snapshots.push(s.clone());
            }
        }
        Ok(Evolution { state: s, diagnostics, snapshots, steps })
    }
}

/// Relative `L^2` distance `|a - b| / |b|` between two states' vorticities,
/// by Parseval.
pub fn relative_l2(a: &TorusState, b: &TorusState) -> f64 {
    let num: f64 = a.omega_hat.iter().zip(&b.omega_hat).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.omega_hat.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
