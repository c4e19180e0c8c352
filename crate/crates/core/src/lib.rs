//! Random non-decaying vortex fields on the plane.
//!
//! The initial vorticity is a lattice of unit-square vortex patches with
//! independent, bounded, mean-zero, unit-variance weights. Its velocity is the
//! renormalized Biot-Savart sum `u0(x) = Σ a_n (v(x+n) - v(n))`. The crate
//! provides the single-patch kernel, counter-based lattice weights, exact and
//! Monte Carlo moment computations, Morrey-norm estimation, and a periodic
//! pseudo-spectral Euler solver for evolution diagnostics.

pub mod error;
pub mod euler;
pub mod field;
pub mod geom;
pub mod kernel;
pub mod lattice_sum;
pub mod quadrature;
pub mod statistics;
pub mod weights;

pub use error::{Error, Result};
pub use geom::{KahanSum, Point2, Vel2};
