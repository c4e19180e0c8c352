//! Periodic 2D Euler evolution, exact strip shears, conservation diagnostics
//! and the weak-formulation residual.
//!
//! The plane problem is approximated on a torus `[0, L)^2` with mean-zero
//! vorticity; the pseudo-spectral scheme uses RK4 in time and the 2/3 rule.

pub mod shear;
pub mod snapshot;
pub mod solver;
mod spectral;
pub mod state;
pub mod weak;

pub use shear::shear_profile;
pub use snapshot::{write_snapshot, SnapshotMeta};
pub use solver::{relative_l2, EvolveConfig, Evolution, Solver, DEFAULT_CFL};
pub use state::{diagnostics, init_torus, velocity_from_vorticity, Diagnostics, TorusState, VelocityGrid};
pub use weak::{weak_residual, TestField, Trajectory};
