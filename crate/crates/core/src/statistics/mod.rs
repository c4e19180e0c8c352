//! Exact moments, Monte Carlo ensembles, Morrey norms and the parameter
//! studies built from them.

pub mod ensemble;
pub mod exact;
pub mod mc;
pub mod morrey;
pub mod studies;

pub use ensemble::{estimate, pairwise_reduce, Accumulator, EnsembleEstimate};
pub use exact::{exact_covariance, exact_increment_moment, exact_second_moment, s_sum};
pub use mc::{mc_moment, mc_samples, McSpec};
pub use morrey::{geometric_radii, morrey_norm, MorreyEstimate, SampledField, U0GridSampler};
