//! Monte Carlo moments of `u0` over ensembles of weight lattices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{estimate, EnsembleEstimate};
use crate::error::{domain, Result};
use crate::field::{SumPlan, TruncationSpec};
use crate::geom::{Point2, Vel2};
use crate::kernel::PatchVelocityEvaluator;
use crate::weights::{Distribution, WeightLattice};

/// Seeds are `seed_base, seed_base + 1, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub n_samples: usize,
    pub seed_base: u64,
    pub distribution: Distribution,
}

impl McSpec {
    pub fn rademacher(n_samples: usize, seed_base: u64) -> Self {
        Self { n_samples, seed_base, distribution: Distribution::Rademacher }
    }
}

const BATCH: usize = 16;

/// Realizations of `u0(x)` (or `u0(x) - u0(y)`) for every seed of `spec`, in
/// seed order. Identical for any worker count.
pub fn mc_samples(
    x: Point2,
    y: Option<Point2>,
    spec: &McSpec,
    trunc: &TruncationSpec,
    eval: &PatchVelocityEvaluator,
) -> Result<Vec<Vel2>> {
    let plan = match y {
        Some(y) => SumPlan::increment(x, y, trunc.radius_m, eval)?,
        None => SumPlan::velocity(x, trunc.radius_m, eval)?,
    };
    let seeds: Vec<u64> = (0..spec.n_samples as u64).map(|k| spec.seed_base.wrapping_add(k)).collect();
    let out: Vec<Vec<Vel2>> = seeds
        .par_chunks(BATCH)
        .map(|chunk| {
            let lattices: Vec<WeightLattice> =
                chunk.iter().map(|&s| WeightLattice::new(s, spec.distribution)).collect();
            let refs: Vec<&WeightLattice> = lattices.iter().collect();
            plan.contract_many(&refs)
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Monte Carlo estimate of `E|u0(x) - u0(y)|^p`, or of `E|u0(x)|^p` when `y`
/// is absent.
pub fn mc_moment(
    x: Point2,
    y: Option<Point2>,
    p: f64,
    spec: &McSpec,
    trunc: &TruncationSpec,
    eval: &PatchVelocityEvaluator,
) -> Result<EnsembleEstimate> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("moment order must be >= 1 (got {p})"));
    }
    if spec.n_samples < 2 {
        return domain("at least two samples are needed");
    }
    let samples = mc_samples(x, y, spec, trunc, eval)?;
    let values: Vec<f64> = samples
        .iter()
        .map(|u| if p == 2.0 { u.norm_sq() } else { u.norm().powf(p) })
        .collect();
    Ok(estimate(&values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_has_zero_variance() {
        let t = TruncationSpec::fixed(16).unwrap();
        let e = mc_moment(
            Point2::ORIGIN,
            None,
            1.0,
            &McSpec::rademacher(20, 5),
            &t,
            &PatchVelocityEvaluator::closed_form(),
        )
        .unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.variance, 0.0);
    }

    #[test]
    fn samples_are_the_pathwise_values() {
        let t = TruncationSpec::fixed(24).unwrap();
        let ev = PatchVelocityEvaluator::closed_form();
        let x = Point2::new(2.0, -1.0);
        let s = mc_samples(x, None, &McSpec::rademacher(40, 100), &t, &ev).unwrap();
        for k in [0usize, 17, 39] {
            let u = crate::field::velocity_u0(&WeightLattice::rademacher(100 + k as u64), x, &t, &ev)
                .unwrap();
            assert_eq!(u, s[k]);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let t = TruncationSpec::fixed(8).unwrap();
        let ev = PatchVelocityEvaluator::closed_form();
        assert!(mc_moment(Point2::ORIGIN, None, 0.5, &McSpec::rademacher(10, 0), &t, &ev).is_err());
        assert!(mc_moment(Point2::ORIGIN, None, 2.0, &McSpec::rademacher(1, 0), &t, &ev).is_err());
    }
}
