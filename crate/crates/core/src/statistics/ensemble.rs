//! Ensemble statistics with a reduction whose result does not depend on how
//! the samples were scheduled.

use serde::{Deserialize, Serialize};

/// Monte Carlo estimate of a scalar mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub n_samples: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
}

impl EnsembleEstimate {
    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_error
    }
}

/// Running `(count, mean, M2)` triple.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn single(x: f64) -> Self {
        Self { count: 1, mean: x, m2: 0.0 }
    }

    pub fn push(&mut self, x: f64) {
        *self = self.merge(&Self::single(x));
    }

    /// Chan-Golub-LeVeque combination of two partial results.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * nb / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n as f64;
        Self { count: n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn estimate(&self) -> EnsembleEstimate {
        let variance = if self.count > 1 { (self.m2 / (self.count - 1) as f64).max(0.0) } else { 0.0 };
        let std_error = if self.count > 0 { (variance / self.count as f64).sqrt() } else { f64::NAN };
        EnsembleEstimate { n_samples: self.count, mean: self.mean, variance, std_error }
    }
}

/// Balanced binary-tree reduction over `values` in index order. The tree shape
/// depends only on `values.len()`.
pub fn pairwise_reduce(values: &[f64]) -> Accumulator {
    match values.len() {
        0 => Accumulator::default(),
        1 => Accumulator::single(values[0]),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_reduce(a).merge(&pairwise_reduce(b))
        }
    }
}

pub fn estimate(values: &[f64]) -> EnsembleEstimate {
    pairwise_reduce(values).estimate()
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
