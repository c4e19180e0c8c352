//! Torus solver checks against analytic solutions.

use std::f64::consts::PI;

use randvort::euler::*;
use randvort::weights::{WeightLattice, WeightSource};
use randvort::Point2;

/// Strip weights over one period, shifted to sum to zero.
fn zero_sum_strips(seed: u64, l: usize) -> Vec<f64> {
    let lat = WeightLattice::rademacher(seed);
    let mut w = vec![0.0; l];
    lat.fill_row(0, 0, &mut w);
    let mean = w.iter().sum::<f64>() / l as f64;
    w.iter().map(|v| v - mean).collect()
}

/// Gaussian smoothing of the periodic strip field, summed over images.
fn mollified_strips(w: &[f64], x1: f64, sigma: f64) -> f64 {
    let l = w.len() as i64;
    let cdf = |z: f64| 0.5 * (1.0 + libm::erf(z / (sigma * 2f64.sqrt())));
    let mut acc = 0.0;
    for n in -2 * l..3 * l {
        let a = w[n.rem_euclid(l) as usize];
        acc += a * (cdf(x1 - n as f64) - cdf(x1 - n as f64 - 1.0));
    }
    acc
}

fn strip_error(w: &[f64], n: usize, sigma: f64) -> f64 {
    let l = w.len();
    let h = l as f64 / n as f64;
    let s = init_torus(l as f64, n, |p| w[(p.x1.floor() as i64).rem_euclid(l as i64) as usize], sigma)
        .unwrap();
    let g = s.omega_grid();
    let mut worst = 0.0f64;
    for j2 in [0, n / 3, n - 1] {
        for j1 in 0..n {
            let want = mollified_strips(w, j1 as f64 * h, sigma);
            worst = worst.max((g[j2 * n + j1] - want).abs());
        }
    }
    worst
}

#[test]
fn strip_field_is_reproduced_up_to_mollification() {
    let l = 32usize;
    let w = zero_sum_strips(3, l);
    let jump = (0..l).map(|k| (w[k] - w[(k + 1) % l]).abs()).fold(0.0, f64::max);
    // At width 2h the grid sees cell averages, an O((h/σ)^2) effect.
    let e128 = strip_error(&w, 128, 0.5);
    assert!(e128 < 0.015 * jump, "{e128}");
    // At fixed width the discrepancy falls with the grid spacing.
    let e256 = strip_error(&w, 256, 0.5);
    assert!(e256 * 3.0 < e128, "{e128} {e256}");
}

#[test]
fn eigenfunction_is_steady_to_spectral_accuracy() {
    let (l, n) = (8.0, 128);
    let c = 2.0 * PI / l;
    let s = init_torus(l, n, |p| (c * p.x1).sin() * (c * p.x2).sin(), 0.0).unwrap();
    let u = velocity_from_vorticity(&s);
    let h = l / n as f64;
    let mut worst = 0.0f64;
    for j2 in 0..n {
        for j1 in 0..n {
            let (x1, x2) = (j1 as f64 * h, j2 as f64 * h);
            let g1 = c * (c * x1).cos() * (c * x2).sin();
            let g2 = c * (c * x1).sin() * (c * x2).cos();
            let idx = j2 * n + j1;
            worst = worst.max((u.u1[idx] * g1 + u.u2[idx] * g2).abs());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn strip_profile_matches_torus_velocity_within_smoothing() {
    let (l, n) = (32usize, 256usize);
    let w = zero_sum_strips(8, l);
    let h = l as f64 / n as f64;
    let sigma = 2.0 * h;
    let s = init_torus(l as f64, n, |p| w[(p.x1.floor() as i64).rem_euclid(l as i64) as usize], sigma)
        .unwrap();
    let u = velocity_from_vorticity(&s);
    let prof: Vec<f64> = (0..n).map(|j| shear_profile(&w, Point2::new(j as f64 * h, 0.0)).u2).collect();
    let mean = prof.iter().sum::<f64>() / n as f64;
    // Smoothing a kink with slope jump 2 by a Gaussian moves it by at most
    // 2σ/√(2π); the torus velocity also has zero mean.
    let bound = 2.0 * sigma / (2.0 * PI).sqrt() * 1.05;
    for j in 0..n {
        assert!(u.u1[j].abs() < 1e-12);
        assert!((u.u2[j] - (prof[j] - mean)).abs() < bound, "{j}");
    }
}

#[test]
fn periodic_shear_wanders_like_a_bridge() {
    let l = 4096;
    let mut scaled = Vec::new();
    for seed in 0..20 {
        let w = zero_sum_strips(seed, l);
        let peak = (0..l)
            .map(|n| shear_profile(&w, Point2::new(n as f64, 0.5)).u2.abs())
            .fold(0.0, f64::max);
        scaled.push(peak / (l as f64).sqrt());
    }
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    // The maximum of a Brownian bridge has mean √(π/2) ln 2 ≈ 0.87.
    assert!((0.5..1.3).contains(&mean), "{mean}");
}

#[test]
fn smooth_realization_conserves_energy_and_enstrophy() {
    let l = 16i64;
    let lat = WeightLattice::rademacher(5);
    let s = init_torus(l as f64, 128, |p| {
        let (a, b) = p.cell();
        lat.weight(a.rem_euclid(l), b.rem_euclid(l))
    }, 0.5)
    .unwrap();
    let e = Solver::for_state(&s).unwrap().evolve(&s, &EvolveConfig::new(1.0)).unwrap();
    let d0 = e.diagnostics[0];
    for d in &e.diagnostics {
        assert!(((d.energy - d0.energy) / d0.energy).abs() < 1e-6);
        assert!(((d.enstrophy - d0.enstrophy) / d0.enstrophy).abs() < 1e-6);
        assert!(d.max_abs_omega <= 1.01 * d0.max_abs_omega);
        assert_eq!(d.mean_omega, 0.0);
    }
}

#[test]
fn weak_residual_of_an_evolved_field_shrinks_under_refinement() {
    let l = 16i64;
    let lat = WeightLattice::rademacher(5);
    let test = TestField::new(Point2::new(8.2, 7.7), 5.0, 1.0);
    let mut residuals = Vec::new();
    for (n, k) in [(64usize, 8usize), (128, 16), (256, 32)] {
        let s = init_torus(l as f64, n, |p| {
            let (a, b) = p.cell();
            lat.weight(a.rem_euclid(l), b.rem_euclid(l))
        }, 1.0)
        .unwrap();
        let cfg = EvolveConfig { t_final: 1.0, cfl: DEFAULT_CFL, snapshots: k };
        let e = Solver::for_state(&s).unwrap().evolve(&s, &cfg).unwrap();
        let tr = Trajectory::from_states(&e.snapshots).unwrap();
        residuals.push(weak_residual(&tr, &test).unwrap().abs());
    }
    for w in residuals.windows(2) {
        assert!(w[0] >= 3.0 * w[1], "{residuals:?}");
    }
}
