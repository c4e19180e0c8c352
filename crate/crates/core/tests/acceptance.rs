//! Acceptance run: one test per criterion, each reporting a single
//! `criterion NN PASS|FAIL ...` line on stderr before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randvort::euler::*;
use randvort::field::{velocity_u0, TruncationSpec};
use randvort::kernel::*;
use randvort::lattice_sum::LatticeRange;
use randvort::statistics::studies::*;
use randvort::statistics::*;
use randvort::weights::{WeightLattice, WeightSource};
use randvort::{Point2, Vel2};

/// Written straight to the stream so the line shows up without `--nocapture`.
fn report(id: u32, pass: bool, detail: String) {
    let line = format!("criterion {id:02} {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn ev() -> PatchVelocityEvaluator {
    PatchVelocityEvaluator::closed_form()
}

#[test]
fn c01_kernel_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let pa = 10f64.powf(rng.random_range(-3.0..3.0));
        let pb = 10f64.powf(rng.random_range(-3.0..3.0));
        let (ta, tb): (f64, f64) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let a = Point2::new(pa * ta.cos(), pa * ta.sin());
        let b = Point2::new(pb * tb.cos(), pb * tb.sin());
        let k = kernel_difference_identity(a, b).unwrap();
        worst = worst.max((k.lhs - k.rhs).abs() / k.rhs);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && secs < 1.0;
    report(1, pass, format!("kernel identity: max rel {worst:.2e} (<= 1e-12) in {secs:.3} s (< 1 s)"));
    assert!(pass);
}

#[test]
fn c02_patch_velocity() {
    let r = kernel_checks(&KernelCheckConfig::default()).unwrap();
    let pass = r.quadrature_max_diff <= 1e-8
        && r.center_value <= 1e-10
        && r.rotation_max_diff <= 1e-8
        && r.curl_inside_max_err <= 1e-4
        && r.curl_outside_max_err <= 1e-4
        && r.divergence_max <= 1e-5
        && r.far_field_worst_margin >= 0.0;
    report(
        2,
        pass,
        format!(
            "patch velocity: quad {:.1e} centre {:.1e} rotation {:.1e} curl in {:.1e} out {:.1e} div {:.1e} far-field margin {:.1e}",
            r.quadrature_max_diff,
            r.center_value,
            r.rotation_max_diff,
            r.curl_inside_max_err,
            r.curl_outside_max_err,
            r.divergence_max,
            r.far_field_worst_margin
        ),
    );
    assert!(pass);
}

#[test]
fn c03_log_lipschitz() {
    let run = |min_separation: f64| {
        lipschitz_study(&LipschitzConfig { min_separation, ..Default::default() }, &ev()).unwrap()
    };
    let coarse = run(1e-7);
    let fine = run(1e-8);
    let growth = (fine.sup_ratio - coarse.sup_ratio) / coarse.sup_ratio;
    let pass = fine.sup_ratio.is_finite()
        && growth < 0.05
        && fine.pairs_in_triple > 0
        && fine.sup_ratio <= LOG_LIPSCHITZ_CONSTANT;
    report(
        3,
        pass,
        format!(
            "log-Lipschitz: sup {:.4} at 1e-7, {:.4} at 1e-8 (growth {:+.2}% < 5%), fitted C = {}, {} pairs in 3Q0",
            coarse.sup_ratio,
            fine.sup_ratio,
            100.0 * growth,
            LOG_LIPSCHITZ_CONSTANT,
            fine.pairs_in_triple
        ),
    );
    assert!(pass);
}

#[test]
fn c04_anchor_and_determinism() {
    let t = TruncationSpec::fixed(64).unwrap();
    let anchor_ok = (0..100u64)
        .all(|s| velocity_u0(&WeightLattice::rademacher(s), Point2::ORIGIN, &t, &ev()).unwrap() == Vel2::ZERO);
    let lat = WeightLattice::rademacher(77);
    let mut a = vec![0.0; 5000];
    let mut b = vec![0.0; 3000];
    let mut window_ok = true;
    for n2 in [-100_000i64, -1, 0, 3, 1 << 40] {
        lat.fill_row(n2, -2500, &mut a);
        lat.fill_row(n2, -777, &mut b);
        window_ok &= b.iter().zip(&a[1723..]).all(|(x, y)| x.to_bits() == y.to_bits());
    }
    let spec = McSpec::rademacher(64, 9);
    let x = Point2::new(7.0, -3.0);
    let r1 = mc_samples(x, None, &spec, &t, &ev()).unwrap();
    let r2 = mc_samples(x, None, &spec, &t, &ev()).unwrap();
    let e1 = exact_second_moment(x, LatticeRange::Whole, &ev()).unwrap();
    let e2 = exact_second_moment(x, LatticeRange::Whole, &ev()).unwrap();
    let repeat_ok = r1 == r2 && e1.to_bits() == e2.to_bits();
    let pass = anchor_ok && window_ok && repeat_ok;
    report(
        4,
        pass,
        format!("anchor and determinism: anchor {anchor_ok}, windows {window_ok}, repeat runs {repeat_ok}"),
    );
    assert!(pass);
}

#[test]
fn c05_moment_identity() {
    let spec = McSpec::rademacher(4000, 1);
    let mut pass = true;
    let mut parts = Vec::new();
    for x in [Point2::new(1.0, 0.0), Point2::new(10.0, 0.0), Point2::new(100.0, 7.0)] {
        let exact = exact_second_moment(x, LatticeRange::Whole, &ev()).unwrap();
        let t = mc_truncation_for(x);
        let mc = mc_moment(x, None, 2.0, &spec, &t, &ev()).unwrap();
        let z = mc.z_score(exact);
        pass &= z <= 4.0;
        parts.push(format!("({}, {}): mc {:.4} +- {:.4} (M = {}) exact {:.4} z {:.2}", x.x1, x.x2, mc.mean, mc.std_error, t.radius_m, exact, z));
    }
    report(5, pass, format!("p = 2 moment identity, 4000 samples, z <= 4: {}", parts.join("; ")));
    assert!(pass);
}

#[test]
fn c06_growth() {
    let t = growth_study(&GrowthConfig::default(), &ev()).unwrap();
    let finite = t.rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
    let rel = t.relative_slope();
    let pass = finite && rel <= 0.05;
    let ratios: Vec<String> = t.rows.iter().map(|r| format!("{:.4}", r.ratio)).collect();
    report(
        6,
        pass,
        format!("growth: ratios [{}] relative slope {:+.4} (<= 0.05)", ratios.join(", "), rel),
    );
    assert!(pass);
}

#[test]
fn c07_decorrelation() {
    let base = decorrelation_study(&DecorrelationConfig::default(), &ev()).unwrap();
    let mut ext_cfg = DecorrelationConfig::default();
    ext_cfg.separations.push(512.0);
    let ext = decorrelation_study(&ext_cfg, &ev()).unwrap();
    let spread = base.max_ratio / base.min_ratio;
    let drift = (ext.max_ratio - base.max_ratio).abs() / base.max_ratio;
    let regime = ext.rows.iter().all(|r| r.in_regime);
    let pass = regime && spread <= 10.0 && drift <= 0.05;
    report(
        7,
        pass,
        format!("decorrelation: max/min {spread:.3} (<= 10), sup change with 512 {:.2}% (<= 5%), regime {regime}", 100.0 * drift),
    );
    assert!(pass);
}

#[test]
fn c08_partition_bound() {
    let cfg = SBoundConfig::default();
    let base = s_bound_study(&cfg).unwrap();
    let mut ext_cfg = cfg.clone();
    ext_cfg.y_radii.push(2048.0);
    let ext = s_bound_study(&ext_cfg).unwrap();
    let both_cases = base.rows.iter().any(|r| r.far_case) && base.rows.iter().any(|r| !r.far_case);
    let finite = base.rows.iter().all(|r| r.normalized.is_finite());
    let drift = (ext.sup - base.sup).abs() / base.sup;
    let pass = both_cases && finite && base.rows.len() == 100 && drift <= 0.05;
    report(
        8,
        pass,
        format!("partition bound: sup {:.3} over 10x10 grid, with |y| = 2048 {:.3} (change {:.2}% <= 5%)", base.sup, ext.sup, 100.0 * drift),
    );
    assert!(pass);
}

fn field_study() -> &'static FieldEnsembleStudy {
    static STUDY: OnceLock<FieldEnsembleStudy> = OnceLock::new();
    STUDY.get_or_init(|| field_ensemble_study(&FieldEnsembleConfig::default(), &ev()).unwrap())
}

#[test]
fn c09_morrey_norm() {
    let radii = geometric_radii(16.0);
    let c = SampledField::from_fn(1.0 / 128.0, 16 * 128, |_| Vel2::new(1.0, 0.0)).unwrap();
    let value = morrey_norm(&c, 0.25, &radii).unwrap().norm_value;
    let const_err = (value - PI.sqrt()).abs();
    let s = field_study();
    let change = s.max_relative_change();
    let pass = const_err <= 1e-3 && change <= 0.10 && s.morrey.len() == 50;
    report(
        9,
        pass,
        format!(
            "Morrey norm: constant field {value:.6} (|err| {const_err:.1e} <= 1e-3); R_max 512 -> 1024 max change {:.2}% (<= 10%) over {} realizations",
            100.0 * change,
            s.morrey.len()
        ),
    );
    assert!(pass);
}

#[test]
fn c10_scaling() {
    let s = field_study();
    let ratios: Vec<f64> = s.scaling.iter().map(|r| r.ratio).collect();
    let norms: Vec<f64> = s.scaling.iter().map(|r| r.squared_norm.mean).collect();
    let finite = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    let shrink = norms[norms.len() - 1] / norms[0];
    let pass = finite && max / min <= 10.0 && decreasing && shrink <= 0.1;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    report(
        10,
        pass,
        format!(
            "scaling: ratios [{}] max/min {:.3} (<= 10); squared norms [{}] decreasing {decreasing}, last/first {shrink:.4} (<= 0.1)",
            fmt(&ratios),
            max / min,
            fmt(&norms)
        ),
    );
    assert!(pass);
}

fn zero_sum_strips(seed: u64, l: usize) -> Vec<f64> {
    let mut w = vec![0.0; l];
    WeightLattice::rademacher(seed).fill_row(0, 0, &mut w);
    let mean = w.iter().sum::<f64>() / l as f64;
    w.iter().map(|v| v - mean).collect()
}

#[test]
fn c11_euler_solver() {
    let cfg = EvolveConfig::new(1.0);
    // Eigenfunction.
    let l = 8.0;
    let c = 2.0 * PI / l;
    let s = init_torus(l, 128, |p| (c * p.x1).sin() * (c * p.x2).sin(), 0.0).unwrap();
    let eigen = relative_l2(&Solver::for_state(&s).unwrap().evolve(&s, &cfg).unwrap().state, &s);
    // Mollified strip shear.
    let (ls, ns) = (32usize, 128usize);
    let w = zero_sum_strips(3, ls);
    let width = 2.0 * ls as f64 / ns as f64;
    let s = init_torus(ls as f64, ns, |p| w[(p.x1.floor() as i64).rem_euclid(ls as i64) as usize], width).unwrap();
    let shear = relative_l2(&Solver::for_state(&s).unwrap().evolve(&s, &cfg).unwrap().state, &s);
    // Smooth random realization.
    let lat = WeightLattice::rademacher(5);
    let s = init_torus(16.0, 128, |p| {
        let (a, b) = p.cell();
        lat.weight(a.rem_euclid(16), b.rem_euclid(16))
    }, 0.5)
    .unwrap();
    let e = Solver::for_state(&s).unwrap().evolve(&s, &cfg).unwrap();
    let d0 = e.diagnostics[0];
    let (mut de, mut dz, mut wmax) = (0.0f64, 0.0f64, 0.0f64);
    for d in &e.diagnostics {
        de = de.max(((d.energy - d0.energy) / d0.energy).abs());
        dz = dz.max(((d.enstrophy - d0.enstrophy) / d0.enstrophy).abs());
        wmax = wmax.max(d.max_abs_omega / d0.max_abs_omega);
    }
    let pass = eigen < 1e-6 && shear < 1e-4 && de < 1e-6 && dz < 1e-6 && wmax <= 1.01;
    report(
        11,
        pass,
        format!(
            "Euler solver: eigenfunction drift {eigen:.1e} (< 1e-6), strip shear drift {shear:.1e} (< 1e-4), energy {de:.1e} enstrophy {dz:.1e} (< 1e-6), max|w| ratio {wmax:.5} (<= 1.01)"
        ),
    );
    assert!(pass);
}

#[test]
fn c12_weak_residual() {
    let l = 8.0;
    let test = TestField::new(Point2::new(4.3, 3.9), 2.5, 1.0);
    let times = |k: usize| (0..=k).map(|i| i as f64 / k as f64).collect::<Vec<_>>();
    let zero = weak_residual(&Trajectory::from_fn(l, 64, &times(16), |_, _| Vel2::ZERO), &test).unwrap();
    let w = zero_sum_strips(4, 8);
    let mut res = Vec::new();
    for (n, k) in [(64usize, 16usize), (128, 32), (256, 64)] {
        let tr = Trajectory::from_fn(l, n, &times(k), |x, _| shear_profile(&w, x));
        res.push(weak_residual(&tr, &test).unwrap().abs());
    }
    let factors: Vec<f64> = res.windows(2).map(|p| p[0] / p[1]).collect();
    let pass = zero == 0.0 && factors.iter().all(|f| *f >= 3.0);
    report(
        12,
        pass,
        format!(
            "weak residual: zero field {zero:e}; stationary shear {:.2e}, {:.2e}, {:.2e} (reduction x{:.2}, x{:.2}, each >= 3)",
            res[0], res[1], res[2], factors[0], factors[1]
        ),
    );
    assert!(pass);
}
