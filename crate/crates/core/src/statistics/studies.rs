//! Parameter studies behind the growth, continuity, decorrelation, partition
//! and Morrey-norm bounds. Every study is deterministic given its config.

use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ensemble::{estimate, ls_slope, EnsembleEstimate};
use super::exact::{exact_covariance, exact_second_moment, s_sum};
use super::mc::{mc_moment, McSpec};
use super::morrey::{geometric_radii, morrey_norm, U0GridSampler};
use crate::error::{Error, Result};
use crate::field::TruncationSpec;
use crate::geom::{Point2, Vel2};
use crate::kernel::{
    biot_savart, kernel_difference_identity, log_lipschitz_data, patch_velocity_closed_form,
    rotate_about_center, rotate_velocity, PatchVelocityEvaluator, PATCH_CENTER,
};
use crate::lattice_sum::LatticeRange;
use crate::quadrature::patch_velocity_quadrature;
use crate::weights::{Distribution, WeightLattice};

fn log_e_plus(r: f64) -> f64 {
    (E + r).ln()
}

fn unit(theta: f64) -> Point2 {
    Point2::new(theta.cos(), theta.sin())
}

// ---------------------------------------------------------------- kernel checks

/// Summary of the single-patch checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelReport {
    pub identity_pairs: usize,
    pub identity_max_rel: f64,
    pub antisymmetry_max_abs: f64,
    pub quadrature_points: usize,
    pub quadrature_max_diff: f64,
    pub center_value: f64,
    pub rotation_max_diff: f64,
    pub curl_inside_max_err: f64,
    pub curl_outside_max_err: f64,
    pub divergence_max: f64,
    pub far_field_worst_margin: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelCheckConfig {
    pub identity_pairs: usize,
    pub quadrature_points: usize,
    pub quadrature_tol: f64,
    pub fd_points: usize,
    pub seed: u64,
}

impl Default for KernelCheckConfig {
    fn default() -> Self {
        Self { identity_pairs: 10_000, quadrature_points: 1_000, quadrature_tol: 1e-10, fd_points: 400, seed: 1 }
    }
}

fn dist_to_square_boundary(p: Point2) -> f64 {
    let inside = (0.0..=1.0).contains(&p.x1) && (0.0..=1.0).contains(&p.x2);
    if inside {
        p.x1.min(1.0 - p.x1).min(p.x2).min(1.0 - p.x2)
    } else {
        let dx = (0.0 - p.x1).max(p.x1 - 1.0).max(0.0);
        let dy = (0.0 - p.x2).max(p.x2 - 1.0).max(0.0);
        dx.hypot(dy)
    }
}

/// Centred differences `(curl v, div v)` at `p` with step `h`.
pub fn fd_curl_div(p: Point2, h: f64) -> (f64, f64) {
    let v = patch_velocity_closed_form;
    let e1 = Point2::new(h, 0.0);
    let e2 = Point2::new(0.0, h);
    let d1 = (v(p + e1) - v(p - e1)) * (0.5 / h);
    let d2 = (v(p + e2) - v(p - e2)) * (0.5 / h);
    (d1.u2 - d2.u1, d1.u1 + d2.u2)
}

pub fn kernel_checks(cfg: &KernelCheckConfig) -> Result<KernelReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut identity_max_rel: f64 = 0.0;
    let mut antisymmetry_max_abs: f64 = 0.0;
    for _ in 0..cfg.identity_pairs {
        let ra = 10f64.powf(rng.random_range(-3.0..3.0));
        let rb = 10f64.powf(rng.random_range(-3.0..3.0));
        let a = unit(rng.random_range(0.0..2.0 * PI)) * ra;
        let b = unit(rng.random_range(0.0..2.0 * PI)) * rb;
        if a == b {
            continue;
        }
        let id = kernel_difference_identity(a, b)?;
        identity_max_rel = identity_max_rel.max((id.lhs - id.rhs).abs() / id.rhs);
        let k = biot_savart(a)?;
        let km = biot_savart(-a)?;
        antisymmetry_max_abs = antisymmetry_max_abs.max((k + km).norm());
    }

    let mut quadrature_max_diff: f64 = 0.0;
    let mut rotation_max_diff: f64 = 0.0;
    for i in 0..cfg.quadrature_points {
        // Half the points near the patch, half spread out to |x| ~ 100.
        let p = if i % 2 == 0 {
            Point2::new(rng.random_range(-1.5..2.5), rng.random_range(-1.5..2.5))
        } else {
            PATCH_CENTER + unit(rng.random_range(0.0..2.0 * PI)) * 10f64.powf(rng.random_range(-1.0..2.0))
        };
        let closed = patch_velocity_closed_form(p);
        let quad = patch_velocity_quadrature(p, cfg.quadrature_tol)?;
        quadrature_max_diff = quadrature_max_diff.max(closed.max_abs_diff(quad));
        let rot = patch_velocity_closed_form(rotate_about_center(p));
        rotation_max_diff = rotation_max_diff.max(rot.max_abs_diff(rotate_velocity(closed)));
    }

    let mut curl_inside_max_err: f64 = 0.0;
    let mut curl_outside_max_err: f64 = 0.0;
    let mut divergence_max: f64 = 0.0;
    let mut done = 0;
    while done < cfg.fd_points {
        let p = Point2::new(rng.random_range(-2.0..3.0), rng.random_range(-2.0..3.0));
        if dist_to_square_boundary(p) < 0.1 {
            continue;
        }
        done += 1;
        let inside = (0.0..1.0).contains(&p.x1) && (0.0..1.0).contains(&p.x2);
        let (curl, _) = fd_curl_div(p, 1e-3);
        let (_, div) = fd_curl_div(p, 1e-4);
        if inside {
            curl_inside_max_err = curl_inside_max_err.max((curl - 1.0).abs());
        } else {
            curl_outside_max_err = curl_outside_max_err.max(curl.abs());
        }
        divergence_max = divergence_max.max(div.abs());
    }

    // Far field: |2π r |v| - 1| <= r^{-2}; report the smallest slack.
    let mut far_field_worst_margin = f64::INFINITY;
    for k in 0..200 {
        let r = 50.0 * 10f64.powf(k as f64 / 50.0);
        let p = PATCH_CENTER + unit(0.37 * k as f64) * r;
        let err = (2.0 * PI * r * patch_velocity_closed_form(p).norm() - 1.0).abs();
        far_field_worst_margin = far_field_worst_margin.min(r.powi(-2) - err);
    }

    Ok(KernelReport {
        identity_pairs: cfg.identity_pairs,
        identity_max_rel,
        antisymmetry_max_abs,
        quadrature_points: cfg.quadrature_points,
        quadrature_max_diff,
        center_value: patch_velocity_closed_form(PATCH_CENTER).norm(),
        rotation_max_diff,
        curl_inside_max_err,
        curl_outside_max_err,
        divergence_max,
        far_field_worst_margin,
    })
}

// ---------------------------------------------------------------- log-Lipschitz

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LipschitzConfig {
    pub n_pairs: usize,
    pub min_separation: f64,
    pub max_radius: f64,
    pub seed: u64,
}

impl Default for LipschitzConfig {
    fn default() -> Self {
        Self { n_pairs: 100_000, min_separation: 1e-8, max_radius: 1e3, seed: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipschitzStudy {
    pub config: LipschitzConfig,
    /// Empirical sup of `|v(x) - v(y)| / envelope`, the fitted constant.
    pub sup_ratio: f64,
    pub sup_x: Point2,
    pub sup_y: Point2,
    /// Sup restricted to pairs with both points in `3Q0` and `|x - y| < 1e-3`.
    pub sup_ratio_small_sep: f64,
    pub pairs_in_triple: usize,
}

/// Samples pairs: half with `x` uniform in `3Q0` and log-uniform separations in
/// `[min_separation, 1]`, half with log-uniform `|x| <= max_radius` and
/// separations in `[min_separation, max_radius]`. The same seed gives the same
/// positions and directions for every `min_separation`.
pub fn lipschitz_study(cfg: &LipschitzConfig, eval: &PatchVelocityEvaluator) -> Result<LipschitzStudy> {
    if !(cfg.min_separation > 0.0) || cfg.n_pairs == 0 || !(cfg.max_radius >= 1.0) {
        return Err(Error::Config("lipschitz study needs pairs, min_separation > 0, max_radius >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lo = cfg.min_separation.log10();
    let hi_r = cfg.max_radius.log10();
    let mut best = (f64::NEG_INFINITY, Point2::ORIGIN, Point2::ORIGIN);
    let mut best_small = 0.0f64;
    let mut in_triple = 0;
    for i in 0..cfg.n_pairs {
        let u: f64 = rng.random();
        let dir = unit(rng.random_range(0.0..2.0 * PI));
        let (x, sep) = if i % 2 == 0 {
            let x = Point2::new(rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0));
            (x, 10f64.powf(lo + u * (0.0 - lo)))
        } else {
            let r = 10f64.powf(rng.random_range(-3.0..hi_r));
            let x = unit(rng.random_range(0.0..2.0 * PI)) * r;
            (x, 10f64.powf(lo + u * (hi_r - lo)))
        };
        let y = x + dir * sep;
        if x == y {
            continue;
        }
        let d = log_lipschitz_data(x, y, eval)?;
        let ratio = d.ratio();
        if d.log_factor > 0.0 || (crate::kernel::in_triple_patch(x) && crate::kernel::in_triple_patch(y)) {
            in_triple += 1;
            if sep < 1e-3 {
                best_small = best_small.max(ratio);
            }
        }
        if ratio > best.0 {
            best = (ratio, x, y);
        }
    }
    Ok(LipschitzStudy {
        config: *cfg,
        sup_ratio: best.0,
        sup_x: best.1,
        sup_y: best.2,
        sup_ratio_small_sep: best_small,
        pairs_in_triple: in_triple,
    })
}

// ---------------------------------------------------------------- growth

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub radii: Vec<f64>,
    /// Direction of the evaluation points `x = r (cos θ, sin θ)`.
    pub angle: f64,
    pub range: LatticeRange,
    /// Monte Carlo column: ensemble and the largest `|x|` it is run for.
    pub mc: Option<McSpec>,
    pub mc_max_radius: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            radii: vec![1.0, 10.0, 100.0, 1000.0, 10_000.0],
            angle: 0.0,
            range: LatticeRange::Whole,
            mc: None,
            mc_max_radius: 100.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRow {
    pub radius: f64,
    pub x: Point2,
    pub exact: f64,
    pub ratio: f64,
    pub mc: Option<EnsembleEstimate>,
    pub mc_radius_m: Option<u32>,
    /// `exact - Σ_{|n| <= M_mc}`: the part of the exact moment outside the
    /// Monte Carlo truncation.
    pub mc_truncation_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of the ratio against `ln|x|`.
    pub slope: f64,
    pub mean_ratio: f64,
}

impl GrowthTable {
    pub fn relative_slope(&self) -> f64 {
        self.slope / self.mean_ratio
    }
}

/// Truncation radius used for Monte Carlo at `x`: the smallest power of two
/// at least `max(64, 5|x|)`, which keeps the neglected tail
/// `≈ |x|^2 / (4π M^2)` below 1% of the moment.
pub fn mc_radius_for(x: Point2) -> u32 {
    (5.0 * x.norm()).max(64.0).ceil().min((1u64 << 31) as f64) as u32
}

pub fn mc_truncation_for(x: Point2) -> TruncationSpec {
    TruncationSpec { radius_m: mc_radius_for(x).next_power_of_two(), tail_tol: f64::NAN }
}

pub fn growth_study(cfg: &GrowthConfig, eval: &PatchVelocityEvaluator) -> Result<GrowthTable> {
    if cfg.radii.is_empty() || cfg.radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Config("growth radii must be positive".into()));
    }
    let mut rows = Vec::with_capacity(cfg.radii.len());
    for &r in &cfg.radii {
        let x = unit(cfg.angle) * r;
        let exact = exact_second_moment(x, cfg.range, eval)?;
        let (mc, mc_radius_m, gap) = match cfg.mc {
            Some(spec) if r <= cfg.mc_max_radius => {
                let t = mc_truncation_for(x);
                let est = mc_moment(x, None, 2.0, &spec, &t, eval)?;
                let trunc_exact = exact_second_moment(x, t.range(), eval)?;
                (Some(est), Some(t.radius_m), Some(exact - trunc_exact))
            }
            _ => (None, None, None),
        };
        rows.push(GrowthRow {
            radius: r,
            x,
            exact,
            ratio: exact / log_e_plus(r),
            mc,
            mc_radius_m,
            mc_truncation_gap: gap,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.radius.ln()).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let slope = if rows.len() > 1 { ls_slope(&lx, &ratios) } else { 0.0 };
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(GrowthTable { rows, slope, mean_ratio })
}

// ---------------------------------------------------------------- decorrelation

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecorrelationConfig {
    pub separations: Vec<f64>,
    /// Offset of the pair's midpoint from the origin, perpendicular to `x - y`.
    pub offset: f64,
    pub range: LatticeRange,
}

impl Default for DecorrelationConfig {
    fn default() -> Self {
        Self { separations: vec![4.0, 16.0, 64.0, 256.0], offset: 1.0, range: LatticeRange::Whole }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecorrelationRow {
    pub separation: f64,
    pub x: Point2,
    pub y: Point2,
    pub covariance: f64,
    pub ratio: f64,
    /// Whether `|x - y| >= max(|x|, |y|) / 2`.
    pub in_regime: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecorrelationTable {
    pub rows: Vec<DecorrelationRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

/// Pairs `x = (d/2, o)`, `y = (-d/2, o)`.
pub fn decorrelation_study(
    cfg: &DecorrelationConfig,
    eval: &PatchVelocityEvaluator,
) -> Result<DecorrelationTable> {
    if cfg.separations.is_empty() || cfg.separations.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Config("separations must be positive".into()));
    }
    let mut rows = Vec::new();
    for &d in &cfg.separations {
        let x = Point2::new(0.5 * d, cfg.offset);
        let y = Point2::new(-0.5 * d, cfg.offset);
        let covariance = exact_covariance(x, y, cfg.range, eval)?;
        rows.push(DecorrelationRow {
            separation: d,
            x,
            y,
            covariance,
            ratio: covariance.abs() / log_e_plus(d),
            in_regime: d >= 0.5 * x.norm().max(y.norm()),
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Ok(DecorrelationTable { rows, max_ratio, min_ratio })
}

// ---------------------------------------------------------------- S(x, y)

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SBoundConfig {
    /// `|y|` values.
    pub y_radii: Vec<f64>,
    /// `|x - y| / |y|` values; below 1/2 is the near case, above the far case.
    pub separation_fractions: Vec<f64>,
    /// Direction of `y`.
    pub angle: f64,
    pub range: LatticeRange,
}

impl Default for SBoundConfig {
    fn default() -> Self {
        Self {
            y_radii: (1..=10).map(|k| 2f64.powi(k)).collect(),
            separation_fractions: vec![0.05, 0.1, 0.2, 0.35, 0.49, 0.5, 0.75, 1.0, 1.5, 2.0],
            angle: 0.3,
            range: LatticeRange::Whole,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SBoundRow {
    pub x: Point2,
    pub y: Point2,
    pub far_case: bool,
    pub s: f64,
    /// `S(x,y) (1 + |x-y|^2) / ln(e + max(|x|, |y|))`.
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SBoundTable {
    pub rows: Vec<SBoundRow>,
    pub sup: f64,
}

/// `x = y - d ŷ`, so that `|x - y| = d` and `x` sits between `y` and the
/// origin (or beyond it).
pub fn s_bound_study(cfg: &SBoundConfig) -> Result<SBoundTable> {
    if cfg.y_radii.is_empty() || cfg.separation_fractions.is_empty() {
        return Err(Error::Config("empty s-bound grid".into()));
    }
    let dir = unit(cfg.angle);
    let mut rows = Vec::new();
    for &ry in &cfg.y_radii {
        for &f in &cfg.separation_fractions {
            let y = dir * ry;
            let d = f * ry;
            let x = y - dir * d;
            let s = s_sum(x, y, cfg.range)?;
            let normalized = s * (1.0 + d * d) / log_e_plus(x.norm().max(ry));
            rows.push(SBoundRow { x, y, far_case: d >= 0.5 * ry, s, normalized });
        }
    }
    let sup = rows.iter().map(|r| r.normalized).fold(f64::NEG_INFINITY, f64::max);
    Ok(SBoundTable { rows, sup })
}

// ---------------------------------------------------------------- Morrey and scaling

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldEnsembleConfig {
    pub realizations: usize,
    pub seed_base: u64,
    pub distribution: Distribution,
    pub alpha: f64,
    /// Outer radii of the Morrey sup; the largest sets the sampled region.
    pub r_max_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    /// Outer radius of the Morrey sup for the rescaled fields.
    pub r_max_scaled: f64,
}

impl Default for FieldEnsembleConfig {
    fn default() -> Self {
        Self {
            realizations: 50,
            seed_base: 1,
            distribution: Distribution::Rademacher,
            alpha: 0.25,
            r_max_values: vec![512.0, 1024.0],
            eps_values: vec![1.0, 0.5, 0.25, 0.125, 0.0625],
            r_max_scaled: 64.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorreyRow {
    pub seed: u64,
    /// Norm and maximizing radius for each entry of `r_max_values`.
    pub norms: Vec<f64>,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub eps: f64,
    /// Ensemble statistics of the squared Morrey norm of `u0^ε`.
    pub squared_norm: EnsembleEstimate,
    /// Mean squared norm divided by `ε^2 |ln ε|` (by 1 at `ε = 1`).
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldEnsembleStudy {
    pub truncation_m: u32,
    pub fft_size: usize,
    pub morrey: Vec<MorreyRow>,
    pub scaling: Vec<ScalingRow>,
}

impl FieldEnsembleStudy {
    /// Largest relative change of a realization's norm between consecutive
    /// outer radii.
    pub fn max_relative_change(&self) -> f64 {
        self.morrey
            .iter()
            .flat_map(|r| r.norms.windows(2).map(|w| (w[1] - w[0]).abs() / w[0]))
            .fold(0.0, f64::max)
    }
}

pub fn scaling_denominator(eps: f64) -> f64 {
    if eps == 1.0 {
        1.0
    } else {
        eps * eps * eps.ln().abs()
    }
}

/// Samples `u0` on the unit grid covering `B_{R_max}` (truncated to
/// `|n| <= R_max - 1`) and evaluates the Morrey norms of each realization and
/// of its rescalings `u0^ε`.
pub fn field_ensemble_study(
    cfg: &FieldEnsembleConfig,
    eval: &PatchVelocityEvaluator,
) -> Result<FieldEnsembleStudy> {
    if cfg.realizations < 2 || cfg.r_max_values.is_empty() {
        return Err(Error::Config("need at least two realizations and one outer radius".into()));
    }
    if cfg.eps_values.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(Error::Config("eps values must lie in (0, 1]".into()));
    }
    let r_big = cfg.r_max_values.iter().cloned().fold(0.0, f64::max);
    if !(r_big >= 2.0) || r_big.fract() != 0.0 {
        return Err(Error::Config("outer radii must be integers >= 2".into()));
    }
    for &e in &cfg.eps_values {
        if cfg.r_max_scaled / e > r_big * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "eps = {e} needs the field on B_{{{}}}, beyond R_max = {r_big}",
                cfg.r_max_scaled / e
            )));
        }
    }
    let half = r_big as usize;
    let m = (r_big as u32).saturating_sub(1).max(3);
    let sampler = U0GridSampler::new(m, half, eval)?;
    let radii: Vec<Vec<f64>> = cfg.r_max_values.iter().map(|&r| geometric_radii(r)).collect();
    let scaled_radii = geometric_radii(cfg.r_max_scaled);
    let mut morrey = Vec::with_capacity(cfg.realizations);
    let mut sq: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.realizations); cfg.eps_values.len()];
    for k in 0..cfg.realizations as u64 {
        let seed = cfg.seed_base.wrapping_add(k);
        let field = sampler.sample(&WeightLattice::new(seed, cfg.distribution));
        let mut norms = Vec::new();
        let mut argmax = Vec::new();
        for r in &radii {
            let est = morrey_norm(&field, cfg.alpha, r)?;
            norms.push(est.norm_value);
            argmax.push(est.argmax_r);
        }
        morrey.push(MorreyRow { seed, norms, argmax });
        for (i, &e) in cfg.eps_values.iter().enumerate() {
            let est = morrey_norm(&field.scaled(e)?, cfg.alpha, &scaled_radii)?;
            sq[i].push(est.norm_value * est.norm_value);
        }
    }
    let scaling = cfg
        .eps_values
        .iter()
        .zip(&sq)
        .map(|(&eps, v)| {
            let squared_norm = estimate(v);
            ScalingRow { eps, squared_norm, ratio: squared_norm.mean / scaling_denominator(eps) }
        })
        .collect();
    Ok(FieldEnsembleStudy { truncation_m: m, fft_size: sampler.fft_size(), morrey, scaling })
}

/// `|mean| / std_error` of `u1` and of `u2^3` over realizations of `u0`; both
/// are odd under `a -> -a`, so their expectations vanish for symmetric weights.
pub fn odd_moment_z_scores(samples: &[Vel2]) -> [f64; 2] {
    let z = |vals: Vec<f64>| {
        let e = estimate(&vals);
        if e.std_error > 0.0 { e.mean.abs() / e.std_error } else { 0.0 }
    };
    [
        z(samples.iter().map(|u| u.u1).collect()),
        z(samples.iter().map(|u| u.u2 * u.u2 * u.u2).collect()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_kernel_report() {
        let r = kernel_checks(&KernelCheckConfig {
            identity_pairs: 500,
            quadrature_points: 20,
            quadrature_tol: 1e-10,
            fd_points: 50,
            seed: 3,
        })
        .unwrap();
        assert!(r.identity_max_rel < 1e-12);
        assert_eq!(r.antisymmetry_max_abs, 0.0);
        assert!(r.quadrature_max_diff < 1e-8);
        assert!(r.far_field_worst_margin > 0.0);
    }

    #[test]
    fn s_bound_grid_shape() {
        let cfg = SBoundConfig {
            y_radii: vec![2.0, 4.0],
            separation_fractions: vec![0.1, 1.0],
            angle: 0.3,
            range: LatticeRange::Disk(100),
        };
        let t = s_bound_study(&cfg).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(!t.rows[0].far_case && t.rows[1].far_case);
        assert!(((t.rows[3].x - t.rows[3].y).norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_denominators() {
        assert_eq!(scaling_denominator(1.0), 1.0);
        assert!((scaling_denominator(0.5) - 0.25 * 2f64.ln()).abs() < 1e-15);
    }
}
