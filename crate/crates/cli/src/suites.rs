//! Verification suites runnable from the command line.

use std::f64::consts::PI;

use qflow_core::conformal::*;
use qflow_core::fraclap::*;
use qflow_core::lemma22kit::*;
use qflow_core::paneitz::MultiplierTable;
use qflow_core::problem::fibonacci_directions;
use qflow_core::s3harmonics::*;
use qflow_core::specialfun::binomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliResult, Phase};
use crate::report::{Check, Relation};

pub type SuiteResult = CliResult<(Vec<Check>, Value)>;

fn random_coeffs(degree: usize, zonal: bool, rng: &mut ChaCha8Rng) -> HarmonicCoeffs {
    let mut c = HarmonicCoeffs::zeros(degree, zonal);
    for v in c.as_mut_slice() {
        *v = rng.gen_range(-1.0..1.0);
    }
    c
}

/// Volume and pointwise equation for u_λ = log(2λ/(1+λ²|x|²)).
pub fn verify_spherical(_cfg: &RunConfig) -> SuiteResult {
    let grid = make_grid(64, true).phase("sphere grid")?;
    let points: [Point3; 3] = [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.3, -0.4, 1.2]];
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        let values: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|p| {
                let x = angles_to_euclidean(*p)?;
                Ok((3.0 * spherical_solution(lambda, [0.0; 3], x)? - 3.0 * w0_at_angle(p.psi)).exp())
            })
            .collect::<qflow_core::Result<_>>()
            .phase("spherical volume")?;
        let volume = sphere_integral_of_euclidean(&values, &grid).phase("spherical volume")?;
        let rel = (volume / (2.0 * PI * PI) - 1.0).abs();
        checks.push(Check::new(format!("lambda={lambda} volume rel err"), rel, Relation::Below, 1e-8));
        let u = move |y: Point3| spherical_solution(lambda, [0.0; 3], y).unwrap_or(f64::NAN);
        let lap = PointEvaluable::laplacian_of(u, 1e-2, 1.0 + lambda.ln().abs(), 2.0);
        let mut residuals = Vec::new();
        for x in points {
            let rhs = 2.0 * (3.0 * u(x)).exp();
            let lhs = half_laplacian(&lap, x, 1e-4 * rhs).phase("principal-value oracle")?;
            let err = (lhs / rhs - 1.0).abs();
            checks.push(Check::new(
                format!("lambda={lambda} residual at ({}, {}, {})", x[0], x[1], x[2]),
                err,
                Relation::Below,
                1e-2,
            ));
            residuals.push(json!({ "x": x, "lhs": lhs, "rhs": rhs, "rel_err": err }));
        }
        rows.push(json!({ "lambda": lambda, "volume": volume, "residuals": residuals }));
    }
    Ok((checks, json!({ "solutions": rows })))
}

fn beckner_sides(grid: &SphereGrid, table: &MultiplierTable, w: &HarmonicCoeffs) -> CliResult<(f64, f64)> {
    let values = grid.synthesize(w).phase("beckner synthesis")?;
    let em1: Vec<f64> = values.iter().map(|v| v.exp_m1()).collect();
    let lhs = (grid.integrate(&em1) / S3_AREA).ln_1p();
    let rhs = table.sqrt_apply(w).phase("beckner energy")?.norm_sq() / (2.0 * S3_AREA * 6.0);
    Ok((lhs, rhs))
}

/// Random mean-free w with ‖w‖ ≤ 3 in the multiplier norm, plus sharpness
/// ratios along first and second harmonics.
pub fn beckner_suite(cfg: &RunConfig) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut min_margin = f64::INFINITY;
    let mut passes = 0usize;
    let total = 200;
    for i in 0..total {
        let zonal = i % 4 != 0;
        let degree = if zonal { rng.gen_range(1..=32) } else { rng.gen_range(1..=6) };
        let grid_degree = 3 * degree + 16;
        let grid = make_grid(grid_degree, zonal).phase("beckner grid")?;
        let table = MultiplierTable::new(3, grid_degree).phase("multipliers")?;
        let mut w = random_coeffs(degree, zonal, &mut rng).with_degree(grid_degree);
        w.as_mut_slice()[0] = 0.0;
        let norm = table.sqrt_apply(&w).phase("beckner energy")?.norm_sq().sqrt();
        w.scale(rng.gen_range(0.01..3.0) / norm);
        let (lhs, rhs) = beckner_sides(&grid, &table, &w)?;
        min_margin = min_margin.min(rhs - lhs);
        if rhs - lhs >= -1e-10 {
            passes += 1;
        }
    }
    let mut checks = vec![
        Check::new("instances satisfying the inequality", passes as f64, Relation::Equal, total as f64),
        Check::new("min margin rhs - lhs", min_margin, Relation::AtLeast, -1e-10),
    ];
    let grid = make_grid(16, true).phase("beckner grid")?;
    let table = MultiplierTable::new(3, 16).phase("multipliers")?;
    let mut ratios = Vec::new();
    for (l, limit) in [(1usize, 1.0), (2, 0.25)] {
        for eps in [1e-2, 1e-3, 1e-4] {
            let mut w = HarmonicCoeffs::zeros(16, true);
            w.as_mut_slice()[l] = eps;
            let (lhs, rhs) = beckner_sides(&grid, &table, &w)?;
            let ratio = lhs / rhs;
            let check = Check::new(format!("l={l} eps={eps:e} |ratio - {limit}|"), (ratio - limit).abs(), Relation::Below, 1e-3);
            // the l = 2 ratio only approaches its limit at rate ε
            checks.push(if l == 1 { check } else { check.diagnostic() });
            ratios.push(json!({ "l": l, "eps": eps, "ratio": ratio, "limit": limit }));
        }
    }
    Ok((checks, json!({ "seed": cfg.seed, "instances": total, "passes": passes, "min_margin": min_margin, "sharpness": ratios })))
}

/// mu[l] ≥ 1 and ‖w − w̄‖² ≤ Σ mu w² on random coefficient vectors.
pub fn poincare_suite(cfg: &RunConfig) -> SuiteResult {
    let big = MultiplierTable::new(3, 512).phase("multipliers")?;
    let min_mu = (1..=512).map(|l| big.mu()[l]).fold(f64::INFINITY, f64::min);
    let table = MultiplierTable::new(3, 16).phase("multipliers")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut min_margin = f64::INFINITY;
    for i in 0..500 {
        let c = random_coeffs(16, i % 2 == 0, &mut rng);
        let c = if c.is_zonal() { c.to_full() } else { c };
        let mean_free: f64 = c.as_slice()[1..].iter().map(|v| v * v).sum();
        min_margin = min_margin.min(table.sqrt_apply(&c).phase("poincare")?.norm_sq() - mean_free);
    }
    let checks = vec![
        Check::new("min mu[l], 1 <= l <= 512", min_mu, Relation::AtLeast, 1.0),
        Check::new("min margin over 500 vectors", min_margin, Relation::AtLeast, -1e-12),
    ];
    Ok((checks, json!({ "seed": cfg.seed, "min_mu": min_mu, "min_margin": min_margin })))
}

fn richardson_derivative(f: impl Fn(f64) -> f64, at: f64, order: usize, h: f64) -> f64 {
    let central = |step: f64| {
        let mut s = 0.0;
        for j in 0..=order {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binomial(order, j) * f(at + (order as f64 / 2.0 - j as f64) * step);
        }
        s / step.powi(order as i32)
    };
    let a: Vec<f64> = (0..3).map(|i| central(h / 2f64.powi(i))).collect();
    let b = [(4.0 * a[1] - a[0]) / 3.0, (4.0 * a[2] - a[1]) / 3.0];
    (16.0 * b[1] - b[0]) / 15.0
}

/// Plateaus, Leibniz form against differences, far-field decay.
pub fn lemma22_suite(cfg: &RunConfig) -> SuiteResult {
    let chain = build_chain(cfg.lemma22.k, cfg.lemma22.quad_tol).phase("cutoff chain")?;
    let chi = SmoothCutoff::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs = fibonacci_directions(100);
    let mut plateau = 0.0f64;
    for (i, d) in dirs.iter().enumerate() {
        let r = if i % 2 == 0 { rng.gen_range(0.0..0.5) } else { rng.gen_range(1.0..50.0) };
        let x = [r * d[0], r * d[1], r * d[2]];
        let want = if r <= 0.5 { 0.0 } else { -r.ln() };
        plateau = plateau.max((u0_lemma22(&chain, &chi, x).phase("cutoff profile")? - want).abs());
    }
    // f64 differences resolve up to third derivatives; higher k is covered by
    // the frozen high-precision table in the test suite
    let fd_order = cfg.lemma22.k.min(3);
    let fd_chain = build_chain(fd_order, 1e-13).phase("cutoff chain")?;
    let mut fd_err = 0.0f64;
    for d in fibonacci_directions(10) {
        let r = rng.gen_range(0.55..0.95);
        let x = [r * d[0], r * d[1], r * d[2]];
        let f = |t: f64| chi_times_vk(&fd_chain, &chi, [t, x[1], x[2]]).unwrap_or(f64::NAN);
        let fd = richardson_derivative(f, x[0], fd_order, 1e-2);
        let got = u0_lemma22(&fd_chain, &chi, x).phase("cutoff profile")?;
        fd_err = fd_err.max((got - fd).abs() / got.abs().max(1.0));
    }
    let decay = decay_spotcheck(&chain, &chi, &[2.0, 4.0, 8.0]).phase("far-field decay")?;
    let checks = vec![
        Check::new("plateau abs err at 100 points", plateau, Relation::Below, 1e-7),
        Check::new(format!("Leibniz vs differences, order {fd_order}"), fd_err, Relation::Below, 1e-3),
        Check::flag("far-field weighted values bounded", decay.bounded == Some(true) && !decay.inconclusive),
    ];
    Ok((checks, json!({ "k": cfg.lemma22.k, "seed": cfg.seed, "decay": decay })))
}

/// Fundamental solution, Fourier value, convolution identity and
/// weighted decay of the Gaussian.
pub fn fraclap_suite(_cfg: &RunConfig) -> SuiteResult {
    let gamma3 = 2.0 * PI * PI;
    let mut fs_err = 0.0f64;
    for i in 0..10 {
        let r = 0.05 * 2f64.powi(i);
        let x = [0.0, r * 0.8, r * 0.6];
        let lap = classical_laplacian(&|y: Point3| -norm3(y).ln(), x, 1e-2 * r);
        fs_err = fs_err.max((lap / gamma3 / fundamental_solution(3, &x).phase("fundamental solution")? - 1.0).abs());
    }
    let gaussian = |y: Point3| (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])).exp();
    let g0 = half_laplacian(&PointEvaluable::new(gaussian, 10.0, 0.0), [0.0; 3], 1e-8).phase("gaussian")?;
    let fourier_err = (g0 / (4.0 / PI.sqrt()) - 1.0).abs();
    let potential = PointEvaluable::new(|y| bump_potential(y, 1e-13).unwrap_or(f64::NAN), 2.0, 0.0).with_noise(1e-13);
    let mut conv_err = 0.0f64;
    for x in [[0.0, 0.0, 0.0], [0.3, 0.2, 0.0], [0.0, -0.5, 0.4]] {
        let got = half_laplacian(&potential, x, 1e-5).phase("convolution identity")?;
        conv_err = conv_err.max((got / bump(x) - 1.0).abs());
    }
    let mut checks = vec![
        Check::new("fundamental solution rel err, 10 radii", fs_err, Relation::Below, 1e-6),
        Check::new("gaussian half-Laplacian at 0 vs Fourier", fourier_err, Relation::Below, 1e-6),
        Check::new("convolution identity rel err, 3 points", conv_err, Relation::Below, 5e-2),
    ];
    let mut reports = Vec::new();
    for s in [0.5, 1.5] {
        let report = schwartz_decay_check(PointEvaluable::new(gaussian, 10.0, 0.0), s, &[5.0, 10.0, 20.0, 40.0], 1e-4)
            .phase("weighted decay")?;
        checks.push(Check::flag(format!("gaussian s={s} weighted decay bounded"), report.bounded == Some(true)));
        reports.push(json!({ "s": s, "report": report }));
    }
    Ok((checks, json!({ "decay": reports })))
}

/// e^{3w₀}(P³v)∘π⁻¹ against the singular integral of −Δ(v∘π⁻¹).
pub fn branson_check(cfg: &RunConfig) -> SuiteResult {
    let degree = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut c = random_coeffs(degree, true, &mut rng);
    c.as_mut_slice()[0] = 0.0;
    let table = MultiplierTable::new(3, degree).phase("multipliers")?;
    let basis = HarmonicBasis::new(degree);
    let scale = c.as_slice().iter().map(|a| a.abs()).sum::<f64>();
    let v = {
        let (basis, c) = (basis.clone(), c.clone());
        move |x: Point3| basis.evaluate(&c, euclidean_to_angles(x)).unwrap_or(f64::NAN)
    };
    let lap = PointEvaluable::laplacian_of(v, 1e-2, scale, 4.0);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for x in [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.5], [0.7, -0.7, 0.3]] {
        let spectral = branson_transport(&c, &table, &basis, x).phase("spectral transport")?;
        let oracle = half_laplacian(&lap, x, 1e-4 * spectral.abs().max(1e-3)).phase("principal-value oracle")?;
        let err = (oracle / spectral - 1.0).abs();
        checks.push(Check::new(format!("rel err at ({}, {}, {})", x[0], x[1], x[2]), err, Relation::Below, 1e-2));
        rows.push(json!({ "x": x, "spectral": spectral, "oracle": oracle }));
    }
    Ok((checks, json!({ "seed": cfg.seed, "degree": degree, "coefficients": c, "points": rows })))
}
