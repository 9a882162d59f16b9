use qflow_core::conformal::{norm3, spherical_solution, Point3};
use qflow_core::fraclap::*;
use qflow_core::quad::tanh_sinh;
use std::f64::consts::PI;

fn gaussian(y: Point3) -> f64 {
    (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])).exp()
}

/// (−Δ)^{1/2}e^{−|x|²} at radius r from the radial Fourier inversion.
fn gaussian_half_laplacian_fourier(r: f64) -> f64 {
    let hat = |k: f64| PI.powf(1.5) * (-k * k / 4.0).exp();
    if r == 0.0 {
        let i = tanh_sinh(|k: f64| k.powi(3) * hat(k), 0.0, 40.0, 1e-14).unwrap();
        return i / (2.0 * PI * PI);
    }
    let i = tanh_sinh(|k: f64| k * k * (k * r).sin() * hat(k), 0.0, 40.0, 1e-14).unwrap();
    i / (2.0 * PI * PI * r)
}

#[test]
fn gaussian_matches_fourier_oracle() {
    let g = PointEvaluable::new(gaussian, 10.0, 0.0);
    assert!((gaussian_half_laplacian_fourier(0.0) - 4.0 / PI.sqrt()).abs() < 1e-12);
    for x in [[0.0; 3], [1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [1.5, 1.0, 0.0]] {
        let want = gaussian_half_laplacian_fourier(norm3(x));
        let got = half_laplacian(&g, x, 1e-8).unwrap();
        assert!((got - want).abs() < 1e-6 * want.abs().max(1e-2), "{x:?}: {got} vs {want}");
    }
}

#[test]
fn scaling_and_linearity() {
    let lambda = 2.5;
    let scaled = PointEvaluable::new(move |y: Point3| gaussian([lambda * y[0], lambda * y[1], lambda * y[2]]), 10.0, 0.0);
    let g = PointEvaluable::new(gaussian, 10.0, 0.0);
    let x = [0.3, -0.1, 0.2];
    let lx = [lambda * x[0], lambda * x[1], lambda * x[2]];
    let a = half_laplacian(&scaled, x, 1e-8).unwrap();
    let b = lambda * half_laplacian(&g, lx, 1e-8).unwrap();
    assert!((a - b).abs() < 1e-6 * b.abs());

    let h = |y: Point3| 1.0 / (1.0 + y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).powi(2);
    let combo = PointEvaluable::new(move |y| 3.0 * gaussian(y) - 0.5 * h(y) + 7.0, 4.0, 7.0);
    let hp = PointEvaluable::new(h, 4.0, 0.0);
    let want = 3.0 * half_laplacian(&g, x, 1e-8).unwrap() - 0.5 * half_laplacian(&hp, x, 1e-8).unwrap();
    let got = half_laplacian(&combo, x, 1e-8).unwrap();
    assert!((got - want).abs() < 1e-6 * want.abs());
}

#[test]
fn fundamental_solution_inverts_laplacian_of_log() {
    let gamma3 = 2.0 * PI * PI;
    for i in 0..10 {
        let r = 0.1 * 3f64.powi(i) / 3f64.powi(3);
        let x = [r * 0.6, 0.0, r * 0.8];
        let lap = classical_laplacian(&|y: Point3| -norm3(y).ln(), x, 1e-2 * r);
        let phi = fundamental_solution(3, &x).unwrap();
        assert!((lap / gamma3 / phi - 1.0).abs() < 1e-6, "r={r}");
        assert!((phi - 1.0 / (2.0 * PI * PI * r * r)).abs() < 1e-14 * phi);
    }
}

#[test]
fn half_laplacian_of_potential_returns_density() {
    let potential = PointEvaluable::new(|y| bump_potential(y, 1e-13).unwrap(), 2.0, 0.0).with_noise(1e-13);
    for x in [[0.0, 0.0, 0.0], [0.3, 0.2, 0.0], [0.0, -0.5, 0.4]] {
        let got = half_laplacian(&potential, x, 1e-5).unwrap();
        let want = bump(x);
        assert!((got - want).abs() < 5e-2 * want, "{x:?}: {got} vs {want}");
    }
}

#[test]
fn spherical_solution_satisfies_equation_pointwise() {
    for lambda in [0.5, 2.0] {
        let u = move |y: Point3| spherical_solution(lambda, [0.0; 3], y).unwrap();
        let lap = PointEvaluable::laplacian_of(u, 1e-2, 1.0 + lambda.ln().abs(), 2.0);
        for x in [[0.0, 0.0, 0.0], [0.4, 0.0, 0.3]] {
            let rhs = 2.0 * (3.0 * u(x)).exp();
            let lhs = half_laplacian(&lap, x, 1e-4 * rhs).unwrap();
            assert!((lhs / rhs - 1.0).abs() < 1e-2, "lambda={lambda} {x:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn gaussian_weighted_decay_is_bounded() {
    for s in [0.5, 1.5] {
        let g = PointEvaluable::new(gaussian, 10.0, 0.0);
        let report = schwartz_decay_check(g, s, &[5.0, 10.0, 20.0, 40.0], 1e-4).unwrap();
        assert_eq!(report.bounded, Some(true), "s={s}: {report:?}");
    }
}
