#![allow(clippy::excessive_precision)]

use qflow_core::conformal::Point3;
use qflow_core::lemma22kit::*;
use qflow_core::quad::GlRule;

/// ∂₁⁹(χ v₉) from 40-digit finite differences (oracles/lemma22_fd.py).
const FROZEN_K9: [([f64; 3], f64); 20] = include!("oracles/lemma22_k9.in");

#[test]
fn leibniz_form_matches_frozen_high_precision_differences() {
    let chain = build_chain(9, 1e-12).unwrap();
    let chi = SmoothCutoff::default();
    for (x, want) in FROZEN_K9 {
        let got = u0_lemma22(&chain, &chi, x).unwrap();
        let rel = (got - want).abs() / want.abs().max(1.0);
        assert!(rel < 1e-3, "{x:?}: {got} vs {want}");
    }
}

fn richardson_derivative(f: impl Fn(f64) -> f64, at: f64, order: usize, h: f64) -> f64 {
    let central = |step: f64| {
        let mut s = 0.0;
        for j in 0..=order {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let coef = qflow_core::specialfun::binomial(order, j);
            s += sign * coef * f(at + (order as f64 / 2.0 - j as f64) * step);
        }
        s / step.powi(order as i32)
    };
    let a: Vec<f64> = (0..3).map(|i| central(h / 2f64.powi(i))).collect();
    let b = [(4.0 * a[1] - a[0]) / 3.0, (4.0 * a[2] - a[1]) / 3.0];
    (16.0 * b[1] - b[0]) / 15.0
}

#[test]
fn low_order_leibniz_form_matches_live_differences() {
    let chi = SmoothCutoff::default();
    for k in [1, 2, 3] {
        let chain = build_chain(k, 1e-13).unwrap();
        for (x, _) in FROZEN_K9.iter().step_by(3) {
            let f = |t: f64| chi_times_vk(&chain, &chi, [t, x[1], x[2]]).unwrap();
            let fd = richardson_derivative(f, x[0], k, 1e-2);
            let got = u0_lemma22(&chain, &chi, *x).unwrap();
            assert!((got - fd).abs() < 1e-4 * got.abs().max(1.0), "k={k} {x:?}: {got} vs {fd}");
        }
    }
}

#[test]
fn plateaus() {
    let chain = build_chain(DEFAULT_ORDER, DEFAULT_QUAD_TOL).unwrap();
    let chi = SmoothCutoff::default();
    let dirs: [Point3; 4] = [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [-0.48, 0.6, 0.64], [0.0, 0.0, -1.0]];
    for d in dirs {
        for r in [0.0, 0.1, 0.3, 0.49] {
            let x = [r * d[0], r * d[1], r * d[2]];
            assert_eq!(u0_lemma22(&chain, &chi, x).unwrap(), 0.0);
        }
        for r in [1.0, 1.5, 4.0, 100.0] {
            let x = [r * d[0], r * d[1], r * d[2]];
            let got = u0_lemma22(&chain, &chi, x).unwrap();
            assert!((got + r.ln()).abs() < 1e-12, "r={r}: {got}");
        }
    }
}

#[test]
fn first_antiderivative_in_closed_form() {
    let chain = build_chain(3, 1e-13).unwrap();
    for x in [[0.7f64, 0.2, 0.1], [-0.4, 0.3, 0.0], [2.0, 0.0, 1.0], [0.5, 0.0, 0.0]] {
        let b = (x[1] * x[1] + x[2] * x[2]).sqrt();
        let atan = if b > 0.0 { b * (x[0] / b).atan() } else { 0.0 };
        let want = -0.5 * x[0] * (x[0] * x[0] + b * b).ln() + x[0] - atan;
        assert!((chain.v(1, x).unwrap() - want).abs() < 1e-11);
    }
}

#[test]
fn parity_in_first_coordinate() {
    let chain = build_chain(6, 1e-13).unwrap();
    for x in [[0.7, 0.2, 0.1], [0.3, 0.5, -0.2], [1.3, 0.1, 0.9]] {
        let m = [-x[0], x[1], x[2]];
        for j in 0..=6 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let (a, b) = (chain.v(j, x).unwrap(), chain.v(j, m).unwrap());
            assert!((a - sign * b).abs() < 1e-11 * a.abs().max(1.0), "j={j}");
        }
    }
}

#[test]
fn cauchy_formula_matches_nested_integrals() {
    let chain = build_chain(3, 1e-13).unwrap();
    let gl = GlRule::new(40);
    let x = [0.8, 0.3, 0.2];
    let rb2 = x[1] * x[1] + x[2] * x[2];
    let v0 = |t: f64| -0.5 * (t * t + rb2).ln();
    let v1 = |s: f64| gl.integrate(0.0, s, v0);
    let v2 = |s: f64| gl.integrate(0.0, s, v1);
    let v3 = gl.integrate(0.0, x[0], v2);
    assert!((chain.v(1, x).unwrap() - v1(x[0])).abs() < 1e-12);
    assert!((chain.v(2, x).unwrap() - v2(x[0])).abs() < 1e-12);
    assert!((chain.v(3, x).unwrap() - v3).abs() < 1e-12);
}

#[test]
fn jets_match_known_series() {
    let t = Jet::variable(0.3, 6);
    let e = t.exp();
    for i in 0..=6 {
        assert!((e.derivative(i) - 0.3f64.exp()).abs() < 1e-13);
    }
    let s = t.sqrt();
    assert!((s.derivative(2) + 0.25 * 0.3f64.powf(-1.5)).abs() < 1e-12);
    let q = Jet::constant(1.0, 6).div(&t);
    assert!((q.derivative(3) + 6.0 / 0.3f64.powi(4)).abs() < 1e-9);
}

#[test]
fn cutoff_derivatives_match_differences() {
    let chi = SmoothCutoff::default();
    let x = [0.55, 0.2, 0.3];
    let d = chi.x1_derivatives(x, 2);
    let f = |t: f64| chi.value([t, x[1], x[2]]);
    let h = 1e-4;
    assert!((d[1] - (f(x[0] + h) - f(x[0] - h)) / (2.0 * h)).abs() < 1e-6);
    assert!((d[2] - (f(x[0] + h) - 2.0 * f(x[0]) + f(x[0] - h)) / (h * h)).abs() < 1e-4);
}

#[test]
fn far_field_of_half_w0_has_tail_weight_bounded() {
    let report = decay_spotcheck_half_w0(&[2.0, 4.0, 8.0], 1e-6).unwrap();
    assert_eq!(report.bounded, Some(true), "{report:?}");
}

#[test]
fn far_field_of_lemma_profile_decays() {
    let chain = build_chain(DEFAULT_ORDER, DEFAULT_QUAD_TOL).unwrap();
    let report = decay_spotcheck(&chain, &SmoothCutoff::default(), &[2.0, 4.0, 8.0, 16.0]).unwrap();
    assert!(!report.inconclusive, "{report:?}");
    assert_eq!(report.bounded, Some(true), "{report:?}");
}
