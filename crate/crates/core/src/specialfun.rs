//! Scalar kernels: Gegenbauer and associated Legendre polynomials, and the
//! geometric constants |Sⁿ| and γₙ = (n−1)!/2 · |Sⁿ|.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{input, Result};

/// Geometric constants of the round sphere Sⁿ for odd n ≥ 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub n: usize,
    /// |Sⁿ| = 2π^{(n+1)/2} / Γ((n+1)/2)
    pub sphere_area: f64,
    /// γₙ = (n−1)!/2 · |Sⁿ|
    pub gamma_n: f64,
}

impl Constants {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return input(format!("dimension must be odd and at least 3, got {n}"));
        }
        // |Sⁿ| = 2π^{(n+1)/2}/((n−1)/2)! for odd n
        let sphere_area = 2.0 * PI.powi((n as i32 + 1) / 2) / factorial((n - 1) / 2);
        let gamma_n = factorial(n - 1) / 2.0 * sphere_area;
        Ok(Self {
            n,
            sphere_area,
            gamma_n,
        })
    }

    /// n!
    pub fn n_factorial(&self) -> f64 {
        factorial(self.n)
    }
}

/// Shorthand for [`Constants::new`].
pub fn constants(n: usize) -> Result<Constants> {
    Constants::new(n)
}

/// k! through the log-gamma function, rounded when exactly representable.
pub fn factorial(k: usize) -> f64 {
    let v = ln_gamma(k as f64 + 1.0).exp();
    if v < 9.0e15 {
        v.round()
    } else {
        v
    }
}

/// Binomial coefficient C(k, i) as a float.
pub fn binomial(k: usize, i: usize) -> f64 {
    if i > k {
        return 0.0;
    }
    let i = i.min(k - i);
    (0..i).fold(1.0, |acc, j| acc * (k - j) as f64 / (j + 1) as f64)
}

/// Gegenbauer polynomial C_d^α(x) by the upward three-term recurrence.
pub fn gegenbauer(alpha: f64, degree: usize, x: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return input(format!("gegenbauer: alpha must be positive, got {alpha}"));
    }
    if !(x.abs() <= 1.0) {
        return input(format!("gegenbauer: x must lie in [-1, 1], got {x}"));
    }
    Ok(gegenbauer_unchecked(alpha, degree, x))
}

pub(crate) fn gegenbauer_unchecked(alpha: f64, degree: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if degree == 0 {
        return prev;
    }
    let mut cur = 2.0 * alpha * x;
    for d in 2..=degree {
        let d_f = d as f64;
        let next = (2.0 * x * (d_f + alpha - 1.0) * cur - (d_f + 2.0 * alpha - 2.0) * prev) / d_f;
        prev = cur;
        cur = next;
    }
    cur
}

/// C_d^α(x) / C_d^α(1) for d = 0..=degree.
///
/// The ratio stays in [−1, 1] for α > 0, so this form does not overflow at
/// high degree the way the raw recurrence does.
pub(crate) fn gegenbauer_scaled_all(alpha: f64, degree: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if degree == 0 {
        return;
    }
    out.push(x);
    for d in 2..=degree {
        let d_f = d as f64;
        let next = (2.0 * x * (d_f + alpha - 1.0) * out[d - 1] - (d_f - 1.0) * out[d - 2])
            / (d_f + 2.0 * alpha - 1.0);
        out.push(next);
    }
}

/// Unnormalized associated Legendre function P_l^m(x), Condon–Shortley phase
/// included, by the recurrence in l at fixed m.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> Result<f64> {
    if m > l {
        return input(format!("assoc_legendre: need m <= l, got l={l}, m={m}"));
    }
    if !(x.abs() <= 1.0) {
        return input(format!("assoc_legendre: x must lie in [-1, 1], got {x}"));
    }
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return Ok(pmm);
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let pll = (x * (2 * ll - 1) as f64 * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    Ok(pmmp1)
}

/// Orthonormal associated Legendre values P̄_k^m(t), k = m..=degree, with
/// ∫_{−1}^{1} P̄² dt = 1 (no Condon–Shortley phase).
pub(crate) fn legendre_normalized_column(m: usize, degree: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    let s = ((1.0 - t) * (1.0 + t)).sqrt();
    // P̄_m^m = sqrt((2m+1)!!/(2 (2m)!!)) s^m, built as a running product
    let mut pmm = (0.5f64).sqrt();
    for j in 1..=m {
        let jf = j as f64;
        pmm *= ((2.0 * jf + 1.0) / (2.0 * jf)).sqrt() * s;
    }
    out.push(pmm);
    if degree == m {
        return;
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = (2.0 * mf + 3.0).sqrt() * t * pmm;
    out.push(cur);
    for k in (m + 2)..=degree {
        let kf = k as f64;
        let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
        let b = (((kf - 1.0) * (kf - 1.0) - mf * mf) / (4.0 * (kf - 1.0) * (kf - 1.0) - 1.0)).sqrt();
        let next = a * (t * cur - b * prev);
        prev = cur;
        cur = next;
        out.push(cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gegenbauer_low_degrees() {
        assert_eq!(gegenbauer(1.0, 0, 0.3).unwrap(), 1.0);
        assert!((gegenbauer(1.0, 2, 1.0).unwrap() - 3.0).abs() < 1e-15);
        let psi = PI / 5.0;
        let expect = (4.0 * psi).sin() / psi.sin();
        assert!((gegenbauer(1.0, 3, psi.cos()).unwrap() - expect).abs() < 1e-14);
        assert!((gegenbauer(2.5, 1, 0.4).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gegenbauer_rejects_domain() {
        assert!(gegenbauer(0.0, 2, 0.1).is_err());
        assert!(gegenbauer(1.0, 2, 1.5).is_err());
    }

    #[test]
    fn gegenbauer_endpoints_to_high_degree() {
        for d in 0..=200usize {
            let expect = (d + 1) as f64;
            let at_one = gegenbauer(1.0, d, 1.0).unwrap();
            let at_minus = gegenbauer(1.0, d, -1.0).unwrap();
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            assert!((at_one - expect).abs() <= 1e-12 * expect);
            assert!((at_minus - sign * expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn scaled_gegenbauer_matches_raw_ratio() {
        let mut buf = Vec::new();
        for &alpha in &[1.0, 2.0, 4.5] {
            gegenbauer_scaled_all(alpha, 12, 0.37, &mut buf);
            for (d, v) in buf.iter().enumerate() {
                let raw = gegenbauer_unchecked(alpha, d, 0.37) / gegenbauer_unchecked(alpha, d, 1.0);
                assert!((v - raw).abs() < 1e-13, "alpha={alpha} d={d}");
            }
        }
    }

    #[test]
    fn assoc_legendre_examples() {
        assert_eq!(assoc_legendre(0, 0, 0.7).unwrap(), 1.0);
        assert_eq!(assoc_legendre(1, 0, 0.5).unwrap(), 0.5);
        assert_eq!(assoc_legendre(2, 1, 0.0).unwrap(), 0.0);
        assert!(assoc_legendre(1, 2, 0.0).is_err());
    }

    #[test]
    fn assoc_legendre_closed_forms_up_to_four() {
        let table: [(usize, usize, fn(f64) -> f64); 15] = [
            (0, 0, |_| 1.0),
            (1, 0, |x| x),
            (1, 1, |x| -(1.0 - x * x).sqrt()),
            (2, 0, |x| 0.5 * (3.0 * x * x - 1.0)),
            (2, 1, |x| -3.0 * x * (1.0 - x * x).sqrt()),
            (2, 2, |x| 3.0 * (1.0 - x * x)),
            (3, 0, |x| 0.5 * (5.0 * x.powi(3) - 3.0 * x)),
            (3, 1, |x| -1.5 * (5.0 * x * x - 1.0) * (1.0 - x * x).sqrt()),
            (3, 2, |x| 15.0 * x * (1.0 - x * x)),
            (3, 3, |x| -15.0 * (1.0 - x * x).powf(1.5)),
            (4, 0, |x| (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0),
            (4, 1, |x| -2.5 * (7.0 * x.powi(3) - 3.0 * x) * (1.0 - x * x).sqrt()),
            (4, 2, |x| 7.5 * (7.0 * x * x - 1.0) * (1.0 - x * x)),
            (4, 3, |x| -105.0 * x * (1.0 - x * x).powf(1.5)),
            (4, 4, |x| 105.0 * (1.0 - x * x).powi(2)),
        ];
        for &(l, m, f) in &table {
            for &x in &[-0.9, -0.31, 0.0, 0.25, 0.6, 1.0] {
                let got = assoc_legendre(l, m, x).unwrap();
                let want = f(x);
                assert!(
                    (got - want).abs() <= 1e-14 * want.abs().max(1.0),
                    "P_{l}^{m}({x}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn constants_for_three_and_five() {
        let c3 = constants(3).unwrap();
        let area3 = 2.0 * PI * PI;
        assert!((c3.sphere_area - area3).abs() < 1e-13 * area3);
        assert!((c3.gamma_n - area3).abs() < 1e-13 * area3);
        let c5 = constants(5).unwrap();
        assert!((c5.sphere_area - PI.powi(3)).abs() < 1e-13 * PI.powi(3));
        assert!((c5.gamma_n - 12.0 * PI.powi(3)).abs() < 1e-12 * PI.powi(3));
        assert!(constants(4).is_err());
        assert!(constants(1).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(9, 0), 1.0);
        assert_eq!(binomial(9, 4), 126.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(factorial(6), 720.0);
    }
}
