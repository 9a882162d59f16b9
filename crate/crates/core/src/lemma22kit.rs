//! The cutoff construction of a logarithmic background profile u₀ with
//! u₀ = log(1/|x|) for |x| ≥ 1 and u₀ = 0 near the origin:
//!
//! ```text
//! v₀(x) = log(1/|x|),   v_j(x) = ∫₀^{x₁} v_{j−1}(t, x̄) dt,
//! u₀ = ∂₁^k(χ v_k) = Σ_{j=0}^{k} C(k,j) (∂₁^j χ) v_j.
//! ```
//!
//! v_j is evaluated through the Cauchy repeated-integral formula
//! v_j(x) = 1/(j−1)! ∫₀^{x₁} (x₁−t)^{j−1} v₀(t, x̄) dt, so each value costs a
//! single 1-D quadrature.

use std::f64::consts::PI;

use serde::Serialize;

use crate::conformal::{norm3, w0, Point3};
use crate::error::{input, Error, Result};
use crate::fraclap::{half_laplacian, PointEvaluable, HALF_LAPLACIAN_CONSTANT};
use crate::quad::{tanh_sinh, GlRule};
use crate::specialfun::{binomial, factorial, gegenbauer_unchecked};

/// Default order k = 2n + 3 for n = 3.
pub const DEFAULT_ORDER: usize = 9;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// Truncated Taylor series in one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet(c)
    }

    /// The identity t ↦ t expanded about `at`.
    pub fn variable(at: f64, order: usize) -> Self {
        let mut j = Self::constant(at, order);
        if order > 0 {
            j.0[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// i-th derivative: i!·c_i
    pub fn derivative(&self, i: usize) -> f64 {
        self.0.get(i).map_or(0.0, |c| c * factorial(i))
    }

    pub fn add(&self, o: &Self) -> Self {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet(self.0.iter().map(|a| a * s).collect())
    }

    pub fn offset(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.0[0] += s;
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.0.len();
        Jet((0..n)
            .map(|k| (0..=k).map(|i| self.0[i] * o.0[k - i]).sum())
            .collect())
    }

    pub fn div(&self, o: &Self) -> Self {
        let n = self.0.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let acc: f64 = (1..=k).map(|i| o.0[i] * q[k - i]).sum();
            q[k] = (self.0[k] - acc) / o.0[0];
        }
        Jet(q)
    }

    pub fn exp(&self) -> Self {
        let n = self.0.len();
        let mut e = vec![0.0; n];
        e[0] = self.0[0].exp();
        for k in 1..n {
            let acc: f64 = (1..=k).map(|i| i as f64 * self.0[i] * e[k - i]).sum();
            e[k] = acc / k as f64;
        }
        Jet(e)
    }

    pub fn sqrt(&self) -> Self {
        let n = self.0.len();
        let mut s = vec![0.0; n];
        s[0] = self.0[0].sqrt();
        for k in 1..n {
            let acc: f64 = (1..k).map(|i| s[i] * s[k - i]).sum();
            s[k] = (self.0[k] - acc) / (2.0 * s[0]);
        }
        Jet(s)
    }
}

/// χ(x) = ζ((|x| − inner)/(outer − inner)), ζ(t) = h(t)/(h(t)+h(1−t)),
/// h(t) = e^{−1/t} for t > 0 and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Default for SmoothCutoff {
    fn default() -> Self {
        Self { inner: 0.5, outer: 1.0 }
    }
}

fn h_jet(t: &Jet) -> Jet {
    // below this, e^{−1/t} and all its Taylor coefficients are negligible
    if t.value() <= 1.0 / 600.0 {
        return Jet::constant(0.0, t.order());
    }
    let order = t.order();
    Jet::constant(-1.0, order).div(t).exp()
}

impl SmoothCutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer) {
            return input(format!("cutoff needs 0 < inner < outer, got {inner}, {outer}"));
        }
        Ok(Self { inner, outer })
    }

    fn zeta(&self, t: &Jet) -> Jet {
        let order = t.order();
        if t.value() <= 0.0 {
            return Jet::constant(0.0, order);
        }
        if t.value() >= 1.0 {
            return Jet::constant(1.0, order);
        }
        let a = h_jet(t);
        let b = h_jet(&t.scale(-1.0).offset(1.0));
        a.div(&a.add(&b))
    }

    /// Taylor jet of χ along the x₁ direction at `x`.
    pub fn jet_along_x1(&self, x: Point3, order: usize) -> Jet {
        let rbar2 = x[1] * x[1] + x[2] * x[2];
        let t = Jet::variable(x[0], order);
        let r2 = t.mul(&t).offset(rbar2);
        let r = if r2.value() > 0.0 {
            r2.sqrt()
        } else {
            // origin: χ vanishes in a neighbourhood anyway
            return Jet::constant(0.0, order);
        };
        let s = r.offset(-self.inner).scale(1.0 / (self.outer - self.inner));
        self.zeta(&s)
    }

    pub fn value(&self, x: Point3) -> f64 {
        self.jet_along_x1(x, 0).value()
    }

    /// ∂₁^i χ(x) for i = 0..=order.
    pub fn x1_derivatives(&self, x: Point3, order: usize) -> Vec<f64> {
        let jet = self.jet_along_x1(x, order);
        (0..=order).map(|i| jet.derivative(i)).collect()
    }
}

/// Evaluators for v₀ … v_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VChain {
    pub k: usize,
    pub quad_tol: f64,
}

impl VChain {
    pub fn new(k: usize, quad_tol: f64) -> Result<Self> {
        if k < 1 {
            return input("the chain order k must be at least 1");
        }
        if !(quad_tol > 0.0) {
            return input(format!("quadrature tolerance must be positive, got {quad_tol}"));
        }
        Ok(Self { k, quad_tol })
    }

    /// v_j(x) for 0 ≤ j ≤ k.
    pub fn v(&self, j: usize, x: Point3) -> Result<f64> {
        if j > self.k {
            return input(format!("v_{j} requested from a chain of order {}", self.k));
        }
        let rbar2 = x[1] * x[1] + x[2] * x[2];
        let v0 = |t: f64| -0.5 * (t * t + rbar2).ln();
        if j == 0 {
            return Ok(v0(x[0]));
        }
        let x1 = x[0];
        if x1 == 0.0 {
            return Ok(0.0);
        }
        let scale = 1.0 / factorial(j - 1);
        let p = (j - 1) as i32;
        let integrand = |t: f64| scale * (x1 - t).powi(p) * v0(t);
        let tol = self.quad_tol * x1.abs().powi(j as i32).max(1e-3);
        tanh_sinh(integrand, 0.0, x1, tol).map_err(|e| match e {
            Error::Numeric { estimate, error_bound, .. } => Error::Numeric {
                what: format!("v_{j} at ({}, {}, {})", x[0], x[1], x[2]),
                estimate,
                error_bound,
            },
            other => other,
        })
    }
}

/// Build a chain of order k.
pub fn build_chain(k: usize, quad_tol: f64) -> Result<VChain> {
    VChain::new(k, quad_tol)
}

/// u₀(x) = Σ_{j=0}^{k} C(k,j) (∂₁^j χ)(x) v_j(x).
pub fn u0_lemma22(chain: &VChain, chi: &SmoothCutoff, x: Point3) -> Result<f64> {
    let dchi = chi.x1_derivatives(x, chain.k);
    let mut total = 0.0;
    for (j, d) in dchi.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        total += binomial(chain.k, j) * d * chain.v(j, x)?;
    }
    Ok(total)
}

/// χ·v_k, whose k-th x₁-derivative is u₀.
pub fn chi_times_vk(chain: &VChain, chi: &SmoothCutoff, x: Point3) -> Result<f64> {
    let c = chi.value(x);
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(c * chain.v(chain.k, x)?)
}

/// Weighted far-field values |(−Δ)^{3/2}u₀(x)|·|x|^p at a list of radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub weight_exponent: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub weighted: Vec<f64>,
    /// weighted[i+1]/weighted[i]
    pub ratios: Vec<f64>,
    /// None when fewer than two radii were given.
    pub bounded: Option<bool>,
    /// The two quadrature resolutions disagreed by more than 10%.
    pub inconclusive: bool,
    /// Largest weighted value, the measured constant.
    pub measured_constant: f64,
}

/// Ratio bound between successive weighted values.
pub const DECAY_RATIO_LIMIT: f64 = 2.0;

pub(crate) fn finish_report(
    weight_exponent: f64,
    radii: &[f64],
    values: Vec<f64>,
    inconclusive: bool,
    ratio_limit: f64,
) -> DecayReport {
    let weighted: Vec<f64> = radii
        .iter()
        .zip(&values)
        .map(|(r, v)| v.abs() * r.powf(weight_exponent))
        .collect();
    let ratios: Vec<f64> = weighted
        .windows(2)
        .map(|w| match (w[0] == 0.0, w[1] == 0.0) {
            (_, true) => 0.0,
            (true, false) => f64::INFINITY,
            _ => w[1] / w[0],
        })
        .collect();
    let bounded = (radii.len() >= 2).then(|| ratios.iter().all(|r| *r <= ratio_limit));
    let measured_constant = weighted.iter().cloned().fold(0.0, f64::max);
    DecayReport {
        weight_exponent,
        radii: radii.to_vec(),
        values,
        weighted,
        ratios,
        bounded,
        inconclusive,
        measured_constant,
    }
}

/// (−Δ)^{3/2}u₀ on the x₁ axis outside the unit ball.
///
/// There u₀ − log(1/|x|) = ∂₁^k G with G = (χ−1)v_k supported in the unit
/// ball, and (−Δ)^{3/2} log(1/|x|) vanishes away from the origin. Moving
/// the Laplacian and the k derivatives onto the kernel |x−y|^{−4} leaves
///
/// (−Δ)^{3/2}u₀(x) = 12 C₃ (−1)^k k! ∫_{B₁} G(y) C³_k(z₁/|z|) |z|^{−6−k} dy,  z = x − y,
///
/// a smooth integral, computed in polar coordinates about the x₁ axis.
pub fn far_field_value(chain: &VChain, chi: &SmoothCutoff, radii: &[f64], nodes: usize) -> Result<Vec<f64>> {
    let k = chain.k;
    let outer = chi.outer;
    let rho_rule = GlRule::new(nodes);
    let theta_rule = GlRule::new(nodes);
    let mut samples = Vec::with_capacity(nodes * nodes);
    for (rho, wr) in rho_rule.mapped(0.0, outer) {
        for (theta, wt) in theta_rule.mapped(0.0, PI) {
            let (st, ct) = theta.sin_cos();
            let y = [rho * ct, rho * st, 0.0];
            let g = (chi.value(y) - 1.0) * chain.v(k, y)?;
            samples.push((y, g * 2.0 * PI * rho * rho * st * wr * wt));
        }
    }
    let pref = 12.0 * HALF_LAPLACIAN_CONSTANT * if k.is_multiple_of(2) { 1.0 } else { -1.0 } * factorial(k);
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        if r <= outer {
            return input(format!("far-field radius must exceed {outer}, got {r}"));
        }
        let mut acc = 0.0;
        for (y, w) in &samples {
            let z = [r - y[0], -y[1], -y[2]];
            let d = norm3(z);
            acc += w * gegenbauer_unchecked(3.0, k, z[0] / d) * d.powi(-(6 + k as i32));
        }
        out.push(pref * acc);
    }
    Ok(out)
}

/// Weighted decay of (−Δ)^{3/2}u₀ with weight |x|^{6+k}, at points r·e₁.
pub fn decay_spotcheck(chain: &VChain, chi: &SmoothCutoff, radii: &[f64]) -> Result<DecayReport> {
    if radii.iter().any(|r| *r < 2.0) {
        return input("decay spot-check radii must be at least 2");
    }
    let coarse = far_field_value(chain, chi, radii, 24)?;
    let fine = far_field_value(chain, chi, radii, 48)?;
    let inconclusive = coarse
        .iter()
        .zip(&fine)
        .any(|(a, b)| (a - b).abs() > 0.1 * b.abs());
    Ok(finish_report(6.0 + chain.k as f64, radii, fine, inconclusive, DECAY_RATIO_LIMIT))
}

/// The same check with u₀ = ½w₀, whose image (−Δ)^{3/2}(½w₀) = e^{3w₀}
/// decays like |x|⁻⁶; evaluated with the singular-integral oracle.
pub fn decay_spotcheck_half_w0(radii: &[f64], tol: f64) -> Result<DecayReport> {
    let lap = PointEvaluable::laplacian_of(|z: Point3| 0.5 * w0(z), 1e-2, 1.0, 2.0);
    let mut values = Vec::with_capacity(radii.len());
    let mut inconclusive = false;
    for &r in radii {
        let x = [r, 0.0, 0.0];
        let scale = r.powi(-6);
        match half_laplacian(&lap, x, tol * scale) {
            Ok(v) => values.push(v),
            Err(Error::Numeric { estimate, .. }) => {
                inconclusive = true;
                values.push(estimate);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(finish_report(6.0, radii, values, inconclusive, DECAY_RATIO_LIMIT))
}
