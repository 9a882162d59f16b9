//! Problem data: the polynomial P, the curvature sign and volume, the
//! background profile u₀, and the sphere-side fields the energy needs.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::conformal::{angles_to_euclidean, w0, w0_at_angle, Point3};
use crate::error::{input, Error, Result};
use crate::lemma22kit::{self, SmoothCutoff, VChain};
use crate::s3harmonics::{HarmonicCoeffs, SphereGrid};
use crate::specialfun::{factorial, Constants};

/// Polynomial on ℝ³ stored as exponent triple → coefficient.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PolynomialR3 {
    monomials: BTreeMap<[u32; 3], f64>,
}

impl PolynomialR3 {
    pub fn new() -> Self {
        Self::default()
    }

    /// |x|²
    pub fn squared_norm() -> Self {
        let mut p = Self::new();
        p.add_term([2, 0, 0], 1.0);
        p.add_term([0, 2, 0], 1.0);
        p.add_term([0, 0, 2], 1.0);
        p
    }

    pub fn add_term(&mut self, exponents: [u32; 3], coeff: f64) {
        let e = self.monomials.entry(exponents).or_insert(0.0);
        *e += coeff;
        if *e == 0.0 {
            self.monomials.remove(&exponents);
        }
    }

    /// Parses `a b c coeff` records separated by newlines or semicolons.
    /// Blank records and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Self::new();
        for (i, rec) in text.split(['\n', ';']).enumerate() {
            let rec = rec.split('#').next().unwrap_or("").trim();
            if rec.is_empty() {
                continue;
            }
            let parts: Vec<&str> = rec.split_whitespace().collect();
            if parts.len() != 4 {
                return input(format!(
                    "polynomial record {}: expected `a b c coeff`, got `{rec}`",
                    i + 1
                ));
            }
            let mut e = [0u32; 3];
            for (slot, s) in e.iter_mut().zip(&parts[..3]) {
                *slot = s.parse().map_err(|_| {
                    Error::Input(format!("polynomial record {}: bad exponent `{s}`", i + 1))
                })?;
            }
            let c: f64 = parts[3].parse().map_err(|_| {
                Error::Input(format!("polynomial record {}: bad coefficient `{}`", i + 1, parts[3]))
            })?;
            if !c.is_finite() {
                return input(format!("polynomial record {}: coefficient is not finite", i + 1));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn degree(&self) -> u32 {
        self.monomials.keys().map(|e| e[0] + e[1] + e[2]).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &f64)> {
        self.monomials.iter()
    }

    pub fn coefficient(&self, exponents: [u32; 3]) -> f64 {
        self.monomials.get(&exponents).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: Point3) -> f64 {
        self.monomials
            .iter()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    /// Symmetric matrix A of the degree-2 part, x·Ax.
    pub fn quadratic_form(&self) -> Matrix3<f64> {
        let mut a = Matrix3::zeros();
        for (e, c) in &self.monomials {
            if e[0] + e[1] + e[2] != 2 {
                continue;
            }
            let idx: Vec<usize> = (0..3).flat_map(|i| std::iter::repeat_n(i, e[i] as usize)).collect();
            let (i, j) = (idx[0], idx[1]);
            if i == j {
                a[(i, i)] += c;
            } else {
                a[(i, j)] += 0.5 * c;
                a[(j, i)] += 0.5 * c;
            }
        }
        a
    }

    /// Some(b) when P = const + b|x|².
    pub fn radial_coefficient(&self) -> Option<f64> {
        let b = self.coefficient([2, 0, 0]);
        for (e, c) in &self.monomials {
            let ok = match e {
                [0, 0, 0] => true,
                [2, 0, 0] | [0, 2, 0] | [0, 0, 2] => *c == b,
                _ => false,
            };
            if !ok {
                return None;
            }
        }
        (self.coefficient([0, 2, 0]) == b && self.coefficient([0, 0, 2]) == b).then_some(b)
    }

    pub fn is_radial(&self) -> bool {
        self.radial_coefficient().is_some()
    }

    /// One `a b c coeff` line per term.
    pub fn to_text(&self) -> String {
        self.monomials
            .iter()
            .map(|(e, c)| format!("{} {} {} {c}\n", e[0], e[1], e[2]))
            .collect()
    }
}

impl From<PolynomialR3> for String {
    fn from(p: PolynomialR3) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PolynomialR3 {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Self::parse(&s)
    }
}

impl fmt::Display for PolynomialR3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let recs: Vec<String> = self
            .monomials
            .iter()
            .map(|(e, c)| format!("{} {} {} {c}", e[0], e[1], e[2]))
            .collect();
        write!(f, "{}", recs.join("; "))
    }
}

/// Outcome of the coercivity certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialValidity {
    pub degree: u32,
    /// Eigenvalues of the leading quadratic form, ascending.
    pub leading_eigenvalues: [f64; 3],
    /// min P over sampled directions at radius `sample_radius`.
    pub min_sampled_value: f64,
    pub sample_radius: f64,
    pub radial: bool,
}

pub const COERCIVITY_SAMPLE_RADIUS: f64 = 1e3;
pub const COERCIVITY_SAMPLES: usize = 10_000;

/// Points on the unit sphere from a Fibonacci lattice.
pub fn fibonacci_directions(count: usize) -> Vec<Point3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Certifies P(x) → ∞ by positive definiteness of the leading form.
pub fn validate_p(p: &PolynomialR3, n: usize) -> Result<PolynomialValidity> {
    if n != 3 {
        return input(format!("polynomials are defined on R^3, so n must be 3, got {n}"));
    }
    let degree = p.degree();
    if degree as usize > n - 1 {
        return input(format!("P has degree {degree}, at most {} is allowed", n - 1));
    }
    if degree < 2 {
        return Err(Error::Hypothesis(format!(
            "P has degree {degree}; a polynomial of degree below 2 does not tend to infinity in every direction"
        )));
    }
    let eig = SymmetricEigen::new(p.quadratic_form());
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = [eig.eigenvalues[order[0]], eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]];
    if values[0] <= 0.0 {
        let v = eig.eigenvectors.column(order[0]);
        return Err(Error::Hypothesis(format!(
            "leading form of P is not positive definite: eigenvalue {:.6e} along direction ({:.4}, {:.4}, {:.4})",
            values[0], v[0], v[1], v[2]
        )));
    }
    let r = COERCIVITY_SAMPLE_RADIUS;
    let min_sampled_value = fibonacci_directions(COERCIVITY_SAMPLES)
        .into_iter()
        .map(|d| p.eval([r * d[0], r * d[1], r * d[2]]))
        .fold(f64::INFINITY, f64::min);
    Ok(PolynomialValidity {
        degree,
        leading_eigenvalues: values,
        min_sampled_value,
        sample_radius: r,
        radial: p.is_radial(),
    })
}

/// Sign of the prescribed curvature Q = sign·(n−1)!.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum CurvatureSign {
    Positive,
    Negative,
}

impl CurvatureSign {
    pub fn value(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }
}

impl From<CurvatureSign> for i8 {
    fn from(s: CurvatureSign) -> i8 {
        s.value() as i8
    }
}

impl TryFrom<i8> for CurvatureSign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Self::Positive),
            -1 => Ok(Self::Negative),
            other => Err(format!("sign must be 1 or -1, got {other}")),
        }
    }
}

/// α = ±2V/|Sⁿ|.
pub fn alpha_of(volume: f64, sign: CurvatureSign, n: usize) -> Result<f64> {
    let c = Constants::new(n)?;
    if !(volume > 0.0) || !volume.is_finite() {
        return input(format!("volume must be positive and finite, got {volume}"));
    }
    match sign {
        CurvatureSign::Positive => {
            if volume >= c.sphere_area {
                return input(format!(
                    "for positive curvature the volume must lie in (0, |S^n|) = (0, {}), got {volume}",
                    c.sphere_area
                ));
            }
            Ok(2.0 * volume / c.sphere_area)
        }
        CurvatureSign::Negative => Ok(-2.0 * volume / c.sphere_area),
    }
}

/// Background profile u₀ with u₀ ~ log(1/|x|) at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum U0Provider {
    /// u₀ = ½w₀
    #[default]
    HalfW0,
    /// Cutoff construction of order k.
    Lemma22 { k: usize, quad_tol: f64 },
}

impl U0Provider {
    pub fn lemma22_default() -> Self {
        Self::Lemma22 {
            k: lemma22kit::DEFAULT_ORDER,
            quad_tol: lemma22kit::DEFAULT_QUAD_TOL,
        }
    }
}

/// u₀(x) for the given provider.
pub fn u0_eval(p: &U0Provider, x: Point3) -> Result<f64> {
    match *p {
        U0Provider::HalfW0 => Ok(0.5 * w0(x)),
        U0Provider::Lemma22 { k, quad_tol } => {
            let chain = VChain::new(k, quad_tol)?;
            lemma22kit::u0_lemma22(&chain, &SmoothCutoff::default(), x)
        }
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub n: usize,
    pub sign: CurvatureSign,
    pub volume: f64,
    pub polynomial: PolynomialR3,
    pub u0: U0Provider,
    pub alpha: f64,
    pub degree: usize,
    pub zonal: bool,
    pub validity: PolynomialValidity,
}

impl ProblemSpec {
    /// `zonal = None` selects the zonal path exactly when P is radial.
    pub fn new(
        n: usize,
        sign: CurvatureSign,
        volume: f64,
        polynomial: PolynomialR3,
        u0: U0Provider,
        degree: usize,
        zonal: Option<bool>,
    ) -> Result<Self> {
        if n != 3 {
            return input(format!("the sphere transforms require n = 3, got {n}"));
        }
        let alpha = alpha_of(volume, sign, n)?;
        let validity = validate_p(&polynomial, n)?;
        let zonal = match zonal {
            Some(true) if !validity.radial => {
                return input("zonal transforms need a radial P (constant plus b|x|^2)");
            }
            Some(z) => z,
            None => validity.radial,
        };
        Ok(Self {
            n,
            sign,
            volume,
            polynomial,
            u0,
            alpha,
            degree,
            zonal,
            validity,
        })
    }

    pub fn constants(&self) -> Constants {
        Constants::new(self.n).expect("validated dimension")
    }

    /// (2−α)/4
    pub fn coercivity_margin(&self) -> f64 {
        (2.0 - self.alpha) / 4.0
    }

    /// log|K̃|e^{−nw₀∘π} at a point of ℝ³ given w₀ there:
    /// log((n−1)!) − nP + n(α/2 − 1)w₀.
    pub fn log_weight(&self, x: Point3, w0_value: f64) -> f64 {
        let n = self.n as f64;
        factorial(self.n - 1).ln() - n * self.polynomial.eval(x) + n * (0.5 * self.alpha - 1.0) * w0_value
    }

    /// K(x) = sign(α)(n−1)! e^{−nP + nαu₀}
    pub fn curvature_weight(&self, x: Point3) -> Result<f64> {
        let n = self.n as f64;
        let u0 = u0_eval(&self.u0, x)?;
        Ok(self.alpha.signum() * factorial(self.n - 1) * (-n * self.polynomial.eval(x) + n * self.alpha * u0).exp())
    }
}

/// Hypothesis diagnostics gathered at assembly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldDiagnostics {
    /// αK > 0 at every sampled point.
    pub alpha_k_positive: bool,
    /// Largest weighted value on the ring of nodes closest to N.
    pub max_weight_near_north: f64,
    /// Lower bound from Jensen's inequality:
    /// log ∫|K̃|e^{−nw₀∘π}dV₀ ≥ log|Sⁿ| + mean of the log-weight.
    pub jensen_log_mass_bound: f64,
    /// For α < 0: whether some δ satisfies |K| > δe^{−δ|x|^p} on the radius
    /// sweep {1, 10, 10², 10³}, with p = deg P. None for α > 0.
    pub lower_bound_delta: Option<Option<f64>>,
}

/// Sphere-side data of a problem on one grid.
#[derive(Debug, Clone)]
pub struct SphereFields {
    /// log(|K̃|e^{−nw₀∘π}) at each node.
    pub log_weight: Vec<f64>,
    /// |K̃|e^{−nw₀∘π}, 0 where the exponent underflows.
    pub weight: Vec<f64>,
    /// φ̃₁ at each node.
    pub phi1: Vec<f64>,
    /// Harmonic coefficients of φ̃₁.
    pub phi1_coeffs: HarmonicCoeffs,
    /// ∫ φ̃₁ dV₀, which should equal γₙ.
    pub phi1_integral: f64,
    pub diagnostics: FieldDiagnostics,
}

/// Evaluates the weighted curvature and the φ̃₁ field on the grid.
pub fn assemble_sphere_fields(spec: &ProblemSpec, grid: &SphereGrid) -> Result<SphereFields> {
    if spec.u0 != U0Provider::HalfW0 {
        return input("only the half_w0 profile can be assembled on the sphere");
    }
    if grid.is_zonal() && !spec.polynomial.is_radial() {
        return input("a zonal grid needs a radial P");
    }
    let nodes = grid.nodes();
    let mut log_weight = Vec::with_capacity(nodes.len());
    for (i, p) in nodes.iter().enumerate() {
        let x = angles_to_euclidean(*p)?;
        let lw = spec.log_weight(x, w0_at_angle(p.psi));
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::Assembly { node: i, value: lw });
        }
        log_weight.push(lw);
    }
    let underflow = f64::MIN_POSITIVE.ln();
    let weight: Vec<f64> = log_weight
        .iter()
        .map(|&lw| if lw < underflow { 0.0 } else { lw.exp() })
        .collect();
    let c = spec.constants();
    let phi1_value = factorial(spec.n - 1) / 2.0;
    let phi1 = vec![phi1_value; nodes.len()];
    let phi1_integral = grid.integrate(&phi1);
    let phi1_coeffs = grid.analyze(&phi1, grid.degree())?;

    let n_ring = grid.n_theta() * grid.n_phi();
    let max_weight_near_north = weight[..n_ring].iter().cloned().fold(0.0, f64::max);
    let mean_log = grid.integrate(&log_weight) / c.sphere_area;
    let jensen_log_mass_bound = c.sphere_area.ln() + mean_log;

    let mut alpha_k_positive = true;
    for d in crate::problem::fibonacci_directions(64) {
        for r in [0.0, 0.5, 1.0, 3.0, 10.0] {
            let k = spec.curvature_weight([r * d[0], r * d[1], r * d[2]])?;
            if !(spec.alpha * k > 0.0) && k != 0.0 {
                alpha_k_positive = false;
            }
        }
    }
    let lower_bound_delta = (spec.alpha < 0.0).then(|| lower_bound_delta(spec));

    Ok(SphereFields {
        log_weight,
        weight,
        phi1,
        phi1_coeffs,
        phi1_integral,
        diagnostics: FieldDiagnostics {
            alpha_k_positive,
            max_weight_near_north,
            jensen_log_mass_bound,
            lower_bound_delta,
        },
    })
}

/// Searches δ on a log grid for log|K(x)| > log δ − δ|x|^p over sampled
/// directions at |x| ∈ {1, 10, 10², 10³}; returns the first δ that works.
fn lower_bound_delta(spec: &ProblemSpec) -> Option<f64> {
    let p = spec.polynomial.degree() as i32;
    let n = spec.n as f64;
    let dirs = fibonacci_directions(200);
    let mut samples = Vec::new();
    for r in [1.0f64, 10.0, 100.0, 1000.0] {
        for d in &dirs {
            let x = [r * d[0], r * d[1], r * d[2]];
            let log_k = factorial(spec.n - 1).ln() - n * spec.polynomial.eval(x) + n * spec.alpha * 0.5 * w0(x);
            samples.push((r.powi(p), log_k));
        }
    }
    (0..=120)
        .map(|i| 10f64.powf(-6.0 + 0.075 * i as f64))
        .find(|&delta| samples.iter().all(|&(rp, lk)| lk > delta.ln() - delta * rp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parse_and_eval() {
        let p = PolynomialR3::parse("2 0 0 1.0\n0 2 0 1; 0 0 2 1 # norm\n\n").unwrap();
        assert_eq!(p, PolynomialR3::squared_norm());
        assert_eq!(p.degree(), 2);
        assert!((p.eval([1.0, 2.0, 3.0]) - 14.0).abs() < 1e-15);
        assert!(p.is_radial());
        assert_eq!(PolynomialR3::parse(&p.to_text()).unwrap(), p);
        assert!(PolynomialR3::parse("2 0 1.0").is_err());
        assert!(PolynomialR3::parse("a 0 0 1.0").is_err());
    }

    #[test]
    fn coercivity_examples() {
        let v = validate_p(&PolynomialR3::squared_norm(), 3).unwrap();
        for e in v.leading_eigenvalues {
            assert!((e - 1.0).abs() < 1e-14);
        }
        let bad = PolynomialR3::parse("2 0 0 1; 0 2 0 -1").unwrap();
        assert!(matches!(validate_p(&bad, 3), Err(Error::Hypothesis(_))));
        let good = PolynomialR3::parse("2 0 0 1; 0 2 0 2; 0 0 2 3; 1 0 0 1").unwrap();
        let v = validate_p(&good, 3).unwrap();
        assert!((v.leading_eigenvalues[2] - 3.0).abs() < 1e-13);
        assert!(!v.radial);
        assert!(validate_p(&PolynomialR3::parse("3 0 0 1").unwrap(), 3).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha_of(PI * PI, CurvatureSign::Positive, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((alpha_of(2.0 * PI * PI, CurvatureSign::Negative, 3).unwrap() + 2.0).abs() < 1e-15);
        assert!(alpha_of(2.0 * PI * PI, CurvatureSign::Positive, 3).is_err());
    }

    #[test]
    fn u0_examples() {
        assert!((u0_eval(&U0Provider::HalfW0, [0.0; 3]).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-16);
        let l = U0Provider::lemma22_default();
        assert!((u0_eval(&l, [0.0, 2.0, 0.0]).unwrap() - 0.5f64.ln()).abs() < 1e-14);
        assert_eq!(u0_eval(&l, [0.4, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(u0_eval(&l, [0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn weight_at_origin() {
        let spec = ProblemSpec::new(
            3,
            CurvatureSign::Positive,
            PI * PI,
            PolynomialR3::squared_norm(),
            U0Provider::HalfW0,
            8,
            None,
        )
        .unwrap();
        assert!(spec.zonal);
        let v = spec.log_weight([0.0; 3], 2f64.ln()).exp();
        assert!((v - 2.0 * 2f64.powf(-1.5)).abs() < 1e-15);
    }
}
