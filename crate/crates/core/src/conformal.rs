//! Stereographic transport between ℝ³ and S³.
//!
//! π(ξ) = ξ′/(1−ξ₄) sends S³∖{N} to ℝ³ and π⁻¹(0) is the south pole. The
//! conformal factor is w₀ = log(2/(1+|x|²)); on the sphere it equals
//! log(1−ξ₄) = log(2 sin²(ψ/2)), and the sphere-side form is always used.

use std::f64::consts::PI;

use crate::error::{input, Error, Result};
use crate::paneitz::MultiplierTable;
use crate::s3harmonics::{HarmonicBasis, HarmonicCoeffs, SphereGrid, SpherePoint};

/// Distance from N below which a point counts as the pole.
pub const POLE_TOLERANCE: f64 = 1e-14;

pub type Point3 = [f64; 3];
pub type Point4 = [f64; 4];

pub fn norm3(x: Point3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// A point of ℝ³ together with its image on S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoPoint {
    pub x: Point3,
    pub xi: Point4,
}

impl StereoPoint {
    pub fn from_euclidean(x: Point3) -> Self {
        Self { x, xi: stereo_inv(x) }
    }

    pub fn from_sphere(xi: Point4) -> Result<Self> {
        Ok(Self { x: stereo(xi)?, xi })
    }
}

/// w₀ evaluated on both sides of the projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalFactor {
    pub w0_at_x: f64,
    pub w0_on_sphere: f64,
}

impl ConformalFactor {
    pub fn at(p: &StereoPoint) -> Self {
        Self {
            w0_at_x: w0(p.x),
            w0_on_sphere: w0_on_sphere(p.xi),
        }
    }
}

/// π(ξ) = ξ′/(1−ξ₄)
pub fn stereo(xi: Point4) -> Result<Point3> {
    let rho2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    // 1 − ξ₄ without cancellation in the northern hemisphere
    let denom = if xi[3] > 0.0 { rho2 / (1.0 + xi[3]) } else { 1.0 - xi[3] };
    let dist_to_pole = (rho2 + (1.0 - xi[3]).powi(2)).sqrt();
    if dist_to_pole < POLE_TOLERANCE || denom <= 0.0 {
        return Err(Error::Pole);
    }
    Ok([xi[0] / denom, xi[1] / denom, xi[2] / denom])
}

/// π⁻¹(x) = (2x/(1+|x|²), (|x|²−1)/(1+|x|²))
pub fn stereo_inv(x: Point3) -> Point4 {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let d = 1.0 + r2;
    [2.0 * x[0] / d, 2.0 * x[1] / d, 2.0 * x[2] / d, (r2 - 1.0) / d]
}

/// Polar angles of π⁻¹(x); ψ = 2·atan2(1, |x|) keeps full accuracy near N.
pub fn euclidean_to_angles(x: Point3) -> SpherePoint {
    let r = norm3(x);
    let psi = 2.0 * 1f64.atan2(r);
    if r == 0.0 {
        return SpherePoint::new(psi, 0.0, 0.0);
    }
    let theta = (x[0] * x[0] + x[1] * x[1]).sqrt().atan2(x[2]);
    let phi = x[1].atan2(x[0]);
    SpherePoint::new(psi, theta, phi)
}

/// π of a point in polar coordinates: |x| = cot(ψ/2).
pub fn angles_to_euclidean(p: SpherePoint) -> Result<Point3> {
    let half = 0.5 * p.psi;
    if half.sin() < 0.5 * POLE_TOLERANCE {
        return Err(Error::Pole);
    }
    let r = half.cos() / half.sin();
    let (st, ct) = p.theta.sin_cos();
    let (sf, cf) = p.phi.sin_cos();
    Ok([r * st * cf, r * st * sf, r * ct])
}

/// |π(ξ)| at polar angle ψ.
pub fn radius_of_angle(psi: f64) -> f64 {
    let half = 0.5 * psi;
    half.cos() / half.sin()
}

/// w₀(x) = log(2/(1+|x|²))
pub fn w0(x: Point3) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    std::f64::consts::LN_2 - r2.ln_1p()
}

/// w₀∘π(ξ) = log(1−ξ₄)
pub fn w0_on_sphere(xi: Point4) -> f64 {
    let rho2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if xi[3] > 0.0 {
        (rho2 / (1.0 + xi[3])).ln()
    } else {
        (-xi[3]).ln_1p()
    }
}

/// w₀∘π at polar angle ψ: log(2 sin²(ψ/2)).
pub fn w0_at_angle(psi: f64) -> f64 {
    let s = (0.5 * psi).sin();
    std::f64::consts::LN_2 + 2.0 * s.ln()
}

/// Quadrature of a transported integrand: ∫_{ℝ³} h dx = ∫_{S³} (h∘π)e^{−3w₀∘π} dV₀,
/// given the node values of (h∘π)e^{−3w₀∘π}.
pub fn sphere_integral_of_euclidean(values: &[f64], grid: &SphereGrid) -> Result<f64> {
    if values.len() != grid.len() {
        return input(format!(
            "grid has {} nodes, got {} values",
            grid.len(),
            values.len()
        ));
    }
    if let Some((node, value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Assembly { node, value: *value });
    }
    Ok(grid.integrate(values))
}

/// u_{λ,x₀}(x) = log(2λ/(1+λ²|x−x₀|²))
pub fn spherical_solution(lambda: f64, x0: Point3, x: Point3) -> Result<f64> {
    if !(lambda > 0.0) {
        return input(format!("spherical solution scale must be positive, got {lambda}"));
    }
    let d2 = (x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2) + (x[2] - x0[2]).powi(2);
    Ok((2.0 * lambda).ln() - (lambda * lambda * d2).ln_1p())
}

/// e^{3w₀(x)}·(P³v)(π⁻¹x), which equals (−Δ)^{3/2}(v∘π⁻¹)(x).
pub fn branson_transport(
    c: &HarmonicCoeffs,
    table: &MultiplierTable,
    basis: &HarmonicBasis,
    x: Point3,
) -> Result<f64> {
    if table.n() != 3 {
        return input("branson transport is implemented for n = 3 only");
    }
    let pv = table.apply(c)?;
    let value = basis.evaluate(&pv, euclidean_to_angles(x))?;
    Ok((3.0 * w0(x)).exp() * value)
}

/// ∫_{ℝ³} e^{3w₀} dx in closed form, |S³|.
pub fn conformal_volume() -> f64 {
    2.0 * PI * PI
}
