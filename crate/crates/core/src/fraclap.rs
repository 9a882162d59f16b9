//! Pointwise ℝ³ oracles: the half-Laplacian as a principal-value singular
//! integral, a stencil Laplacian, the fundamental solution of (−Δ)^{1/2}
//! and a weighted-decay check for rapidly decreasing test functions.
//!
//! (−Δ)^{1/2}f(x) = C₃ P.V.∫ (f(x) − f(y))/|x−y|⁴ dy with C₃ = 1/π². In
//! spherical shells about x this is
//!
//! ```text
//! 4π C₃ ∫₀^∞ (f(x) − M(ρ))/ρ² dρ,    M(ρ) = mean of f on the sphere |y−x| = ρ,
//! ```
//!
//! and f(x) − M(ρ) = O(ρ²), so the integrand is bounded at the origin.

use std::f64::consts::PI;

use crate::conformal::{norm3, Point3};
use crate::error::{input, Error, Result};
use crate::lemma22kit::{finish_report, DecayReport};
use crate::quad::{tanh_sinh, AdaptiveGl};

/// C₃ = Γ(2)/π²
pub const HALF_LAPLACIAN_CONSTANT: f64 = 1.0 / (PI * PI);

/// Radius of the singular core.
pub const CORE_RADIUS: f64 = 1.0;

/// Outer radius of the shell quadrature is this times (1 + |x|).
pub const FAR_RADIUS_FACTOR: f64 = 1e3;

/// Ratio bound for [`schwartz_decay_check`].
pub const SCHWARTZ_RATIO_LIMIT: f64 = 1.5;

type Field = dyn Fn(Point3) -> f64 + Send + Sync;

/// A function on ℝ³ with a known limit at infinity and a decay exponent for
/// f − f(∞).
pub struct PointEvaluable {
    f: Box<Field>,
    pub decay_hint: f64,
    pub f_infinity: f64,
    /// Absolute noise of single evaluations; inner quadratures do not try
    /// to resolve below it.
    pub noise: f64,
}

impl std::fmt::Debug for PointEvaluable {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("PointEvaluable")
            .field("decay_hint", &self.decay_hint)
            .field("f_infinity", &self.f_infinity)
            .field("noise", &self.noise)
            .finish_non_exhaustive()
    }
}

impl PointEvaluable {
    pub fn new(f: impl Fn(Point3) -> f64 + Send + Sync + 'static, decay_hint: f64, f_infinity: f64) -> Self {
        Self {
            f: Box::new(f),
            decay_hint,
            f_infinity,
            noise: 0.0,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    /// −Δf by the stencil, with the noise level of that stencil for values
    /// of size `scale`.
    pub fn laplacian_of(
        f: impl Fn(Point3) -> f64 + Send + Sync + 'static,
        h_rel: f64,
        scale: f64,
        decay_hint: f64,
    ) -> Self {
        let noise = stencil_noise(scale, h_rel);
        Self::new(
            move |y: Point3| classical_laplacian(&f, y, h_rel * (1.0 + norm3(y))),
            decay_hint,
            0.0,
        )
        .with_noise(noise)
    }

    pub fn eval(&self, x: Point3) -> f64 {
        (self.f)(x)
    }

    /// max_r |f(r·dir) − f(∞)|·r^{decay_hint} over the given radii.
    pub fn decay_constant(&self, dir: Point3, radii: &[f64]) -> f64 {
        let d = norm3(dir);
        radii
            .iter()
            .map(|&r| {
                let x = [r * dir[0] / d, r * dir[1] / d, r * dir[2] / d];
                (self.eval(x) - self.f_infinity).abs() * r.powf(self.decay_hint)
            })
            .fold(0.0, f64::max)
    }
}

struct Frame {
    axis: Point3,
    u: Point3,
    v: Point3,
}

impl Frame {
    /// Orthonormal frame whose first vector points from x to the origin.
    fn toward_origin(x: Point3) -> Self {
        let r = norm3(x);
        let axis = if r > 0.0 {
            [-x[0] / r, -x[1] / r, -x[2] / r]
        } else {
            [0.0, 0.0, 1.0]
        };
        let helper = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let dot = helper[0] * axis[0] + helper[1] * axis[1] + helper[2] * axis[2];
        let mut u = [helper[0] - dot * axis[0], helper[1] - dot * axis[1], helper[2] - dot * axis[2]];
        let nu = norm3(u);
        u = [u[0] / nu, u[1] / nu, u[2] / nu];
        let v = [
            axis[1] * u[2] - axis[2] * u[1],
            axis[2] * u[0] - axis[0] * u[2],
            axis[0] * u[1] - axis[1] * u[0],
        ];
        Self { axis, u, v }
    }
}

const MAX_PHI_NODES: usize = 512;

/// Mean of f over the circle at polar cosine t of the sphere |y − x| = ρ,
/// by trapezoid doubling.
fn circle_mean(f: &PointEvaluable, x: Point3, frame: &Frame, rho: f64, t: f64, tol: f64) -> f64 {
    let s = (1.0 - t * t).max(0.0).sqrt();
    let at = |phi: f64| {
        let (sp, cp) = phi.sin_cos();
        let mut y = x;
        for i in 0..3 {
            y[i] += rho * (t * frame.axis[i] + s * (cp * frame.u[i] + sp * frame.v[i]));
        }
        f.eval(y)
    };
    let mut n = 4;
    let mut sum: f64 = (0..n).map(|j| at(2.0 * PI * j as f64 / n as f64)).sum();
    let mut mean = sum / n as f64;
    loop {
        let added: f64 = (0..n).map(|j| at(2.0 * PI * (j as f64 + 0.5) / n as f64)).sum();
        sum += added;
        n *= 2;
        let next = sum / n as f64;
        let done = (next - mean).abs() <= tol && n >= 8;
        mean = next;
        if done || n >= MAX_PHI_NODES {
            return mean;
        }
    }
}

/// Spherical mean M(ρ) = ½∫_{−1}^{1} (circle mean) dt.
fn sphere_mean(f: &PointEvaluable, x: Point3, frame: &Frame, rho: f64, tol: f64) -> Result<f64> {
    let tol = tol.max(1e-300);
    let g = |t: f64| circle_mean(f, x, frame, rho, t, tol);
    let out = quadrature::double_exponential::integrate(g, -1.0, 1.0, tol);
    if !out.integral.is_finite() {
        return Err(Error::Numeric {
            what: format!("spherical mean at radius {rho}"),
            estimate: out.integral,
            error_bound: out.error_estimate,
        });
    }
    Ok(0.5 * out.integral)
}

/// (−Δ)^{1/2}f(x) to absolute tolerance `tol`.
pub fn half_laplacian(f: &PointEvaluable, x: Point3, tol: f64) -> Result<f64> {
    if !(f.decay_hint >= 1.0) {
        return input(format!("decay hint must be at least 1, got {}", f.decay_hint));
    }
    if !(tol > 0.0) {
        return input(format!("tolerance must be positive, got {tol}"));
    }
    let fx = f.eval(x);
    let finf = f.f_infinity;
    let frame = Frame::toward_origin(x);
    // tolerance on the bracket, which is scaled by 4πC₃ = 4/π
    let budget = tol * PI / 4.0;
    let core_tol = (budget / 3.0).max(1e3 * f.noise);
    let far = FAR_RADIUS_FACTOR * (1.0 + norm3(x));
    let n_shells = (far / CORE_RADIUS).log2().ceil() as usize;
    let shell_tol = (budget / 3.0 / n_shells as f64).max(10.0 * f.noise);
    let noise = f.noise;

    let mut failure: Option<Error> = None;
    let gl = AdaptiveGl::new(8);

    let mut core_fn = |rho: f64| match sphere_mean(f, x, &frame, rho, (0.1 * core_tol * rho * rho).max(noise)) {
        Ok(m) => (fx - m) / (rho * rho),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let core = gl.integrate(0.0, CORE_RADIUS, core_tol, &mut core_fn);
    let (core, mut err) = wrap(core, "half-Laplacian core")?;

    let mut shells = 0.0;
    let mut lo = CORE_RADIUS;
    let mut shell_gl = AdaptiveGl::new(8);
    shell_gl.min_depth = 1;
    while lo < far {
        let hi = (2.0 * lo).min(far);
        let mut shell_fn = |rho: f64| match sphere_mean(f, x, &frame, rho, (0.1 * shell_tol * rho).max(noise)) {
            Ok(m) => (finf - m) / (rho * rho),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let (v, e) = wrap(shell_gl.integrate(lo, hi, shell_tol, &mut shell_fn), "half-Laplacian shell")?;
        shells += v;
        err += e;
        lo = hi;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let m_far = sphere_mean(f, x, &frame, far, 0.1 * shell_tol * far)?;
    let tail = (finf - m_far) / (far * (1.0 + f.decay_hint));

    let bracket = core + (fx - finf) / CORE_RADIUS + shells + tail;
    let value = 4.0 * PI * HALF_LAPLACIAN_CONSTANT * bracket;
    let bound = 4.0 * PI * HALF_LAPLACIAN_CONSTANT * (err + tail.abs() * 0.5);
    if bound > 10.0 * tol.max(1e3 * noise) {
        return Err(Error::Numeric {
            what: "half-Laplacian".into(),
            estimate: value,
            error_bound: bound,
        });
    }
    Ok(value)
}

fn wrap(r: Result<(f64, f64)>, what: &str) -> Result<(f64, f64)> {
    r.map_err(|e| match e {
        Error::Numeric {
            estimate,
            error_bound,
            ..
        } => Error::Numeric {
            what: what.into(),
            estimate,
            error_bound,
        },
        other => other,
    })
}

/// Rounding noise of [`classical_laplacian`] with step h on values of size `scale`.
pub fn stencil_noise(scale: f64, h: f64) -> f64 {
    64.0 * f64::EPSILON * scale / (h * h)
}

/// −Δf(x) from the 7-point stencil, Richardson-extrapolated over h and h/2.
pub fn classical_laplacian<F: Fn(Point3) -> f64 + ?Sized>(f: &F, x: Point3, h: f64) -> f64 {
    let stencil = |h: f64| {
        let c = f(x);
        let mut acc = -6.0 * c;
        for i in 0..3 {
            let mut p = x;
            p[i] += h;
            let mut m = x;
            m[i] -= h;
            acc += f(p) + f(m);
        }
        acc / (h * h)
    };
    let coarse = stencil(h);
    let fine = stencil(0.5 * h);
    -(4.0 * fine - coarse) / 3.0
}

/// Φ(x) = ((n−3)/2)! / (2π^{(n+1)/2}) · |x|^{1−n}
pub fn fundamental_solution(n: usize, x: &[f64]) -> Result<f64> {
    if n < 3 || n.is_multiple_of(2) {
        return input(format!("dimension must be odd and at least 3, got {n}"));
    }
    if x.len() != n {
        return input(format!("point has {} coordinates, expected {n}", x.len()));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return input("the fundamental solution is singular at the origin");
    }
    let c = crate::specialfun::factorial((n - 3) / 2) / (2.0 * PI.powf((n as f64 + 1.0) / 2.0));
    Ok(c * r.powi(1 - n as i32))
}

/// Compactly supported bump exp(−1/(1−|y|²)) on the unit ball.
pub fn bump(y: Point3) -> f64 {
    let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// (Φ∗bump)(x) = (1/π)∫₀¹ g(s)(s/r) log((r+s)/|r−s|) ds for the radial bump.
pub fn bump_potential(x: Point3, tol: f64) -> Result<f64> {
    let r = norm3(x);
    let g = |s: f64| if s >= 1.0 { 0.0 } else { (-1.0 / (1.0 - s * s)).exp() };
    if r == 0.0 {
        // limit r → 0: (1/π)∫ g(s)·2 ds
        return Ok(tanh_sinh(|s| 2.0 * g(s), 0.0, 1.0, tol)? / PI);
    }
    let kernel = |s: f64| g(s) * (s / r) * ((r + s) / (r - s).abs()).ln();
    let total = if r < 1.0 {
        tanh_sinh(kernel, 0.0, r, tol)? + tanh_sinh(kernel, r, 1.0, tol)?
    } else {
        tanh_sinh(kernel, 0.0, 1.0, tol)?
    };
    Ok(total / PI)
}

/// |(−Δ)^s φ(x)|·|x|^{3+2s} at points r·e₁, for s ∈ {1/2, 3/2}.
pub fn schwartz_decay_check(phi: PointEvaluable, s: f64, radii: &[f64], tol: f64) -> Result<DecayReport> {
    let exponent = 3.0 + 2.0 * s;
    let target: PointEvaluable = if (s - 0.5).abs() < 1e-12 {
        phi
    } else if (s - 1.5).abs() < 1e-12 {
        PointEvaluable::new(move |y: Point3| classical_laplacian(&|z: Point3| phi.eval(z), y, 1e-2), 6.0, 0.0)
    } else {
        return input(format!("order s must be 1/2 or 3/2, got {s}"));
    };
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        values.push(half_laplacian(&target, [r, 0.0, 0.0], tol * r.powf(-exponent))?);
    }
    Ok(finish_report(exponent, radii, values, false, SCHWARTZ_RATIO_LIMIT))
}
