//! One-dimensional quadrature rules shared by the sphere grids and the
//! ℝ³-side oracles.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [−1, 1], ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = NonZeroUsize::new(n.max(1)).expect("n >= 1");
    let rule = GaussLegendre::new(n);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss–Chebyshev rule of the second kind expressed in the polar angle:
/// ψ_j = jπ/(n+1), with weights for the measure sin²ψ dψ on (0, π).
///
/// Exact for ∫ p(cos ψ) sin²ψ dψ with deg p ≤ 2n − 1.
pub fn chebyshev2_polar(n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = std::f64::consts::PI / (n as f64 + 1.0);
    (1..=n)
        .map(|j| {
            let psi = j as f64 * h;
            let s = psi.sin();
            (psi, h * s * s)
        })
        .unzip()
}

/// Fixed Gauss–Legendre rule mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GlRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GlRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (b - a);
        let d = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c * x + d))
            .sum::<f64>()
            * c
    }

    /// Mapped (node, weight) pairs on [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (b - a);
        let d = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c * x + d, c * w))
    }
}

/// Adaptive bisection driven by a pair of Gauss–Legendre rules (n and 2n
/// nodes). A panel is accepted when the two rules agree to `abs_tol`
/// scaled by the panel's share of the interval.
pub struct AdaptiveGl {
    coarse: GlRule,
    fine: GlRule,
    pub max_depth: usize,
    /// Panels are always split at least this many times.
    pub min_depth: usize,
}

impl AdaptiveGl {
    pub fn new(n: usize) -> Self {
        Self {
            coarse: GlRule::new(n),
            fine: GlRule::new(2 * n),
            max_depth: 18,
            min_depth: 2,
        }
    }

    /// Returns (integral, accumulated error estimate).
    pub fn integrate<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        abs_tol: f64,
        f: &mut F,
    ) -> Result<(f64, f64)> {
        let total = (b - a).abs();
        let mut stack = vec![(a, b, 0usize)];
        let mut sum = 0.0;
        let mut err = 0.0;
        let mut failed = false;
        while let Some((lo, hi, depth)) = stack.pop() {
            let coarse = self.coarse.integrate(lo, hi, &mut *f);
            let fine = self.fine.integrate(lo, hi, &mut *f);
            let diff = (fine - coarse).abs();
            let budget = abs_tol * (hi - lo).abs() / total;
            if (diff <= budget && depth >= self.min_depth) || depth >= self.max_depth {
                if diff > budget {
                    failed = true;
                }
                sum += fine;
                err += diff;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        if failed && err > abs_tol.max(1e-300) * 10.0 {
            return Err(Error::Numeric {
                what: "adaptive Gauss-Legendre".into(),
                estimate: sum,
                error_bound: err,
            });
        }
        Ok((sum, err))
    }
}

/// Tanh–sinh integration over [a, b] (either orientation). Endpoint
/// singularities that are integrable are handled; non-finite samples count
/// as zero.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let out = quadrature::double_exponential::integrate(f, lo, hi, abs_tol);
    if !(out.error_estimate <= abs_tol * 10.0) || !out.integral.is_finite() {
        return Err(Error::Numeric {
            what: "tanh-sinh quadrature".into(),
            estimate: out.integral,
            error_bound: out.error_estimate,
        });
    }
    Ok(sign * out.integral)
}
