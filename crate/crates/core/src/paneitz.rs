//! Spectral multipliers of the GJMS operator Pⁿ on Sⁿ and the norms and
//! inverses built from them.
//!
//! With λ_l = l(l+n−1) the symbol is
//! mu[l] = (λ_l + ((n−1)/2)²)^{1/2} · Π_{k=0}^{(n−3)/2} (λ_l + k(n−k−1)),
//! which telescopes to Γ(l+n)/Γ(l).

use crate::error::{input, Error, Result};
use crate::s3harmonics::HarmonicCoeffs;

/// Mean coefficients below this are treated as zero by [`MultiplierTable::solve`].
pub const MEAN_TOLERANCE: f64 = 1e-10;

/// mu[l] for l = 0..=L, frozen at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    n: usize,
    degree: usize,
    mu: Vec<f64>,
}

impl MultiplierTable {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return input(format!("dimension must be odd and at least 3, got {n}"));
        }
        let mu = (0..=degree).map(|l| symbol(n, l)).collect();
        Ok(Self { n, degree, mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Laplace–Beltrami eigenvalue λ_l = l(l+n−1).
    pub fn eigenvalue(&self, l: usize) -> f64 {
        (l * (l + self.n - 1)) as f64
    }

    fn check(&self, c: &HarmonicCoeffs) -> Result<()> {
        if c.degree() != self.degree {
            return input(format!(
                "coefficient degree {} does not match multiplier table degree {}",
                c.degree(),
                self.degree
            ));
        }
        Ok(())
    }

    fn map(&self, c: &HarmonicCoeffs, f: impl Fn(usize, f64) -> f64) -> Result<HarmonicCoeffs> {
        self.check(c)?;
        let mut out = c.clone();
        for (v, l) in out.as_mut_slice().iter_mut().zip(c.slot_degrees()) {
            *v = f(l, *v);
        }
        Ok(out)
    }

    /// Pⁿu
    pub fn apply(&self, c: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
        self.map(c, |l, v| v * self.mu[l])
    }

    /// (Pⁿ)^{1/2}u
    pub fn sqrt_apply(&self, c: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
        self.map(c, |l, v| v * self.mu[l].sqrt())
    }

    /// (−Δ_{g₀})^r u, with λ₀^r taken as 0.
    pub fn laplace_power_apply(&self, c: &HarmonicCoeffs, r: f64) -> Result<HarmonicCoeffs> {
        if !(r > 0.0) {
            return input(format!("laplacian power must be positive, got {r}"));
        }
        self.map(c, |l, v| {
            if l == 0 {
                0.0
            } else {
                v * self.eigenvalue(l).powf(r)
            }
        })
    }

    /// ‖Pⁿu‖_{L²}
    pub fn hdot_n_norm(&self, c: &HarmonicCoeffs) -> Result<f64> {
        self.check(c)?;
        Ok(weighted_sum(c, |l| self.mu[l] * self.mu[l]).sqrt())
    }

    /// (‖u‖²_{L²} + Σ mu[l]c²)^{1/2}
    pub fn h_half_norm(&self, c: &HarmonicCoeffs) -> Result<f64> {
        self.check(c)?;
        Ok(weighted_sum(c, |l| 1.0 + self.mu[l]).sqrt())
    }

    /// ½ Σ mu[l] c², the quadratic part of the energy.
    pub fn quadratic_form(&self, c: &HarmonicCoeffs) -> Result<f64> {
        self.check(c)?;
        Ok(0.5 * weighted_sum(c, |l| self.mu[l]))
    }

    /// Solves Pⁿu = f for mean-free f; the mean of u is pinned to zero.
    pub fn solve(&self, f: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
        self.check(f)?;
        let mean = f.as_slice()[0];
        if mean.abs() > MEAN_TOLERANCE {
            return Err(Error::Incompatible(mean));
        }
        self.map(f, |l, v| if l == 0 { 0.0 } else { v / self.mu[l] })
    }
}

fn weighted_sum(c: &HarmonicCoeffs, w: impl Fn(usize) -> f64) -> f64 {
    c.as_slice()
        .iter()
        .zip(c.slot_degrees())
        .map(|(v, l)| w(l) * v * v)
        .sum()
}

/// The defining product for mu[l].
pub fn symbol(n: usize, l: usize) -> f64 {
    let lambda = (l * (l + n - 1)) as f64;
    let half = (n as f64 - 1.0) / 2.0;
    let mut out = (lambda + half * half).sqrt();
    for k in 0..=(n - 3) / 2 {
        out *= lambda + (k * (n - k - 1)) as f64;
    }
    out
}

pub fn paneitz_apply(c: &HarmonicCoeffs, t: &MultiplierTable) -> Result<HarmonicCoeffs> {
    t.apply(c)
}

pub fn paneitz_sqrt_apply(c: &HarmonicCoeffs, t: &MultiplierTable) -> Result<HarmonicCoeffs> {
    t.sqrt_apply(c)
}

pub fn laplace_power_apply(c: &HarmonicCoeffs, t: &MultiplierTable, r: f64) -> Result<HarmonicCoeffs> {
    t.laplace_power_apply(c, r)
}

pub fn hdot_n_norm(c: &HarmonicCoeffs, t: &MultiplierTable) -> Result<f64> {
    t.hdot_n_norm(c)
}

pub fn h_half_norm(c: &HarmonicCoeffs, t: &MultiplierTable) -> Result<f64> {
    t.h_half_norm(c)
}

pub fn spectral_solve(f: &HarmonicCoeffs, t: &MultiplierTable) -> Result<HarmonicCoeffs> {
    t.solve(f)
}
