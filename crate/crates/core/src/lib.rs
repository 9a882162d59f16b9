//! Spectral solver for the prescribed Q-curvature equation
//! (−Δ)^{3/2}u = ±2e^{3u} on ℝ³, posed as a minimization over real
//! hyperspherical-harmonic coefficients on S³.

// comparisons are written `!(x > 0.0)` on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod fraclap;
pub mod lemma22kit;
pub mod paneitz;
pub mod problem;
pub mod quad;
pub mod s3harmonics;
pub mod solver;
pub mod specialfun;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
