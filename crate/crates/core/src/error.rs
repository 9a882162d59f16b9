use thiserror::Error;

/// Failure modes shared by every module of the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error(
        "grid too coarse for degree {degree}: need n_psi >= {required_psi}, \
         n_theta >= {required_theta}, n_phi >= {required_phi}"
    )]
    Resolution {
        degree: usize,
        required_psi: usize,
        required_theta: usize,
        required_phi: usize,
    },

    #[error("point lies on the north pole, where stereographic projection is undefined")]
    Pole,

    #[error("non-finite value {value} at grid node {node}")]
    Assembly { node: usize, value: f64 },

    #[error("{what} did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Numeric {
        what: String,
        estimate: f64,
        error_bound: f64,
    },

    #[error("weighted curvature field vanishes on the grid, log-mass undefined")]
    Mass,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("incompatible right-hand side: mean coefficient {0:e} is not zero")]
    Incompatible(f64),

    #[error("line search failed at iteration {iteration}: {detail}")]
    LineSearch { iteration: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
