//! TOML run configuration.
//!
//! ```toml
//! mode = "solve"
//! n = 3
//! sign = 1
//! V = "pi^2"
//! P = "2 0 0 1; 0 2 0 1; 0 0 2 1"
//! L = 64
//! zonal = "auto"
//!
//! [solver]
//! tol_g = 1e-9
//! tol_J = 1e-12
//! max_iter = 2000
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qflow_core::lemma22kit::{DEFAULT_ORDER, DEFAULT_QUAD_TOL};
use qflow_core::problem::{alpha_of, CurvatureSign, PolynomialR3, U0Provider};
use qflow_core::solver::{Method, SolverParams};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Solve,
    VerifySpherical,
    BecknerSuite,
    PoincareSuite,
    Lemma22Suite,
    FraclapSuite,
    BransonCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::VerifySpherical => "verify-spherical",
            Self::BecknerSuite => "beckner-suite",
            Self::PoincareSuite => "poincare-suite",
            Self::Lemma22Suite => "lemma22-suite",
            Self::FraclapSuite => "fraclap-suite",
            Self::BransonCheck => "branson-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U0Kind {
    #[default]
    HalfW0,
    Lemma22,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Number(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawPolynomial {
    Inline(String),
    File { file: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawZonal {
    Flag(bool),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tol_g: Option<f64>,
    #[serde(rename = "tol_J")]
    tol_j: Option<f64>,
    max_iter: Option<usize>,
    memory: Option<usize>,
    method: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLemma22 {
    k: Option<usize>,
    quad_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    mode: Mode,
    n: Option<usize>,
    sign: Option<i64>,
    #[serde(rename = "V")]
    volume: Option<RawNumber>,
    #[serde(rename = "P")]
    polynomial: Option<RawPolynomial>,
    #[serde(default)]
    u0: U0Kind,
    #[serde(rename = "L")]
    degree: Option<usize>,
    zonal: Option<RawZonal>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    lemma22: RawLemma22,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
}

/// Settings of the cutoff-profile provider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma22Settings {
    pub k: usize,
    pub quad_tol: f64,
}

/// A validated configuration. Serializes to the echo written into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: usize,
    pub sign: Option<CurvatureSign>,
    #[serde(rename = "V")]
    pub volume: Option<f64>,
    #[serde(rename = "P")]
    pub polynomial: Option<PolynomialR3>,
    pub u0: U0Kind,
    #[serde(rename = "L")]
    pub degree: usize,
    /// None means auto.
    #[serde(serialize_with = "zonal_echo")]
    pub zonal: Option<bool>,
    pub solver: SolverParams,
    pub lemma22: Lemma22Settings,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

fn zonal_echo<S: serde::Serializer>(z: &Option<bool>, s: S) -> Result<S::Ok, S::Error> {
    match z {
        Some(b) => s.serialize_bool(*b),
        None => s.serialize_str("auto"),
    }
}

impl RunConfig {
    /// Defaults for a verification suite.
    pub fn suite(mode: Mode, seed: u64) -> Self {
        Self {
            mode,
            n: 3,
            sign: None,
            volume: None,
            polynomial: None,
            u0: U0Kind::HalfW0,
            degree: 64,
            zonal: None,
            solver: SolverParams::default(),
            lemma22: Lemma22Settings {
                k: DEFAULT_ORDER,
                quad_tol: DEFAULT_QUAD_TOL,
            },
            seed,
            out_dir: None,
        }
    }

    pub fn u0_provider(&self) -> U0Provider {
        match self.u0 {
            U0Kind::HalfW0 => U0Provider::HalfW0,
            U0Kind::Lemma22 => U0Provider::Lemma22 {
                k: self.lemma22.k,
                quad_tol: self.lemma22.quad_tol,
            },
        }
    }
}

/// Evaluates `2*pi^2`-style products of numbers and powers of pi.
pub fn parse_number_expr(text: &str) -> Option<f64> {
    let mut value = 1.0;
    for factor in text.split('*') {
        let f = factor.trim();
        let v = if let Some(rest) = f.strip_prefix("pi") {
            match rest.trim().strip_prefix('^') {
                Some(p) => PI.powf(p.trim().parse().ok()?),
                None if rest.trim().is_empty() => PI,
                None => return None,
            }
        } else {
            f.parse::<f64>().ok()?
        };
        value *= v;
    }
    value.is_finite().then_some(value)
}

/// Parses and validates a configuration. Relative `P = { file = ... }`
/// paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> CliResult<RunConfig> {
    let raw: RawConfig = toml::from_str(text)?;
    let n = raw.n.unwrap_or(3);
    if n != 3 {
        return config_err("n", format!("only n = 3 is supported, got {n}"));
    }
    let sign = match raw.sign {
        None => None,
        Some(1) => Some(CurvatureSign::Positive),
        Some(-1) => Some(CurvatureSign::Negative),
        Some(other) => return config_err("sign", format!("must be 1 or -1, got {other}")),
    };
    let volume = match raw.volume {
        None => None,
        Some(RawNumber::Number(v)) => Some(v),
        Some(RawNumber::Expr(s)) => match parse_number_expr(&s) {
            Some(v) => Some(v),
            None => return config_err("V", format!("cannot read `{s}` as a number or a product like 2*pi^2")),
        },
    };
    let polynomial = match raw.polynomial {
        None => None,
        Some(RawPolynomial::Inline(s)) => Some(PolynomialR3::parse(&s).map_err(|e| CliError::Config {
            key: "P".into(),
            message: e.to_string(),
        })?),
        Some(RawPolynomial::File { file }) => {
            let path = match base_dir {
                Some(b) if file.is_relative() => b.join(&file),
                _ => file,
            };
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            Some(PolynomialR3::parse(&text).map_err(|e| CliError::Config {
                key: "P.file".into(),
                message: format!("{}: {e}", path.display()),
            })?)
        }
    };
    let zonal = match raw.zonal {
        None => None,
        Some(RawZonal::Flag(b)) => Some(b),
        Some(RawZonal::Word(w)) if w == "auto" => None,
        Some(RawZonal::Word(w)) => return config_err("zonal", format!("expected true, false or \"auto\", got \"{w}\"")),
    };
    let degree = raw.degree.unwrap_or(64);
    if degree == 0 {
        return config_err("L", "degree must be at least 1");
    }

    let defaults = SolverParams::default();
    let method = match raw.solver.method.as_deref() {
        None | Some("lbfgs") => Method::Lbfgs,
        Some("gradient_descent") => Method::GradientDescent,
        Some(other) => {
            return config_err("solver.method", format!("expected \"lbfgs\" or \"gradient_descent\", got \"{other}\""))
        }
    };
    let solver = SolverParams {
        tol_g: raw.solver.tol_g.unwrap_or(defaults.tol_g),
        tol_j: raw.solver.tol_j.unwrap_or(defaults.tol_j),
        max_iter: raw.solver.max_iter.unwrap_or(defaults.max_iter),
        memory: raw.solver.memory.unwrap_or(defaults.memory),
        method,
    };
    for (key, v) in [("solver.tol_g", solver.tol_g), ("solver.tol_J", solver.tol_j)] {
        if !(v > 0.0) {
            return config_err(key, format!("must be positive, got {v}"));
        }
    }
    if solver.max_iter == 0 {
        return config_err("solver.max_iter", "must be at least 1");
    }
    if solver.memory == 0 {
        return config_err("solver.memory", "must be at least 1");
    }
    let lemma22 = Lemma22Settings {
        k: raw.lemma22.k.unwrap_or(DEFAULT_ORDER),
        quad_tol: raw.lemma22.quad_tol.unwrap_or(DEFAULT_QUAD_TOL),
    };
    if lemma22.k == 0 {
        return config_err("lemma22.k", "must be at least 1");
    }
    if !(lemma22.quad_tol > 0.0) {
        return config_err("lemma22.quad_tol", "must be positive");
    }

    if raw.mode == Mode::Solve {
        let Some(sign) = sign else {
            return config_err("sign", "solve mode requires sign");
        };
        let Some(v) = volume else {
            return config_err("V", "solve mode requires V");
        };
        if polynomial.is_none() {
            return config_err("P", "solve mode requires P");
        }
        if let Err(e) = alpha_of(v, sign, n) {
            let msg = match sign {
                CurvatureSign::Positive => format!("V must lie in V ∈ (0,|S^n|) = (0, {}) for sign = 1: {e}", 2.0 * PI * PI),
                CurvatureSign::Negative => format!("V must be positive: {e}"),
            };
            return config_err("V", msg);
        }
        if raw.u0 == U0Kind::Lemma22 {
            return config_err(
                "u0",
                "the energy needs (-Δ)^{3/2}u0 on all of R^3, which is only available for half_w0; \
                 use mode = \"lemma22-suite\" for the cutoff profile",
            );
        }
    }

    Ok(RunConfig {
        mode: raw.mode,
        n,
        sign,
        volume,
        polynomial,
        u0: raw.u0,
        degree,
        zonal,
        solver,
        lemma22,
        seed: raw.seed.unwrap_or(0),
        out_dir: raw.out_dir,
    })
}
