use std::path::Path;
use std::time::Instant;

use qflow_core::conformal::Point3;
use qflow_core::problem::ProblemSpec;
use qflow_core::solver::{c_of_w, minimize, radial_profile, verify_solution, Pipeline, Termination, VerifyOptions};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult, Phase};
use crate::report::{Check, Relation, RunReport, Versions};
use crate::suites;

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub phase: &'static str,
    pub seconds: f64,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Vec<Timing>,
    /// Extra files as (name, contents).
    pub artifacts: Vec<(String, String)>,
}

struct Clock {
    timings: Vec<Timing>,
    last: Instant,
}

impl Clock {
    fn new() -> Self {
        Self {
            timings: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, phase: &'static str) {
        let now = Instant::now();
        self.timings.push(Timing {
            phase,
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

/// Radii of the CSV profile: 10^{−2} … 10^{3}, 20 per decade.
pub fn profile_radii() -> Vec<f64> {
    (0..=100).map(|i| 10f64.powf(-2.0 + 0.05 * i as f64)).collect()
}

type ModeOutput = (Vec<Check>, Value, Vec<(String, String)>);

fn solve(cfg: &RunConfig, clock: &mut Clock) -> CliResult<ModeOutput> {
    let spec = ProblemSpec::new(
        cfg.n,
        cfg.sign.expect("validated"),
        cfg.volume.expect("validated"),
        cfg.polynomial.clone().expect("validated"),
        cfg.u0_provider(),
        cfg.degree,
        cfg.zonal,
    )
    .phase("problem")?;
    let pipeline = Pipeline::new(spec).phase("setup")?;
    let f = pipeline.functional().phase("setup")?;
    clock.lap("setup");
    let outcome = minimize(&f, &cfg.solver).phase("minimize")?;
    clock.lap("minimize");
    let report = verify_solution(&f, &outcome, &VerifyOptions::default()).phase("verify")?;
    clock.lap("verify");

    let spec = &pipeline.spec;
    let c_w = c_of_w(outcome.state.log_mass, spec).phase("profile")?;
    let dir: Point3 = [0.0, 0.0, 1.0];
    let rows = radial_profile(spec, pipeline.grid.basis(), &outcome.state.w, c_w, dir, &profile_radii()).phase("profile")?;
    let mut csv = String::from("r,u,asymptotic_remainder\n");
    for (r, u, rem) in rows {
        csv.push_str(&format!("{r:.17e},{u:.17e},{rem:.17e}\n"));
    }
    let dump = outcome.state.w.dump_table();
    clock.lap("profile");

    let d = &report.diagnostics;
    let mut checks = vec![
        Check::flag("converged", report.termination == Termination::Converged),
        Check::new("preconditioned gradient norm", report.grad_norm_final, Relation::Below, cfg.solver.tol_g),
        Check::new("Euler-Lagrange L2 residual", report.el_residual_l2, Relation::Below, 1e-6),
        Check::new("volume |measured/V - 1|", report.volume_rel_err.abs(), Relation::Below, 1e-6),
        Check::new("asymptotic remainder spread, r in [10, 1000]", report.asymptotic_dev, Relation::Below, 1e-2),
        Check::flag("energy history monotone", report.monotone),
        Check::flag("accepted steps satisfy Armijo", report.armijo_ok),
        Check::new(
            "phi1 integral rel err vs gamma_n",
            (report.phi1_integral / spec.constants().gamma_n - 1.0).abs(),
            Relation::Below,
            1e-10,
        )
        .diagnostic(),
        Check::new("coercivity margin (2 - alpha)/4", report.coercivity_margin, Relation::AtLeast, 0.0).diagnostic(),
        Check::flag("alpha K > 0 at sampled points", d.alpha_k_positive).diagnostic(),
    ];
    for r in &report.pointwise_residuals {
        checks.push(
            Check::new(
                format!("pointwise residual at ({}, {}, {})", r.x[0], r.x[1], r.x[2]),
                r.rel_err,
                Relation::Below,
                1e-2,
            )
            .diagnostic(),
        );
    }
    if let Some(delta) = d.lower_bound_delta {
        checks.push(Check::flag("lower bound |K| > delta e^{-delta |x|^p} found", delta.is_some()).diagnostic());
    }
    let mut payload = serde_json::to_value(&report)?;
    if let Some(obj) = payload.as_object_mut() {
        // the coefficients go to their own file
        obj.remove("w_coeffs");
    }
    let artifacts = vec![("coefficients.txt".to_string(), dump), ("profile.csv".to_string(), csv)];
    Ok((checks, payload, artifacts))
}

/// Runs the configured mode.
pub fn run(cfg: &RunConfig) -> CliResult<RunOutcome> {
    let mut clock = Clock::new();
    let (checks, payload, artifacts) = match cfg.mode {
        Mode::Solve => solve(cfg, &mut clock)?,
        suite => {
            let (checks, payload) = match suite {
                Mode::VerifySpherical => suites::verify_spherical(cfg)?,
                Mode::BecknerSuite => suites::beckner_suite(cfg)?,
                Mode::PoincareSuite => suites::poincare_suite(cfg)?,
                Mode::Lemma22Suite => suites::lemma22_suite(cfg)?,
                Mode::FraclapSuite => suites::fraclap_suite(cfg)?,
                Mode::BransonCheck => suites::branson_check(cfg)?,
                Mode::Solve => unreachable!(),
            };
            clock.lap(suite.name());
            (checks, payload, Vec::new())
        }
    };
    let mut report = RunReport {
        mode: cfg.mode.name(),
        config: cfg.clone(),
        versions: Versions::default(),
        passed: false,
        checks,
        payload,
    };
    report.passed = report.gates_pass();
    Ok(RunOutcome {
        report,
        timings: clock.timings,
        artifacts,
    })
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes report.json, timings.json and any artifacts into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut report = serde_json::to_string_pretty(&outcome.report)?;
    report.push('\n');
    write(&dir.join("report.json"), &report)?;
    let mut timings = serde_json::to_string_pretty(&outcome.timings)?;
    timings.push('\n');
    write(&dir.join("timings.json"), &timings)?;
    for (name, contents) in &outcome.artifacts {
        write(&dir.join(name), contents)?;
    }
    Ok(())
}
