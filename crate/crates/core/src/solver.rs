//! Minimization of the sphere-side functional
//!
//! ```text
//! J(w) = ½ Σ mu[l] w² + α⟨φ̃₁, w⟩ − (αγₙ/n) log ∫ |K̃| e^{nw − nw₀∘π} dV₀
//! ```
//!
//! over mean-free coefficient vectors, followed by reconstruction of
//! u = −P + αu₀ + w∘π⁻¹ + c_w on ℝ³ and a set of independent checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::conformal::{euclidean_to_angles, norm3, Point3};
use crate::error::{input, Error, Result};
use crate::fraclap::{half_laplacian, PointEvaluable};
use crate::paneitz::MultiplierTable;
use crate::problem::{assemble_sphere_fields, fibonacci_directions, u0_eval, FieldDiagnostics, ProblemSpec, SphereFields};
use crate::s3harmonics::{HarmonicBasis, HarmonicCoeffs, SphereGrid};

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverParams {
    pub tol_g: f64,
    #[serde(rename = "tol_J")]
    pub tol_j: f64,
    pub max_iter: usize,
    pub memory: usize,
    pub method: Method,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tol_g: 1e-9,
            tol_j: 1e-12,
            max_iter: 2000,
            memory: 10,
            method: Method::Lbfgs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lbfgs,
    GradientDescent,
}

pub const ARMIJO_C1: f64 = 1e-4;
pub const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Energy, gradient and density at one iterate.
#[derive(Debug, Clone)]
pub struct EnergyState {
    pub w: HarmonicCoeffs,
    pub energy: f64,
    pub gradient: HarmonicCoeffs,
    pub log_mass: f64,
    /// w at the grid nodes.
    pub values: Vec<f64>,
    /// ρ = |K̃|e^{nw−nw₀∘π}/mass at the grid nodes.
    pub density: Vec<f64>,
}

/// log Σ exp(aᵢ), ignoring −∞ entries.
pub fn log_sum_exp(a: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = a.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + a.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// The functional on a fixed grid.
pub struct Functional<'a> {
    pub spec: &'a ProblemSpec,
    pub grid: &'a SphereGrid,
    pub fields: &'a SphereFields,
    pub table: &'a MultiplierTable,
    log_nodes: Vec<f64>,
}

impl<'a> Functional<'a> {
    pub fn new(
        spec: &'a ProblemSpec,
        grid: &'a SphereGrid,
        fields: &'a SphereFields,
        table: &'a MultiplierTable,
    ) -> Result<Self> {
        if table.degree() != grid.degree() || table.n() != spec.n {
            return input("multiplier table does not match the grid degree or dimension");
        }
        // log of weight·node weight; −∞ where the weight underflows
        let log_nodes = fields
            .log_weight
            .iter()
            .zip(grid.weights())
            .map(|(lw, q)| lw + q.ln())
            .collect();
        Ok(Self {
            spec,
            grid,
            fields,
            table,
            log_nodes,
        })
    }

    fn gamma(&self) -> f64 {
        self.spec.constants().gamma_n
    }

    fn n(&self) -> f64 {
        self.spec.n as f64
    }

    pub fn zero(&self) -> HarmonicCoeffs {
        HarmonicCoeffs::zeros(self.grid.degree(), self.grid.is_zonal())
    }

    /// Energy and gradient at w (w need not be mean-free).
    pub fn evaluate(&self, w: &HarmonicCoeffs) -> Result<EnergyState> {
        let n = self.n();
        let alpha = self.spec.alpha;
        let values = self.grid.synthesize(w)?;
        let log_terms: Vec<f64> = self.log_nodes.iter().zip(&values).map(|(l, v)| l + n * v).collect();
        let log_mass = log_sum_exp(log_terms.iter().copied());
        if !log_mass.is_finite() {
            return Err(Error::Mass);
        }
        let quad = self.table.quadratic_form(w)?;
        let linear = self.fields.phi1_coeffs.dot(w)?;
        let energy = quad + alpha * linear - alpha * self.gamma() / n * log_mass;

        let density: Vec<f64> = self
            .fields
            .log_weight
            .iter()
            .zip(&values)
            .map(|(lw, v)| (lw + n * v - log_mass).exp())
            .collect();
        let rho_hat = self.grid.analyze(&density, self.grid.degree())?;
        let mut gradient = self.table.apply(w)?;
        gradient.axpy(alpha, &self.fields.phi1_coeffs)?;
        gradient.axpy(-alpha * self.gamma(), &rho_hat)?;
        gradient.as_mut_slice()[0] = 0.0;
        Ok(EnergyState {
            w: w.clone(),
            energy,
            gradient,
            log_mass,
            values,
            density,
        })
    }

    /// J(w)
    pub fn energy(&self, w: &HarmonicCoeffs) -> Result<f64> {
        Ok(self.evaluate(w)?.energy)
    }

    /// ∇J(w) with the l = 0 entry removed.
    pub fn gradient(&self, w: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
        Ok(self.evaluate(w)?.gradient)
    }

    /// J(w+s) − J(w), evaluated without forming the two energies.
    pub fn energy_change(&self, state: &EnergyState, step: &HarmonicCoeffs, step_values: &[f64]) -> Result<f64> {
        let n = self.n();
        let alpha = self.spec.alpha;
        let mu = self.table.mu();
        let quad: f64 = step
            .as_slice()
            .iter()
            .zip(state.w.as_slice())
            .zip(step.slot_degrees())
            .map(|((s, w), l)| mu[l] * s * (w + 0.5 * s))
            .sum();
        let linear = self.fields.phi1_coeffs.dot(step)?;
        let ratio: f64 = state
            .density
            .iter()
            .zip(step_values)
            .zip(self.grid.weights())
            .map(|((r, s), q)| q * r * (n * s).exp_m1())
            .sum();
        Ok(quad + alpha * linear - alpha * self.gamma() / n * ratio.ln_1p())
    }

    /// sqrt(Σ g²/max(mu,1))
    pub fn preconditioned_norm(&self, g: &HarmonicCoeffs) -> f64 {
        let mu = self.table.mu();
        g.as_slice()
            .iter()
            .zip(g.slot_degrees())
            .map(|(v, l)| v * v / mu[l].max(1.0))
            .sum::<f64>()
            .sqrt()
    }
}

/// How the iteration ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
    LineSearchFailed { iteration: usize, detail: String },
}

/// One accepted step: J before, J after, the accurately evaluated change,
/// step length and directional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArmijoRecord {
    pub energy_before: f64,
    pub energy_after: f64,
    pub energy_change: f64,
    pub step: f64,
    pub slope: f64,
}

impl ArmijoRecord {
    /// The test the line search applied, on the logged change.
    pub fn sufficient_decrease(&self) -> bool {
        self.energy_change <= ARMIJO_C1 * self.step * self.slope
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub state: EnergyState,
    pub termination: Termination,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub grad_norm_history: Vec<f64>,
    pub steps: Vec<ArmijoRecord>,
}

/// Preconditioned L-BFGS (or gradient descent) from w = 0.
pub fn minimize(f: &Functional, params: &SolverParams) -> Result<MinimizeOutcome> {
    minimize_from(f, params, f.zero())
}

pub fn minimize_from(f: &Functional, params: &SolverParams, start: HarmonicCoeffs) -> Result<MinimizeOutcome> {
    let mu = f.table.mu();
    let slots = start.slot_degrees();
    let diag: Vec<f64> = slots
        .iter()
        .map(|&l| if l == 0 { 0.0 } else { 1.0 / mu[l].max(1.0) })
        .collect();
    let mut w = start;
    w.as_mut_slice()[0] = 0.0;
    let mut state = f.evaluate(&w)?;
    let mut energy = state.energy;
    let mut energy_history = vec![energy];
    let mut grad_norm_history = vec![f.preconditioned_norm(&state.gradient)];
    let mut steps = Vec::new();
    let mut memory: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    let mut last_rel_decrease = f64::INFINITY;
    let mut termination = Termination::IterationCap;
    let mut iterations = 0;

    for it in 0..params.max_iter {
        let gnorm = *grad_norm_history.last().unwrap();
        if gnorm < params.tol_g && last_rel_decrease < params.tol_j {
            termination = Termination::Converged;
            break;
        }
        if gnorm == 0.0 {
            termination = Termination::Converged;
            break;
        }
        let g = state.gradient.as_slice();
        let mut d = match params.method {
            Method::GradientDescent => g.iter().zip(&diag).map(|(g, h)| -h * g).collect::<Vec<_>>(),
            Method::Lbfgs => two_loop(g, &diag, &memory),
        };
        let mut slope: f64 = d.iter().zip(g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            memory.clear();
            d = g.iter().zip(&diag).map(|(g, h)| -h * g).collect();
            slope = d.iter().zip(g).map(|(a, b)| a * b).sum();
        }
        let dir = HarmonicCoeffs::from_vec(w.degree(), w.is_zonal(), d)?;
        let dir_values = f.grid.synthesize(&dir)?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut step = dir.clone();
            step.scale(t);
            let step_values: Vec<f64> = dir_values.iter().map(|v| t * v).collect();
            let delta = f.energy_change(&state, &step, &step_values)?;
            if delta.is_finite() && delta <= ARMIJO_C1 * t * slope {
                accepted = Some((step, delta));
                break;
            }
            t *= BACKTRACK;
        }
        let Some((step, delta)) = accepted else {
            if gnorm < params.tol_g {
                termination = Termination::Converged;
            } else {
                termination = Termination::LineSearchFailed {
                    iteration: it,
                    detail: format!(
                        "no sufficient decrease down to step {t:.3e}; J = {energy:.17e}, preconditioned gradient norm {gnorm:.3e}"
                    ),
                };
            }
            break;
        };
        let mut w_new = w.clone();
        w_new.axpy(1.0, &step)?;
        let new_state = f.evaluate(&w_new)?;
        let new_energy = energy + delta;
        steps.push(ArmijoRecord {
            energy_before: energy,
            energy_after: new_energy,
            energy_change: delta,
            step: t,
            slope,
        });
        let s: Vec<f64> = step.as_slice().to_vec();
        let y: Vec<f64> = new_state
            .gradient
            .as_slice()
            .iter()
            .zip(state.gradient.as_slice())
            .map(|(a, b)| a - b)
            .collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        let yy: f64 = y.iter().map(|a| a * a).sum();
        if sy > 1e-12 * (ss * yy).sqrt() {
            if memory.len() == params.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        last_rel_decrease = (-delta).max(0.0) / energy.abs().max(1.0);
        w = w_new;
        state = new_state;
        energy = new_energy;
        energy_history.push(energy);
        grad_norm_history.push(f.preconditioned_norm(&state.gradient));
        iterations = it + 1;
    }
    Ok(MinimizeOutcome {
        state,
        termination,
        iterations,
        energy_history,
        grad_norm_history,
        steps,
    })
}

fn two_loop(g: &[f64], diag: &[f64], memory: &std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let scale = memory.back().map_or(1.0, |(s, y, _)| {
        let hy: f64 = y.iter().zip(diag).map(|(y, h)| h * y * y).sum();
        if hy > 0.0 {
            dot(s, y) / hy
        } else {
            1.0
        }
    });
    let mut r: Vec<f64> = q.iter().zip(diag).map(|(q, h)| scale * h * q).collect();
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &r);
        for (ri, si) in r.iter_mut().zip(s) {
            *ri += (a - b) * si;
        }
    }
    r.iter_mut().for_each(|v| *v = -*v);
    r
}

/// c_w = −(1/n)(log ∫Ke^{nw}dx − log(αγₙ)); the signs of K and α cancel.
pub fn c_of_w(log_mass: f64, spec: &ProblemSpec) -> Result<f64> {
    let arg = spec.alpha.abs() * spec.constants().gamma_n;
    if !(arg > 0.0) || !log_mass.is_finite() {
        return Err(Error::Hypothesis(format!(
            "cannot normalise: log mass {log_mass}, |alpha| gamma_n = {arg}"
        )));
    }
    Ok(-(log_mass - arg.ln()) / spec.n as f64)
}

/// u(x) = −P(x) + αu₀(x) + w(π⁻¹x) + c_w
pub fn reconstruct_u(spec: &ProblemSpec, basis: &HarmonicBasis, w: &HarmonicCoeffs, c_w: f64, x: Point3) -> Result<f64> {
    let wx = basis.evaluate(w, euclidean_to_angles(x))?;
    Ok(-spec.polynomial.eval(x) + spec.alpha * u0_eval(&spec.u0, x)? + wx + c_w)
}

/// Pointwise check of (−Δ)^{3/2}u = sign·(n−1)!e^{3u}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResidual {
    pub x: Point3,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// Everything measured about a solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub alpha: f64,
    pub volume_target: f64,
    pub coercivity_margin: f64,
    pub degree: usize,
    pub zonal: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub c_w: f64,
    pub energy_final: f64,
    pub energy_history: Vec<f64>,
    pub grad_norm_final: f64,
    pub monotone: bool,
    pub armijo_ok: bool,
    pub volume_measured: f64,
    pub volume_rel_err: f64,
    pub volume_check_degree: usize,
    pub el_residual_l2: f64,
    pub asymptotic_c: f64,
    pub asymptotic_dev: f64,
    pub asymptotic_radii: Vec<f64>,
    pub pointwise_residuals: Vec<PointResidual>,
    pub phi1_integral: f64,
    pub diagnostics: FieldDiagnostics,
    pub w_coeffs: HarmonicCoeffs,
}

/// Options for [`verify_solution`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Radii of the asymptotic sweep.
    pub asymptotic_radii: Vec<f64>,
    /// Points for the singular-integral residual (at most 5).
    pub residual_points: Vec<Point3>,
    pub residual_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            asymptotic_radii: (0..=8).map(|i| 10f64.powf(1.0 + 0.25 * i as f64)).collect(),
            residual_points: vec![[0.0; 3]],
            residual_tol: 1e-4,
        }
    }
}

/// Measures volume, Euler–Lagrange residual, asymptotics and pointwise
/// residuals of a minimizer.
pub fn verify_solution(f: &Functional, outcome: &MinimizeOutcome, opts: &VerifyOptions) -> Result<SolveReport> {
    let spec = f.spec;
    let state = &outcome.state;
    let n = spec.n as f64;
    let c = spec.constants();
    let c_w = c_of_w(state.log_mass, spec)?;

    // Euler–Lagrange residual with the l = 0 entry kept
    let rho_hat = f.grid.analyze(&state.density, f.grid.degree())?;
    let mut el = f.table.apply(&state.w)?;
    el.axpy(spec.alpha, &f.fields.phi1_coeffs)?;
    el.axpy(-spec.alpha * c.gamma_n, &rho_hat)?;
    let el_residual_l2 = el.norm_sq().sqrt();

    // volume on a finer grid
    let fine_degree = if f.grid.is_zonal() {
        2 * f.grid.degree()
    } else {
        (f.grid.degree() + f.grid.degree() / 2).min(crate::s3harmonics::MAX_FULL_DEGREE)
    };
    let fine = SphereGrid::new(fine_degree, f.grid.is_zonal())?;
    let fine_fields = assemble_sphere_fields(spec, &fine)?;
    let w_fine = fine.synthesize(&state.w)?;
    let log_vol = log_sum_exp(
        fine_fields
            .log_weight
            .iter()
            .zip(&w_fine)
            .zip(fine.weights())
            .map(|((lw, wv), q)| lw + n * (wv + c_w) + q.ln()),
    );
    let volume_measured = log_vol.exp() / crate::specialfun::factorial(spec.n - 1);
    let volume_rel_err = volume_measured / spec.volume - 1.0;

    // asymptotic constant
    let basis = f.grid.basis();
    let dirs = if f.grid.is_zonal() {
        vec![[0.0, 0.0, 1.0]]
    } else {
        fibonacci_directions(6)
    };
    let mut rems = Vec::new();
    for &r in &opts.asymptotic_radii {
        for d in &dirs {
            let x = [r * d[0], r * d[1], r * d[2]];
            let u = reconstruct_u(spec, basis, &state.w, c_w, x)?;
            rems.push(u + spec.polynomial.eval(x) + spec.alpha * r.ln());
        }
    }
    let asymptotic_c = rems.iter().sum::<f64>() / rems.len().max(1) as f64;
    let lo = rems.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rems.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let asymptotic_dev = if rems.is_empty() { 0.0 } else { hi - lo };

    let pointwise_residuals = pointwise_residuals(spec, basis, &state.w, c_w, &opts.residual_points, opts.residual_tol)?;

    let monotone = outcome.energy_history.windows(2).all(|p| p[1] <= p[0]);
    let armijo_ok = outcome.steps.iter().all(ArmijoRecord::sufficient_decrease);
    Ok(SolveReport {
        alpha: spec.alpha,
        volume_target: spec.volume,
        coercivity_margin: spec.coercivity_margin(),
        degree: f.grid.degree(),
        zonal: f.grid.is_zonal(),
        termination: outcome.termination.clone(),
        iterations: outcome.iterations,
        c_w,
        energy_final: *outcome.energy_history.last().unwrap(),
        energy_history: outcome.energy_history.clone(),
        grad_norm_final: *outcome.grad_norm_history.last().unwrap(),
        monotone,
        armijo_ok,
        volume_measured,
        volume_rel_err,
        volume_check_degree: fine_degree,
        el_residual_l2,
        asymptotic_c,
        asymptotic_dev,
        asymptotic_radii: opts.asymptotic_radii.clone(),
        pointwise_residuals,
        phi1_integral: f.fields.phi1_integral,
        diagnostics: f.fields.diagnostics.clone(),
        w_coeffs: state.w.clone(),
    })
}

/// (−Δ)^{3/2}u at each point against sign·(n−1)!e^{3u}. P has degree at most
/// 2, so (−Δ)^{3/2}P = 0 and only αu₀ + w∘π⁻¹ enters the oracle.
pub fn pointwise_residuals(
    spec: &ProblemSpec,
    basis: &HarmonicBasis,
    w: &HarmonicCoeffs,
    c_w: f64,
    points: &[Point3],
    tol: f64,
) -> Result<Vec<PointResidual>> {
    if points.len() > 5 {
        return input("at most 5 pointwise residual points are evaluated");
    }
    let alpha = spec.alpha;
    let u0 = spec.u0;
    let smooth_part = {
        let basis = basis.clone();
        let w = w.clone();
        move |y: Point3| -> f64 {
            let wy = basis.evaluate(&w, euclidean_to_angles(y)).unwrap_or(f64::NAN);
            alpha * u0_eval(&u0, y).unwrap_or(f64::NAN) + wy
        }
    };
    let scale = 1.0 + alpha.abs() + w.as_slice().iter().map(|c| c.abs()).sum::<f64>();
    let lap = PointEvaluable::laplacian_of(smooth_part, 1e-2, scale, 2.0);
    let q = spec.sign.value() * crate::specialfun::factorial(spec.n - 1);
    points
        .par_iter()
        .map(|&x| {
            let u = reconstruct_u(spec, basis, w, c_w, x)?;
            let rhs = q * (spec.n as f64 * u).exp();
            let lhs = half_laplacian(&lap, x, tol * rhs.abs().max(1e-300))?;
            Ok(PointResidual {
                x,
                lhs,
                rhs,
                rel_err: ((lhs - rhs) / rhs).abs(),
            })
        })
        .collect()
}

/// (r, u(r e), u + P + α log r) rows along direction `dir`.
pub fn radial_profile(
    spec: &ProblemSpec,
    basis: &HarmonicBasis,
    w: &HarmonicCoeffs,
    c_w: f64,
    dir: Point3,
    radii: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    let d = norm3(dir);
    radii
        .iter()
        .map(|&r| {
            let x = [r * dir[0] / d, r * dir[1] / d, r * dir[2] / d];
            let u = reconstruct_u(spec, basis, w, c_w, x)?;
            let rem = if r > 0.0 {
                u + spec.polynomial.eval(x) + spec.alpha * r.ln()
            } else {
                f64::NAN
            };
            Ok((r, u, rem))
        })
        .collect()
}

/// Problem, grid, fields and multipliers bundled for a full run.
pub struct Pipeline {
    pub spec: ProblemSpec,
    pub grid: SphereGrid,
    pub fields: SphereFields,
    pub table: MultiplierTable,
}

impl Pipeline {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let grid = SphereGrid::new(spec.degree, spec.zonal)?;
        let fields = assemble_sphere_fields(&spec, &grid)?;
        let table = MultiplierTable::new(spec.n, spec.degree)?;
        Ok(Self {
            spec,
            grid,
            fields,
            table,
        })
    }

    pub fn functional(&self) -> Result<Functional<'_>> {
        Functional::new(&self.spec, &self.grid, &self.fields, &self.table)
    }

    /// Minimize and verify.
    pub fn solve(&self, params: &SolverParams, opts: &VerifyOptions) -> Result<SolveReport> {
        let f = self.functional()?;
        let outcome = minimize(&f, params)?;
        verify_solution(&f, &outcome, opts)
    }
}
