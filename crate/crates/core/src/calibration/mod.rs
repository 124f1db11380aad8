//! Parameter estimation from observed borrower counts.
//!
//! The forward model is integrated from the first observation and sampled at
//! every observation time by linear interpolation between accepted steps. The
//! weighted sum of squared errors is minimized by a bounded simplex search.

mod simplex;

use serde::Serialize;
use thiserror::Error;

use crate::integrator::{integrate_with, IntegrateError, SolverConfig, Status};
use crate::model::{ModelError, ModelParams, ParamName, State};

pub use simplex::{minimize, SimplexOptions, SimplexOutcome, StopReason};

/// Objective value assigned to parameters whose simulation diverges or runs
/// out of steps.
pub const DIVERGENCE_SENTINEL: f64 = 1e300;
pub const MIN_BUDGET: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("observations: {0}")]
    InvalidObservations(String),
    #[error("fit specification: {0}")]
    InvalidSpec(String),
    #[error("budget {0} is below the minimum of {MIN_BUDGET} evaluations")]
    BudgetTooSmall(usize),
    #[error("every evaluated parameter set diverged")]
    AllDiverged,
    #[error(transparent)]
    Params(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] IntegrateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observation {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub w: f64,
}

impl Observation {
    pub fn new(t: f64, s: f64, i: f64) -> Self {
        Observation { t, s, i, w: 1.0 }
    }

    pub fn weighted(t: f64, s: f64, i: f64, w: f64) -> Self {
        Observation { t, s, i, w }
    }
}

/// At least three finite observations with strictly increasing times and
/// non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    rows: Vec<Observation>,
}

impl ObservationSet {
    pub fn new(rows: Vec<Observation>) -> Result<Self, FitError> {
        if rows.len() < 3 {
            return Err(FitError::InvalidObservations(format!(
                "need at least 3 rows, got {}",
                rows.len()
            )));
        }
        for (n, r) in rows.iter().enumerate() {
            if ![r.t, r.s, r.i, r.w].iter().all(|v| v.is_finite()) {
                return Err(FitError::InvalidObservations(format!("row {} has a non-finite value", n + 1)));
            }
            if r.w < 0.0 {
                return Err(FitError::InvalidObservations(format!("row {} has a negative weight", n + 1)));
            }
        }
        if let Some(n) = rows.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(FitError::InvalidObservations(format!(
                "times must increase strictly (row {})",
                n + 2
            )));
        }
        Ok(ObservationSet { rows })
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn first_state(&self) -> State {
        State::new(self.rows[0].s, self.rows[0].i)
    }

    pub fn with_scaled_weights(&self, c: f64) -> Result<Self, FitError> {
        ObservationSet::new(self.rows.iter().map(|r| Observation { w: r.w * c, ..*r }).collect())
    }
}

/// Weighted squared error of the simulation started at the first observation.
pub fn objective(p: &ModelParams, obs: &ObservationSet, solver: &SolverConfig) -> Result<f64, FitError> {
    objective_from(p, obs.first_state(), obs, solver)
}

/// Weighted squared error of the simulation started at `x0` at the first
/// observation time.
pub fn objective_from(p: &ModelParams, x0: State, obs: &ObservationSet, solver: &SolverConfig) -> Result<f64, FitError> {
    let rows = obs.rows();
    let t0 = rows[0].t;
    let t1 = rows[rows.len() - 1].t;

    let mut total = 0.0;
    let mut next = 0usize;
    let mut prev: Option<(f64, State)> = None;
    let summary = integrate_with(p, x0, t0, t1, solver, |t, x| {
        while next < rows.len() && rows[next].t <= t {
            let r = rows[next];
            let at = match prev {
                Some((tp, xp)) if r.t < t => {
                    let f = (r.t - tp) / (t - tp);
                    State::new(xp.s + f * (x.s - xp.s), xp.i + f * (x.i - xp.i))
                }
                _ => x,
            };
            total += r.w * ((at.s - r.s).powi(2) + (at.i - r.i).powi(2));
            next += 1;
        }
        prev = Some((t, x));
    })?;
    if summary.status != Status::Completed || next < rows.len() || !total.is_finite() {
        return Ok(DIVERGENCE_SENTINEL);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum X0Policy {
    /// Start every simulation at the first observed state.
    #[default]
    FirstObservation,
    /// Fit the initial state as two extra free coordinates.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeParam {
    pub name: ParamName,
    pub lo: f64,
    pub hi: f64,
    pub guess: f64,
}

impl FreeParam {
    /// Free parameter over its full validity range.
    pub fn full_range(name: ParamName, guess: f64) -> Self {
        let (lo, hi) = default_bounds(name);
        FreeParam { name, lo, hi, guess }
    }
}

/// Default search interval for each coefficient.
pub fn default_bounds(name: ParamName) -> (f64, f64) {
    match name {
        // alpha = 0 is excluded; the inflow coefficient diverges there
        ParamName::Alpha => (1e-3, 1.0),
        _ => (0.0, 1.0),
    }
}

/// Which coefficients to estimate; the rest stay at the template's values.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSpec {
    template: ModelParams,
    free: Vec<FreeParam>,
    x0_policy: X0Policy,
}

impl FitSpec {
    pub fn new(template: ModelParams, free: Vec<FreeParam>, x0_policy: X0Policy) -> Result<Self, FitError> {
        if free.is_empty() {
            return Err(FitError::InvalidSpec("no free parameters".into()));
        }
        for (n, fp) in free.iter().enumerate() {
            if free[..n].iter().any(|o| o.name == fp.name) {
                return Err(FitError::InvalidSpec(format!("{} listed twice", fp.name)));
            }
            if !(fp.lo.is_finite() && fp.hi.is_finite() && fp.lo < fp.hi) {
                return Err(FitError::InvalidSpec(format!("{}: empty bound [{}, {}]", fp.name, fp.lo, fp.hi)));
            }
            if !(fp.lo..=fp.hi).contains(&fp.guess) {
                return Err(FitError::InvalidSpec(format!(
                    "{}: guess {} outside [{}, {}]",
                    fp.name, fp.guess, fp.lo, fp.hi
                )));
            }
            // both ends of the box must be admissible parameter values
            template.with(fp.name, fp.lo)?;
            template.with(fp.name, fp.hi)?;
        }
        let mut template = template;
        for fp in &free {
            template = template.with(fp.name, fp.guess)?;
        }
        Ok(FitSpec {
            template,
            free,
            x0_policy,
        })
    }

    pub fn free(&self) -> &[FreeParam] {
        &self.free
    }

    /// Template with every free parameter at its initial guess.
    pub fn initial_params(&self) -> ModelParams {
        self.template
    }

    pub fn x0_policy(&self) -> X0Policy {
        self.x0_policy
    }

    fn params_at(&self, v: &[f64]) -> Result<ModelParams, ModelError> {
        let mut raw = self.template.raw();
        for (fp, &x) in self.free.iter().zip(v) {
            raw.set(fp.name, x);
        }
        ModelParams::with_policy(raw, self.template.policy())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ModelParams,
    pub x0: State,
    pub residual: f64,
    pub initial_residual: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub trace: Vec<(usize, f64)>,
}

/// Estimates the free parameters of `spec` from `obs`.
///
/// Budget exhaustion is not an error: the result carries `converged = false`
/// and the best point found.
pub fn fit(spec: &FitSpec, obs: &ObservationSet, solver: &SolverConfig, budget: usize) -> Result<FitResult, FitError> {
    if budget < MIN_BUDGET {
        return Err(FitError::BudgetTooSmall(budget));
    }
    solver.validate()?;

    let mut lo: Vec<f64> = spec.free.iter().map(|f| f.lo).collect();
    let mut hi: Vec<f64> = spec.free.iter().map(|f| f.hi).collect();
    let mut start: Vec<f64> = spec.free.iter().map(|f| f.guess).collect();
    let first = obs.first_state();
    if spec.x0_policy == X0Policy::Free {
        let reach = obs.rows().iter().fold(1.0f64, |m, r| m.max(r.s.abs()).max(r.i.abs()));
        lo.extend([-2.0 * reach, -2.0 * reach]);
        hi.extend([2.0 * reach, 2.0 * reach]);
        start.extend([first.s, first.i]);
    }
    let n_params = spec.free.len();
    let split = |v: &[f64]| -> (Result<ModelParams, ModelError>, State) {
        let x0 = match spec.x0_policy {
            X0Policy::FirstObservation => first,
            X0Policy::Free => State::new(v[n_params], v[n_params + 1]),
        };
        (spec.params_at(&v[..n_params]), x0)
    };

    let cost = |v: &[f64]| -> f64 {
        let (params, x0) = split(v);
        match params {
            Ok(p) => objective_from(&p, x0, obs, solver).unwrap_or(DIVERGENCE_SENTINEL),
            Err(_) => DIVERGENCE_SENTINEL,
        }
    };
    let opts = SimplexOptions {
        max_evaluations: budget,
        ..Default::default()
    };
    let out = minimize(cost, &start, &lo, &hi, &opts);
    if out.value >= DIVERGENCE_SENTINEL {
        return Err(FitError::AllDiverged);
    }
    let (params, x0) = split(&out.best);
    Ok(FitResult {
        params: params?,
        x0,
        residual: out.value,
        initial_residual: out.initial_value,
        evaluations: out.evaluations,
        converged: out.stop.converged(),
        stop: out.stop,
        trace: out.trace,
    })
}
