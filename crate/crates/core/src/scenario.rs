use thiserror::Error;

use crate::integrator::{integrate, IntegrateError, SolverConfig, Trajectory};
use crate::model::{ModelParams, State};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid span: t1 = {t1} must exceed t0 = {t0}")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("initial state is not finite")]
    NonFiniteState,
    #[error(transparent)]
    Solver(#[from] IntegrateError),
}

/// One complete experiment: parameters, initial state, time span and solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ModelParams,
    pub x0: State,
    pub t0: f64,
    pub t1: f64,
    pub solver: SolverConfig,
    pub label: String,
    /// Set when part of the setup (typically the initial state) was filled in
    /// rather than taken from a measured source.
    pub assumed: bool,
}

impl Scenario {
    pub fn new(params: ModelParams, x0: State, t0: f64, t1: f64) -> Result<Self, ScenarioError> {
        let sc = Scenario {
            params,
            x0,
            t0,
            t1,
            solver: SolverConfig::default(),
            label: String::new(),
            assumed: false,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(ScenarioError::InvalidSpan {
                t0: self.t0,
                t1: self.t1,
            });
        }
        if !self.x0.is_finite() {
            return Err(ScenarioError::NonFiniteState);
        }
        self.solver.validate()?;
        Ok(())
    }

    pub fn run(&self) -> Result<Trajectory, IntegrateError> {
        integrate(&self.params, self.x0, self.t0, self.t1, &self.solver)
    }
}
