//! Equilibrium finding, linear stability and parameter sweeps.

mod equilibria;
mod sweep;

use thiserror::Error;

use crate::model::ParamName;

pub use equilibria::{
    classify, classify_spectrum, classify_with_tol, eigenvalues, find_equilibria, find_equilibria_swapped,
    Equilibrium, Region, Stability, DEFAULT_GRID_DENSITY, DEFAULT_HALF_WIDTH, NEWTON_MAX_ITER, NEWTON_TOL_REL,
};
pub use sweep::{
    classify_endpoint, outcome_of, sweep, sweep_serial, Axis, AxisValues, Outcome, OutcomeTag, SweepMap,
    COLLAPSE_RADIUS, DOMINANCE_RATIO,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("search region must have positive, finite extent in both directions")]
    DegenerateRegion,
    #[error("grid density {0} is below the minimum of 2")]
    GridTooCoarse(usize),
    #[error("Newton iteration failed to confirm the origin")]
    NonConvergence,
    #[error("({s}, {i}) is not an equilibrium (residual {residual:e} after polishing)")]
    NotAnEquilibrium { s: f64, i: f64, residual: f64 },
    #[error("invalid sweep axis {0}")]
    InvalidAxis(String),
    #[error("both sweep axes vary {0}")]
    SameAxis(ParamName),
}
