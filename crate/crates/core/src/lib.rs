//! Solvent/insolvent borrower dynamics: a planar nonlinear ODE model with
//! RK4 integration, equilibrium and stability analysis, parameter sweeps and
//! least-squares calibration.

pub mod analysis;
pub mod calibration;
pub mod cli;
pub mod integrator;
pub mod io;
pub mod model;
pub mod scenario;

pub use integrator::{integrate, SolverConfig, Status, Trajectory};
pub use model::{validate_params, ModelError, ModelParams, ParamName, State};
pub use scenario::Scenario;
