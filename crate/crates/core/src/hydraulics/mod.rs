//! Demand-driven extended-period hydraulics.

mod headloss;
mod model;
mod pump;
mod simulate;
mod solver;

pub use headloss::{
    hazen_williams_headloss, hazen_williams_resistance, minor_loss_resistance, GRAVITY, HW_EXPONENT, ZERO_FLOW,
};
pub use model::{HydraulicModel, LeakSite, LinkLaw, ModelLink};
pub use pump::{pump_head_gain, CurveFitError, PumpCurveFit};
pub use simulate::{
    simulate, solve_snapshot, tank_step, Controls, HydraulicState, SimulationError, SimulationOptions, Simulator,
    StateSeries,
};
pub use solver::{GgaSolver, SnapshotInput, SnapshotSolution, SolverSettings};

use thiserror::Error;

use crate::network::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (relative flow change {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("junction {0} has demand but no path to a head source")]
    DisconnectedDemand(String),
    #[error("singular system at iteration {iteration}")]
    SingularSystem { iteration: usize },
    #[error(transparent)]
    CurveFit(#[from] CurveFitError),
    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<Violation>),
    #[error("link {0} is not a pipe")]
    NotAPipe(String),
}
