//! Classical rotor dynamics of the chain and of its periodic orbits.

pub mod fidelity;
pub mod floquet;
pub mod integrator;
pub mod lyapunov;
pub mod upo;

use crate::linalg::LinalgError;
use crate::model::ModelError;
use thiserror::Error;

pub use fidelity::{classical_fidelity_map, FidelityMap, FidelityParams};
pub use floquet::{floquet_averaged_coupling, rotation, FloquetCoupling};
pub use integrator::{integrate_chain, StepControl, Trajectory};
pub use lyapunov::{
    lyapunov_analytical_is, lyapunov_ising_closed_form, lyapunov_monodromy, lyapunov_of_anchor, LyapunovMethod,
    LyapunovResult, MonodromyOptions, MonodromyReport,
};
pub use upo::{integrate_upo, orbit_period, upo_descriptor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("time step {0} underflows the integration horizon")]
    StepUnderflow(f64),
    #[error("integration horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("relative energy drift {drift:.3e} exceeds tolerance {tolerance:.1e} at t = {time}")]
    EnergyDrift { drift: f64, tolerance: f64, time: f64 },
    #[error("anchor is a fixed point of the single-spin dynamics")]
    FixedPoint,
    #[error("no return to the anchor within t = {horizon}")]
    NoReturn { horizon: f64 },
    #[error("orbit does not close: return distance {distance:.3e}")]
    PeriodMismatch { distance: f64 },
    #[error("tangent dynamics overflowed")]
    TangentOverflow,
    #[error("coupling matrix must be symmetric for IS-orbit computations")]
    AsymmetricCoupling,
    #[error("ensemble not converged: half-ensemble change {change:.3} > {threshold}")]
    NotConverged { change: f64, threshold: f64 },
    #[error("invalid parameter: {0}")]
    Invalid(&'static str),
}
