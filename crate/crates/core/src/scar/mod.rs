//! Phase-space projections of quantum states and scarring statistics.

pub mod ensemble;
pub mod eth;
pub mod husimi;
pub mod stats;
pub mod trace;

use crate::classical::ClassicalError;
use crate::grid::GridError;
use crate::model::ModelError;
use crate::quantum::QuantumError;
use thiserror::Error;

pub use ensemble::{
    diagonal_ensemble_projection, energy_blocks, time_averaged_projection, time_averaged_projection_krylov,
    DiagonalEnsemble, DEGENERACY_TOL,
};
pub use eth::{eth_scatter, write_spectrum_csv, EntropySelection, EthPoint, Observable};
pub use husimi::{husimi_at, husimi_projection, husimi_projection_full, product_overlap, HusimiEvaluator};
pub use stats::{
    chi, eigen_scores, random_scores, random_sector_state, random_sector_state_stream, scar_score, scar_statistics,
    FamilyStencil, ScarStats,
};
pub use trace::{is_family, upo_trace, UpoTrace, FAMILY_SIZE, TRACE_SAMPLES};

#[derive(Debug, Error)]
pub enum ScarError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("orbit family is empty")]
    EmptyFamily,
    #[error("projection map vanishes everywhere")]
    ZeroMap,
    #[error("invalid parameter: {0}")]
    Invalid(&'static str),
}
