//! Quantum scarring in spin chains: classical unstable periodic orbits,
//! symmetry-reduced exact diagonalization, and phase-space projections.

pub mod classical;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod quantum;
pub mod scar;

pub use grid::{ManifoldGrid, ProjectionMap};
pub use model::{
    classical_energy, make_is_state, make_model, make_ti_state, Manifold, ManifoldPoint, Mat3, ModelError, ModelSpec,
    Preset, SpinChainModel, SpinConfiguration, SpinMagnitude, UpoDescriptor, Vec3,
};
