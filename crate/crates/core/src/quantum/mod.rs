//! Spin-1/2 exact diagonalization in the TI/IS symmetry sector.

pub mod eigen;
pub mod hamiltonian;
pub mod krylov;
pub mod observables;
pub mod sector;
pub mod state;

use crate::linalg::LinalgError;
use crate::model::ModelError;
use thiserror::Error;

pub use eigen::{diagonalize, diagonalize_with_limit, EigenSystem, EigenVectors, DEFAULT_DENSE_MAX_SITES};
pub use hamiltonian::{build_hamiltonian, SectorOperator};
pub use krylov::{krylov_evolve, KrylovOptions, KrylovPropagator};
pub use sector::{build_sector, build_sector_with_limit, SectorMetadata, SymmetrySector, DEFAULT_MAX_SITES};
pub use state::{coherent_product_state, evolve, product_amplitudes, CoherentProjection, SectorState};

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("the symmetry sector needs N >= 4 divisible by 4, got N = {0}")]
    SectorSize(usize),
    #[error("N = {n_sites} exceeds the memory limit of N <= {limit} sites for the sector basis")]
    TooManySites { n_sites: usize, limit: usize },
    #[error(
        "dense diagonalization is limited to N <= {limit} sites (N = {n_sites}, dimension {dimension}); \
         use Krylov evolution instead"
    )]
    DenseBudget {
        n_sites: usize,
        dimension: usize,
        limit: usize,
    },
    #[error("quantum computations support spin 1/2 only, got s = {0}")]
    UnsupportedSpin(f64),
    #[error("coupling matrix must be symmetric for the reflection-symmetric sector")]
    AsymmetricCoupling,
    #[error("sector mismatch: expected N = {expected}, got N = {got}")]
    SectorMismatch { expected: usize, got: usize },
    #[error("state norm {0} differs from one")]
    NotNormalized(f64),
    #[error("product state has no weight in the symmetry sector")]
    ZeroProjection,
    #[error("eigensystem cache: {0}")]
    CacheFormat(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
