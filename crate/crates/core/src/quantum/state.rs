//! Sector states, spin-coherent product states and exact evolution.

use super::eigen::EigenSystem;
use super::sector::SymmetrySector;
use super::QuantumError;
use crate::linalg::C64;
use crate::model::{SpinConfiguration, Vec3};

/// Allowed deviation of a state norm from one.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    n_sites: usize,
    amplitudes: Vec<C64>,
}

impl SectorState {
    /// Wraps already normalized amplitudes.
    pub fn new(n_sites: usize, amplitudes: Vec<C64>) -> Result<Self, QuantumError> {
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(SectorState { n_sites, amplitudes })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<C64>) -> Result<Self, QuantumError> {
        let norm = l2(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QuantumError::NotNormalized(norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(SectorState { n_sites, amplitudes })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SectorState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Full-space amplitudes `psi(c) = psi_r / sqrt|O_r|`.
    pub fn to_full(&self, sector: &SymmetrySector) -> Result<Vec<C64>, QuantumError> {
        check_sector(sector, self.n_sites, self.dimension())?;
        Ok(expand_to_full(&self.amplitudes, sector))
    }
}

pub(crate) fn l2(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn check_sector(sector: &SymmetrySector, n_sites: usize, dimension: usize) -> Result<(), QuantumError> {
    if sector.n_sites() != n_sites || sector.dimension() != dimension {
        return Err(QuantumError::SectorMismatch {
            expected: sector.n_sites(),
            got: n_sites,
        });
    }
    Ok(())
}

/// Expands sector amplitudes (complex) to the full `2^N` space.
pub fn expand_to_full(amplitudes: &[C64], sector: &SymmetrySector) -> Vec<C64> {
    let scale: Vec<f64> = sector.orbit_sizes().iter().map(|&s| 1.0 / (s as f64).sqrt()).collect();
    (0..sector.full_dimension() as u32)
        .map(|c| {
            let r = sector.index_of(c);
            amplitudes[r] * scale[r]
        })
        .collect()
}

/// Real counterpart of [`expand_to_full`].
pub fn expand_to_full_real(amplitudes: &[f64], sector: &SymmetrySector) -> Vec<f64> {
    let scale: Vec<f64> = sector.orbit_sizes().iter().map(|&s| 1.0 / (s as f64).sqrt()).collect();
    (0..sector.full_dimension() as u32)
        .map(|c| {
            let r = sector.index_of(c);
            amplitudes[r] * scale[r]
        })
        .collect()
}

/// `(<up|s>, <down|s>)` for the spin-1/2 coherent state along `v`,
/// `cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>`; the south pole is
/// `|down>` with no azimuthal phase.
pub fn single_spin_state(v: &Vec3) -> [C64; 2] {
    let up = (0.5 * (1.0 + v.z)).max(0.0).sqrt();
    if up < 1e-12 {
        return [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    }
    let down = C64::new(v.x, v.y) / (2.0 * up);
    let norm = (up * up + down.norm_sqr()).sqrt();
    [C64::new(up / norm, 0.0), down / norm]
}

/// `<c|{s_j}>` for all `2^N` basis labels (bit set = up).
pub fn product_amplitudes(config: &SpinConfiguration) -> Vec<C64> {
    let mut amps = vec![C64::new(1.0, 0.0)];
    // site j is bit j: extend the table with the new most significant bit
    for s in config.spins() {
        let [up, down] = single_spin_state(s);
        let low: Vec<C64> = amps.iter().map(|a| a * down).collect();
        let high: Vec<C64> = amps.iter().map(|a| a * up).collect();
        amps = low;
        amps.extend(high);
    }
    amps
}

/// Sector projection of a coherent product state.
#[derive(Debug, Clone)]
pub struct CoherentProjection {
    /// Normalized projection `P|{s}> / ||P|{s}>||`.
    pub state: SectorState,
    /// `||P|{s}>||^2`, one for symmetry-invariant configurations.
    pub weight: f64,
}

pub fn coherent_product_state(
    config: &SpinConfiguration,
    sector: &SymmetrySector,
) -> Result<CoherentProjection, QuantumError> {
    if config.len() != sector.n_sites() {
        return Err(QuantumError::SectorMismatch {
            expected: sector.n_sites(),
            got: config.len(),
        });
    }
    let full = product_amplitudes(config);
    let mut amps = vec![C64::new(0.0, 0.0); sector.dimension()];
    for (c, a) in full.iter().enumerate() {
        amps[sector.index_of(c as u32)] += a;
    }
    for (a, &size) in amps.iter_mut().zip(sector.orbit_sizes()) {
        *a /= (size as f64).sqrt();
    }
    let weight = l2(&amps).powi(2);
    if weight < 1e-300 {
        return Err(QuantumError::ZeroProjection);
    }
    Ok(CoherentProjection {
        state: SectorState::normalized(sector.n_sites(), amps)?,
        weight,
    })
}

/// `sum_n e^{-i E_n t} <E_n|psi> |E_n>`.
pub fn evolve(state: &SectorState, eigen: &EigenSystem, t: f64) -> Result<SectorState, QuantumError> {
    if state.n_sites() != eigen.n_sites() || state.dimension() != eigen.dimension() {
        return Err(QuantumError::SectorMismatch {
            expected: eigen.n_sites(),
            got: state.n_sites(),
        });
    }
    let coefficients = eigen.coefficients(state.amplitudes());
    Ok(evolve_coefficients(&coefficients, eigen, t, state.n_sites()))
}

/// Evolution from precomputed `<E_n|psi>`, avoiding a second projection.
pub fn evolve_coefficients(coefficients: &[C64], eigen: &EigenSystem, t: f64, n_sites: usize) -> SectorState {
    let phased: Vec<C64> = coefficients
        .iter()
        .zip(eigen.energies())
        .map(|(c, &e)| c * C64::from_polar(1.0, -e * t))
        .collect();
    SectorState {
        n_sites,
        amplitudes: eigen.combine(&phased),
    }
}
