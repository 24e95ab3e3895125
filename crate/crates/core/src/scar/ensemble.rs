//! Infinite-time averaged projections: the diagonal ensemble and its
//! explicit finite-time counterparts.

use super::husimi::HusimiEvaluator;
use super::ScarError;
use crate::grid::{ManifoldGrid, ProjectionMap};
use crate::linalg::C64;
use crate::model::Manifold;
use crate::quantum::state::check_sector;
use crate::quantum::{EigenSystem, KrylovOptions, KrylovPropagator, SectorOperator, SectorState, SymmetrySector};
use rayon::prelude::*;
use std::ops::Range;

/// Levels closer than this are treated as one degenerate block.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Blocks processed per parallel task; partial maps are summed in block
/// order so results do not depend on the thread count.
const BLOCK_CHUNK: usize = 64;

#[derive(Debug, Clone)]
pub struct DiagonalEnsemble {
    pub map: ProjectionMap,
    /// Number of blocks holding more than one level.
    pub degenerate_blocks: usize,
    /// Smallest gap between consecutive levels.
    pub min_gap: f64,
}

/// Consecutive runs of ascending energies with neighbouring gaps `< tol`.
pub fn energy_blocks(energies: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for n in 1..=energies.len() {
        if n == energies.len() || energies[n] - energies[n - 1] >= tol {
            blocks.push(start..n);
            start = n;
        }
    }
    blocks
}

/// Class tables of every eigenstate, `[n][class]`.
pub(crate) fn eigen_class_weights(eval: &HusimiEvaluator, eigen: &EigenSystem) -> Vec<Vec<C64>> {
    (0..eigen.dimension())
        .into_par_iter()
        .map(|n| match eigen.real_state(n) {
            Some(v) => eval.class_weights_real(v),
            None => eval.class_weights(&eigen.state(n)),
        })
        .collect()
}

fn check_eigen(psi0: &SectorState, eigen: &EigenSystem, sector: &SymmetrySector) -> Result<(), ScarError> {
    check_sector(sector, psi0.n_sites(), psi0.dimension())?;
    check_sector(sector, eigen.n_sites(), eigen.dimension())?;
    Ok(())
}

/// `Qbar = sum_b |<{s}|P_b psi0>|^2` over degenerate blocks `b`, the
/// infinite-time average of `Q(psi(t))`.
pub fn diagonal_ensemble_projection(
    psi0: &SectorState,
    eigen: &EigenSystem,
    sector: &SymmetrySector,
    manifold: Manifold,
    grid: &ManifoldGrid,
) -> Result<DiagonalEnsemble, ScarError> {
    check_eigen(psi0, eigen, sector)?;
    let eval = HusimiEvaluator::new(sector, manifold, *grid);
    let coefficients = eigen.coefficients(psi0.amplitudes());
    let tables = eigen_class_weights(&eval, eigen);
    let blocks = energy_blocks(eigen.energies(), DEGENERACY_TOL);

    let partials: Vec<Vec<f64>> = blocks
        .par_chunks(BLOCK_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; grid.len()];
            let mut w = vec![C64::new(0.0, 0.0); eval.n_classes()];
            for block in chunk {
                if block.clone().all(|n| coefficients[n].norm_sqr() == 0.0) {
                    continue;
                }
                w.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
                for n in block.clone() {
                    for (x, t) in w.iter_mut().zip(&tables[n]) {
                        *x += coefficients[n] * t;
                    }
                }
                eval.accumulate(&w, &mut acc);
            }
            acc
        })
        .collect();
    let mut values = vec![0.0; grid.len()];
    for partial in &partials {
        values.iter_mut().zip(partial).for_each(|(v, p)| *v += p);
    }
    let min_gap = eigen
        .energies()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(DiagonalEnsemble {
        map: ProjectionMap::new(*grid, manifold, values)?,
        degenerate_blocks: blocks.iter().filter(|b| b.len() > 1).count(),
        min_gap,
    })
}

fn sample_count(horizon: f64, dt: f64) -> Result<usize, ScarError> {
    if !(horizon > 0.0 && horizon.is_finite() && dt > 0.0 && dt.is_finite()) {
        return Err(ScarError::Invalid("horizon and time step must be positive"));
    }
    Ok(((horizon / dt).round() as usize).max(1))
}

/// Mean of `Q(psi(t_k))` over `t_k = k dt`, `0 <= t_k < horizon`, using
/// exact eigenbasis evolution.
pub fn time_averaged_projection(
    psi0: &SectorState,
    eigen: &EigenSystem,
    sector: &SymmetrySector,
    manifold: Manifold,
    grid: &ManifoldGrid,
    horizon: f64,
    dt: f64,
) -> Result<ProjectionMap, ScarError> {
    check_eigen(psi0, eigen, sector)?;
    let samples = sample_count(horizon, dt)?;
    let eval = HusimiEvaluator::new(sector, manifold, *grid);
    let coefficients = eigen.coefficients(psi0.amplitudes());
    let tables = eigen_class_weights(&eval, eigen);
    let energies = eigen.energies();

    let partials: Vec<Vec<f64>> = (0..samples)
        .collect::<Vec<_>>()
        .par_chunks(BLOCK_CHUNK)
        .map(|ks| {
            let mut acc = vec![0.0; grid.len()];
            for &k in ks {
                let t = k as f64 * dt;
                let mut w = vec![C64::new(0.0, 0.0); eval.n_classes()];
                for (n, table) in tables.iter().enumerate() {
                    let c = coefficients[n] * C64::from_polar(1.0, -energies[n] * t);
                    for (x, v) in w.iter_mut().zip(table) {
                        *x += c * v;
                    }
                }
                eval.accumulate(&w, &mut acc);
            }
            acc
        })
        .collect();
    let mut values = vec![0.0; grid.len()];
    for partial in &partials {
        values.iter_mut().zip(partial).for_each(|(v, p)| *v += p);
    }
    values.iter_mut().for_each(|v| *v /= samples as f64);
    Ok(ProjectionMap::new(*grid, manifold, values)?)
}

/// Explicit time average with Krylov propagation, for sectors beyond the
/// dense budget. Cost grows linearly with `horizon / dt`.
pub fn time_averaged_projection_krylov(
    psi0: &SectorState,
    op: &SectorOperator,
    sector: &SymmetrySector,
    manifold: Manifold,
    grid: &ManifoldGrid,
    horizon: f64,
    dt: f64,
) -> Result<ProjectionMap, ScarError> {
    check_sector(sector, psi0.n_sites(), psi0.dimension())?;
    let samples = sample_count(horizon, dt)?;
    let eval = HusimiEvaluator::new(sector, manifold, *grid);
    let propagator = KrylovPropagator::new(op, KrylovOptions::default());
    let mut values = vec![0.0; grid.len()];
    let mut psi = psi0.clone();
    for k in 0..samples {
        if k > 0 {
            psi = propagator.evolve(&psi, dt)?;
        }
        eval.accumulate(&eval.class_weights(psi.amplitudes()), &mut values);
    }
    values.iter_mut().for_each(|v| *v /= samples as f64);
    Ok(ProjectionMap::new(*grid, manifold, values)?)
}
