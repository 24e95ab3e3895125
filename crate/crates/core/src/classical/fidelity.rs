//! Classical counterpart of the time-averaged phase-space projection:
//! an ensemble of perturbed IS configurations is evolved classically and
//! its overlap with every IS grid point is averaged over time and over
//! the ensemble.

use super::integrator::ChainStepper;
use super::ClassicalError;
use crate::grid::{ManifoldGrid, ProjectionMap};
use crate::model::{is_sign, make_is_state, Manifold, ManifoldPoint, SpinChainModel, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityParams {
    /// Ensemble size `R`.
    pub samples: usize,
    /// Standard deviation of the Gaussian rotation angle (radians).
    pub delta: f64,
    /// Discarded periods before averaging.
    pub transient_periods: f64,
    /// Averaging window in IS periods.
    pub horizon_periods: f64,
    pub steps_per_period: usize,
    /// Integration steps between two time samples of the overlap.
    pub sample_every: usize,
    pub seed: u64,
    /// Largest accepted relative change of the map maximum between the
    /// half ensemble and the full ensemble; `None` disables the check.
    pub convergence_threshold: Option<f64>,
}

impl Default for FidelityParams {
    fn default() -> Self {
        FidelityParams {
            samples: 500,
            delta: 0.05,
            transient_periods: 20.0,
            horizon_periods: 200.0,
            steps_per_period: 1000,
            sample_every: 50,
            seed: 1,
            convergence_threshold: Some(0.2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FidelityMap {
    pub map: ProjectionMap,
    /// `|max(full) - max(first half)| / max(full)`.
    pub half_ensemble_change: f64,
}

/// Rotates `s` by `angle` about an axis orthogonal to it at azimuth `psi`.
pub fn rotate_transverse(s: &Vec3, psi: f64, angle: f64) -> Vec3 {
    let helper = if s.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = s.cross(&helper).normalize();
    let e2 = s.cross(&e1);
    let axis = psi.cos() * e1 + psi.sin() * e2;
    let (sin, cos) = angle.sin_cos();
    (cos * s + sin * axis.cross(s)).normalize()
}

/// Independent RNG stream for ensemble member `index`.
pub fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `prod_j ((1 + s_j . t_j) / 2)^(2s)` for every IS grid point `t_j = nu_j p`.
fn accumulate_overlaps(points: &[Vec3], signed: &[Vec3], two_s: i32, acc: &mut [f64]) {
    for (p, a) in points.iter().zip(acc.iter_mut()) {
        let mut prod = 1.0;
        for s in signed {
            prod *= 0.5 * (1.0 + p.dot(s));
        }
        *a += if two_s == 1 { prod } else { prod.powi(two_s) };
    }
}

fn member_average(
    model: &SpinChainModel,
    anchor: &ManifoldPoint,
    points: &[Vec3],
    params: &FidelityParams,
    index: usize,
) -> Result<Vec<f64>, ClassicalError> {
    let n = model.n_sites();
    let mut rng = member_rng(params.seed, index as u64);
    let angle = Normal::new(0.0, params.delta).map_err(|_| ClassicalError::Invalid("delta must be finite and >= 0"))?;
    let mut spins: Vec<Vec3> = make_is_state(anchor, n)?
        .into_spins()
        .into_iter()
        .map(|s| {
            let psi = rng.random::<f64>() * TAU;
            rotate_transverse(&s, psi, angle.sample(&mut rng))
        })
        .collect();

    let period = TAU / model.mu().norm();
    let dt = period / params.steps_per_period as f64;
    let transient = (params.transient_periods * params.steps_per_period as f64).round() as usize;
    let window = (params.horizon_periods * params.steps_per_period as f64).round() as usize;
    let every = params.sample_every.max(1);
    let two_s = model.spin().two_s() as i32;

    let mut stepper = ChainStepper::new(model, n);
    for _ in 0..transient {
        stepper.step(&mut spins, dt);
    }
    let mut acc = vec![0.0; points.len()];
    let mut signed = vec![Vec3::zeros(); n];
    let mut count = 0usize;
    // half-open window: samples at steps 0, every, ... < window
    for step in 0..window.max(1) {
        if step > 0 {
            stepper.step(&mut spins, dt);
        }
        if step % every == 0 {
            for (j, s) in spins.iter().enumerate() {
                signed[j] = is_sign(j) * s;
            }
            accumulate_overlaps(points, &signed, two_s, &mut acc);
            count += 1;
        }
    }
    let norm = 1.0 / count as f64;
    acc.iter_mut().for_each(|a| *a *= norm);
    Ok(acc)
}

/// Time- and ensemble-averaged classical overlap on the IS grid for an
/// ensemble prepared around the IS configuration of `anchor`.
///
/// Members are evaluated in parallel; each owns an RNG stream derived
/// from `(seed, member index)` and partial sums are combined in member
/// order, so the result does not depend on the thread count.
pub fn classical_fidelity_map(
    model: &SpinChainModel,
    anchor: &ManifoldPoint,
    grid: &ManifoldGrid,
    params: &FidelityParams,
) -> Result<FidelityMap, ClassicalError> {
    model.require_is()?;
    if !model.is_coupling_symmetric() {
        return Err(ClassicalError::AsymmetricCoupling);
    }
    if params.samples == 0 {
        return Err(ClassicalError::Invalid("ensemble size must be at least 1"));
    }
    if !(params.delta >= 0.0 && params.delta.is_finite()) {
        return Err(ClassicalError::Invalid("delta must be finite and >= 0"));
    }
    if params.steps_per_period == 0 || !(params.horizon_periods >= 0.0) || !(params.transient_periods >= 0.0) {
        return Err(ClassicalError::Invalid("horizon and step counts must be nonnegative"));
    }
    let points = grid.unit_vectors();
    let half = params.samples.div_ceil(2);
    let mut total = vec![0.0; points.len()];
    let mut half_total = vec![0.0; points.len()];

    const CHUNK: usize = 32;
    let mut start = 0;
    while start < params.samples {
        let end = (start + CHUNK).min(params.samples);
        let partial: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|r| member_average(model, anchor, &points, params, r))
            .collect::<Result<_, _>>()?;
        for (offset, member) in partial.iter().enumerate() {
            for (t, v) in total.iter_mut().zip(member) {
                *t += v;
            }
            if start + offset + 1 == half {
                half_total.copy_from_slice(&total);
            }
        }
        start = end;
    }
    let values: Vec<f64> = total.iter().map(|v| v / params.samples as f64).collect();
    let half_max = half_total.iter().map(|v| v / half as f64).fold(0.0, f64::max);
    let map = ProjectionMap::new(*grid, Manifold::Is, values).expect("grid-sized values");
    let full_max = map.max();
    let change = if full_max > 0.0 {
        (full_max - half_max).abs() / full_max
    } else {
        0.0
    };
    if let Some(threshold) = params.convergence_threshold {
        if change > threshold {
            return Err(ClassicalError::NotConverged { change, threshold });
        }
    }
    Ok(FidelityMap {
        map,
        half_ensemble_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Mat3, SpinMagnitude};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn transverse_rotation_angle() {
        let s = Vec3::new(0.3, -0.4, 0.8).normalize();
        for psi in [0.0, 1.0, 4.0] {
            let r = rotate_transverse(&s, psi, 0.2);
            assert!((r.dot(&s) - 0.2f64.cos()).abs() < 1e-14);
            assert!((r.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unperturbed_free_ensemble_peaks_on_orbit() {
        let model = SpinChainModel::new(Vec3::z(), Mat3::zeros(), 4, SpinMagnitude::HALF).unwrap();
        let anchor = ManifoldPoint::new(FRAC_PI_2, 0.0, Manifold::Is).unwrap();
        let grid = ManifoldGrid::new(21, 40).unwrap();
        let params = FidelityParams {
            samples: 2,
            delta: 0.0,
            transient_periods: 0.0,
            horizon_periods: 1.0,
            steps_per_period: 400,
            sample_every: 1,
            seed: 3,
            convergence_threshold: Some(1e-12),
        };
        let out = classical_fidelity_map(&model, &anchor, &grid, &params).unwrap();
        // overlap ((1 + cos)/2)^4 with the precessing equator vector: its
        // period average is C(8,4)/2^8 on the equator and 1/16 at the poles
        for k in 0..40 {
            assert!((out.map.get(10, k) - 35.0 / 128.0).abs() < 1e-6);
            assert!((out.map.get(0, k) - 1.0 / 16.0).abs() < 1e-12);
        }
        assert_eq!(grid.theta(out.map.argmax().0), FRAC_PI_2);
    }

    #[test]
    fn deterministic_for_seed() {
        let model = SpinChainModel::xxz(Vec3::new(2.4, 0.0, 0.4), -0.4, -1.8, 4).unwrap();
        let anchor = ManifoldPoint::new(FRAC_PI_2, FRAC_PI_2, Manifold::Is).unwrap();
        let grid = ManifoldGrid::new(5, 8).unwrap();
        let params = FidelityParams {
            samples: 5,
            horizon_periods: 2.0,
            transient_periods: 1.0,
            steps_per_period: 200,
            convergence_threshold: None,
            ..FidelityParams::default()
        };
        let a = classical_fidelity_map(&model, &anchor, &grid, &params).unwrap();
        let b = classical_fidelity_map(&model, &anchor, &grid, &params).unwrap();
        assert_eq!(a.map, b.map);
        assert!(a.map.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn rejects_empty_ensemble() {
        let model = SpinChainModel::ising(Vec3::z(), 1.0, 4).unwrap();
        let anchor = ManifoldPoint::new(1.0, 0.0, Manifold::Is).unwrap();
        let params = FidelityParams {
            samples: 0,
            ..FidelityParams::default()
        };
        assert!(classical_fidelity_map(&model, &anchor, &ManifoldGrid::default(), &params).is_err());
    }
}
