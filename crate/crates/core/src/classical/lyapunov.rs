//! Lyapunov exponents of the periodic orbits: numerically from the
//! monodromy matrix of the full chain, and in closed form for IS orbits
//! at weak coupling.

use super::floquet::floquet_averaged_coupling;
use super::integrator::{chain_rhs, step_count};
use super::ClassicalError;
use crate::linalg::{eigvals_general, C64};
use crate::model::{Manifold, ManifoldPoint, SpinChainModel, SpinConfiguration, UpoDescriptor, Vec3};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LyapunovMethod {
    Monodromy,
    AnalyticalIs,
}

impl fmt::Display for LyapunovMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LyapunovMethod::Monodromy => "monodromy",
            LyapunovMethod::AnalyticalIs => "analytical_is",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub lambda: f64,
    pub omega: f64,
    pub ratio: f64,
    pub method: LyapunovMethod,
    /// `-s Adj(Jbar) s`, only for the analytical method.
    pub alpha: Option<f64>,
}

impl LyapunovResult {
    fn new(lambda: f64, omega: f64, method: LyapunovMethod, alpha: Option<f64>) -> Self {
        LyapunovResult {
            lambda,
            omega,
            ratio: lambda / omega,
            method,
            alpha,
        }
    }
}

/// Weak-coupling exponent of the IS orbit through `anchor`:
/// `lambda^2 = |alpha|`, `alpha = -s Adj(Jbar) s`, and `omega = |mu|`.
pub fn lyapunov_analytical_is(model: &SpinChainModel, anchor: &ManifoldPoint) -> Result<LyapunovResult, ClassicalError> {
    let floquet = floquet_averaged_coupling(model)?;
    let alpha = floquet.alpha(&anchor.unit_vector());
    Ok(LyapunovResult::new(
        alpha.abs().sqrt(),
        model.mu().norm(),
        LyapunovMethod::AnalyticalIs,
        Some(alpha),
    ))
}

/// Ising-in-a-field special case (`mu_y = 0`, `J = J_zz z(x)z`):
/// `lambda^2 = J^2 u_x^2 [(1 - 3u_z^2)(u.s)^2 + 2u_z^2] / 4`.
pub fn lyapunov_ising_closed_form(jzz: f64, u: &Vec3, s: &Vec3) -> f64 {
    let us = u.dot(s);
    (0.25 * jzz * jzz * u.x * u.x * ((1.0 - 3.0 * u.z * u.z) * us * us + 2.0 * u.z * u.z))
        .abs()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyOptions {
    pub steps_per_period: usize,
    /// Largest accepted `max_j |s_j(T) - s_j(0)|`.
    pub closure_tolerance: f64,
    /// `lambda * T` below this is reported as a stable orbit.
    pub zero_threshold: f64,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        MonodromyOptions {
            steps_per_period: 1000,
            closure_tolerance: 1e-6,
            zero_threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MonodromyReport {
    pub result: LyapunovResult,
    pub eigenvalues: Vec<C64>,
    pub determinant: f64,
    pub closure: f64,
}

impl MonodromyReport {
    /// Number of eigenvalues with `| |z| - 1 | < tol`.
    pub fn unit_modulus_count(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|z| (z.norm() - 1.0).abs() < tol).count()
    }
}

/// Linearized chain flow applied to every column of `y` (3N x m).
fn tangent_rhs(model: &SpinChainModel, spins: &[Vec3], y: &DMatrix<f64>, out: &mut DMatrix<f64>) {
    let n = spins.len();
    let j = model.coupling();
    let jt = j.transpose();
    let fields: Vec<Vec3> = (0..n)
        .map(|i| model.local_field(&spins[(i + n - 1) % n], &spins[(i + 1) % n]))
        .collect();
    let rows = 3 * n;
    for (col_in, mut col_out) in y.column_iter().zip(out.column_iter_mut()) {
        let d = |i: usize| Vec3::new(col_in[3 * i], col_in[3 * i + 1], col_in[3 * i + 2]);
        for i in 0..n {
            let left = d((i + n - 1) % n);
            let right = d((i + 1) % n);
            let dfield = j * right + jt * left;
            let v = fields[i].cross(&d(i)) - spins[i].cross(&dfield);
            col_out[3 * i] = v.x;
            col_out[3 * i + 1] = v.y;
            col_out[3 * i + 2] = v.z;
        }
        debug_assert_eq!(col_out.len(), rows);
    }
}

fn axpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// Integrates the chain and its 3N-dimensional tangent flow for one
/// `period`, returning the monodromy matrix and the final configuration.
pub fn monodromy_matrix(
    initial: &SpinConfiguration,
    model: &SpinChainModel,
    period: f64,
    steps: usize,
) -> Result<(DMatrix<f64>, SpinConfiguration), ClassicalError> {
    let n = initial.len();
    let dim = 3 * n;
    let (steps, dt) = step_count(period, period / steps.max(1) as f64)?;

    let mut spins = initial.spins().to_vec();
    let mut y = DMatrix::<f64>::identity(dim, dim);
    let mut ks: [DMatrix<f64>; 4] = std::array::from_fn(|_| DMatrix::zeros(dim, dim));
    let mut sk: [Vec<Vec3>; 4] = std::array::from_fn(|_| vec![Vec3::zeros(); n]);
    let mut stage_s = vec![Vec3::zeros(); n];
    let mut stage_y = DMatrix::<f64>::zeros(dim, dim);
    let weights = [0.5, 0.5, 1.0];

    for _ in 0..steps {
        stage_s.copy_from_slice(&spins);
        stage_y.copy_from(&y);
        for stage in 0..4 {
            chain_rhs(model, &stage_s, &mut sk[stage]);
            tangent_rhs(model, &stage_s, &stage_y, &mut ks[stage]);
            if stage < 3 {
                let c = weights[stage] * dt;
                for i in 0..n {
                    stage_s[i] = spins[i] + c * sk[stage][i];
                }
                stage_y.copy_from(&y);
                axpy(&mut stage_y, c, &ks[stage]);
            }
        }
        for i in 0..n {
            spins[i] += dt / 6.0 * (sk[0][i] + 2.0 * sk[1][i] + 2.0 * sk[2][i] + sk[3][i]);
            spins[i].normalize_mut();
        }
        axpy(&mut y, dt / 6.0, &ks[0]);
        axpy(&mut y, dt / 3.0, &ks[1]);
        axpy(&mut y, dt / 3.0, &ks[2]);
        axpy(&mut y, dt / 6.0, &ks[3]);
        let size = y.amax();
        if !(size.is_finite() && size < 1e200) {
            return Err(ClassicalError::TangentOverflow);
        }
    }
    Ok((y, SpinConfiguration::from_raw(spins)))
}

/// Largest Lyapunov exponent `ln(max |eig M|) / T` of the periodic orbit
/// starting at `initial`.
pub fn lyapunov_monodromy(
    upo: &UpoDescriptor,
    initial: &SpinConfiguration,
    model: &SpinChainModel,
    options: MonodromyOptions,
) -> Result<MonodromyReport, ClassicalError> {
    if initial.len() != model.n_sites() {
        return Err(crate::model::ModelError::WrongLength {
            expected: model.n_sites(),
            got: initial.len(),
        }
        .into());
    }
    let (m, last) = monodromy_matrix(initial, model, upo.period, options.steps_per_period)?;
    let closure = last.distance(initial);
    if closure > options.closure_tolerance {
        return Err(ClassicalError::PeriodMismatch { distance: closure });
    }
    let determinant = m.determinant();
    let eigenvalues = eigvals_general(m)?;
    let largest = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut lambda = largest.ln() / upo.period;
    if lambda * upo.period < options.zero_threshold {
        lambda = 0.0;
    }
    Ok(MonodromyReport {
        result: LyapunovResult::new(lambda, upo.frequency, LyapunovMethod::Monodromy, None),
        eigenvalues,
        determinant,
        closure,
    })
}

/// Monodromy exponent of the manifold orbit through `anchor` for a chain
/// of `model.n_sites()` spins.
pub fn lyapunov_of_anchor(
    anchor: &ManifoldPoint,
    model: &SpinChainModel,
    options: MonodromyOptions,
) -> Result<MonodromyReport, ClassicalError> {
    if anchor.manifold == Manifold::Is && !model.is_coupling_symmetric() {
        return Err(ClassicalError::AsymmetricCoupling);
    }
    let upo = super::upo::upo_descriptor(anchor, model)?;
    let initial = anchor.configuration(model.n_sites())?;
    lyapunov_monodromy(&upo, &initial, model, options)
}
