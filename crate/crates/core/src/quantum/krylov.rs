//! Lanczos propagation `e^{-iHt}|psi>` with a sparse operator, for
//! sectors too large for dense diagonalization.

use super::hamiltonian::SectorOperator;
use super::state::{l2, SectorState};
use super::QuantumError;
use crate::linalg::{eigh_real, C64};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Largest Krylov subspace per substep.
    pub max_dim: usize,
    /// Upper bound on `||H|| dt` for a single substep.
    pub max_phase: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        // (||H|| dt)^m / m! < 1e-20 for m = 40, ||H|| dt = 5
        KrylovOptions {
            max_dim: 40,
            max_phase: 5.0,
        }
    }
}

/// Reusable propagator; caches the operator norm bound.
pub struct KrylovPropagator<'a> {
    op: &'a SectorOperator,
    norm: f64,
    options: KrylovOptions,
}

impl<'a> KrylovPropagator<'a> {
    pub fn new(op: &'a SectorOperator, options: KrylovOptions) -> Self {
        KrylovPropagator {
            op,
            norm: op.norm_bound(),
            options,
        }
    }

    /// Evolves `state` by `t` (either sign).
    pub fn evolve(&self, state: &SectorState, t: f64) -> Result<SectorState, QuantumError> {
        if state.dimension() != self.op.dimension() || state.n_sites() != self.op.n_sites() {
            return Err(QuantumError::SectorMismatch {
                expected: self.op.n_sites(),
                got: state.n_sites(),
            });
        }
        if t == 0.0 || self.norm == 0.0 {
            return Ok(state.clone());
        }
        let substeps = ((self.norm * t.abs()) / self.options.max_phase).ceil().max(1.0) as usize;
        let dt = t / substeps as f64;
        let mut psi = state.amplitudes().to_vec();
        for _ in 0..substeps {
            psi = self.step(&psi, dt)?;
        }
        SectorState::normalized(state.n_sites(), psi)
    }

    fn step(&self, psi: &[C64], dt: f64) -> Result<Vec<C64>, QuantumError> {
        let d = psi.len();
        let m_max = self.options.max_dim.min(d).max(1);
        let beta0 = l2(psi);
        let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|a| a / beta0).collect()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta = Vec::with_capacity(m_max);
        let mut w = vec![C64::new(0.0, 0.0); d];
        let breakdown = 1e-13 * self.norm.max(1.0);
        loop {
            let k = basis.len() - 1;
            self.op.apply(&basis[k], &mut w);
            let a: f64 = basis[k].iter().zip(&w).map(|(v, x)| (v.conj() * x).re).sum();
            alpha.push(a);
            // full reorthogonalization keeps the basis orthonormal
            for _ in 0..2 {
                for v in &basis {
                    let proj: C64 = v.iter().zip(&w).map(|(vi, xi)| vi.conj() * xi).sum();
                    w.iter_mut().zip(v).for_each(|(x, vi)| *x -= proj * vi);
                }
            }
            let b = l2(&w);
            if basis.len() == m_max || b < breakdown {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let mut tri = DMatrix::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alpha[i];
            if i + 1 < m {
                tri[(i + 1, i)] = beta[i];
                tri[(i, i + 1)] = beta[i];
            }
        }
        let (theta, v) = eigh_real(tri, true)?;
        // e^{-i T dt} e_1 = V diag(e^{-i theta dt}) V^T e_1
        let coeffs: Vec<C64> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| C64::from_polar(v[(i, k)] * v[(0, k)], -theta[k] * dt))
                    .sum::<C64>()
                    * beta0
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (c, vec) in coeffs.iter().zip(&basis) {
            out.iter_mut().zip(vec).for_each(|(o, x)| *o += c * x);
        }
        Ok(out)
    }
}

/// One-shot convenience wrapper around [`KrylovPropagator`].
pub fn krylov_evolve(
    op: &SectorOperator,
    state: &SectorState,
    t: f64,
    options: KrylovOptions,
) -> Result<SectorState, QuantumError> {
    KrylovPropagator::new(op, options).evolve(state, t)
}
