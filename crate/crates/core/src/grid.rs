//! Regular `(theta, phi)` grids on a manifold chart and scalar maps
//! sampled on them.

use crate::model::{spherical, Manifold, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 2 polar and 1 azimuthal sample, got {n_theta}x{n_phi}")]
    TooSmall { n_theta: usize, n_phi: usize },
    #[error("map has {got} values for a grid of {expected} points")]
    Shape { expected: usize, got: usize },
}

/// `n_theta` polar samples covering `[0, pi]` including both poles and
/// `n_phi` azimuthal samples covering `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldGrid {
    n_theta: usize,
    n_phi: usize,
}

impl Default for ManifoldGrid {
    fn default() -> Self {
        ManifoldGrid {
            n_theta: 101,
            n_phi: 201,
        }
    }
}

impl ManifoldGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self, GridError> {
        if n_theta < 2 || n_phi < 1 {
            return Err(GridError::TooSmall { n_theta, n_phi });
        }
        Ok(ManifoldGrid { n_theta, n_phi })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta_step(&self) -> f64 {
        PI / (self.n_theta - 1) as f64
    }

    pub fn phi_step(&self) -> f64 {
        TAU / self.n_phi as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        if i + 1 == self.n_theta {
            PI
        } else {
            i as f64 * self.theta_step()
        }
    }

    pub fn phi(&self, k: usize) -> f64 {
        k as f64 * self.phi_step()
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|i| self.theta(i)).collect()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi).map(|k| self.phi(k)).collect()
    }

    /// Row-major (theta-major) flat index.
    #[inline]
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n_phi + k
    }

    /// Unit vectors of all grid points in flat order.
    pub fn unit_vectors(&self) -> Vec<Vec3> {
        let phis = self.phis();
        (0..self.n_theta)
            .flat_map(|i| {
                let theta = self.theta(i);
                phis.iter().map(move |&phi| spherical(theta, phi))
            })
            .collect()
    }

    /// Flat indices and weights of the bilinear stencil at `(theta, phi)`,
    /// periodic in `phi`.
    pub fn stencil(&self, theta: f64, phi: f64) -> [(usize, f64); 4] {
        let x = (theta.clamp(0.0, PI) / self.theta_step()).min((self.n_theta - 1) as f64);
        let i0 = (x.floor() as usize).min(self.n_theta - 2);
        let fx = x - i0 as f64;
        let y = phi.rem_euclid(TAU) / self.phi_step();
        let k0 = (y.floor() as usize) % self.n_phi;
        let fy = y - y.floor();
        let k1 = (k0 + 1) % self.n_phi;
        [
            (self.index(i0, k0), (1.0 - fx) * (1.0 - fy)),
            (self.index(i0, k1), (1.0 - fx) * fy),
            (self.index(i0 + 1, k0), fx * (1.0 - fy)),
            (self.index(i0 + 1, k1), fx * fy),
        ]
    }

    /// Same grid with half the spacing in both directions.
    pub fn refined(&self) -> ManifoldGrid {
        ManifoldGrid {
            n_theta: 2 * self.n_theta - 1,
            n_phi: 2 * self.n_phi,
        }
    }
}

/// Scalar field `Q(theta, phi)` on a manifold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMap {
    grid: ManifoldGrid,
    manifold: Manifold,
    values: Vec<f64>,
}

impl ProjectionMap {
    pub fn new(grid: ManifoldGrid, manifold: Manifold, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Shape {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(ProjectionMap {
            grid,
            manifold,
            values,
        })
    }

    pub fn grid(&self) -> &ManifoldGrid {
        &self.grid
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, k)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid indices `(i, k)` of the largest value (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (idx, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = idx;
            }
        }
        (best / self.grid.n_phi, best % self.grid.n_phi)
    }

    pub fn scaled(&self, factor: f64) -> ProjectionMap {
        ProjectionMap {
            grid: self.grid,
            manifold: self.manifold,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Bilinear interpolation, periodic in `phi`.
    pub fn interpolate(&self, theta: f64, phi: f64) -> f64 {
        self.grid
            .stencil(theta, phi)
            .iter()
            .map(|&(idx, w)| w * self.values[idx])
            .sum()
    }

    /// Value at the point of the sphere closest to `v`.
    pub fn interpolate_vector(&self, v: &Vec3) -> f64 {
        let (theta, phi) = crate::model::angles_of(v);
        self.interpolate(theta, phi)
    }

    /// CSV with header `theta,phi,Q`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,phi,Q")?;
        for i in 0..self.grid.n_theta {
            let theta = self.grid.theta(i);
            for k in 0..self.grid.n_phi {
                writeln!(out, "{:.12},{:.12},{:.12e}", theta, self.grid.phi(k), self.get(i, k))?;
            }
        }
        Ok(())
    }
}
