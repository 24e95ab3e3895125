//! `Q = |<{s}|psi>|^2` against the raw product state, on the TI or IS
//! manifold.
//!
//! On either manifold the product-state amplitude of a basis label only
//! depends on up-counts (total for TI; on `+` and `-` sites for IS), and
//! those counts are constant on symmetry orbits. A sector state therefore
//! reduces to a short table `W(class) = sum_r psi_r sqrt|O_r|`, and the
//! overlap is a trigonometric polynomial in `phi` whose coefficients are
//! polynomials in `cos(theta/2)`, `sin(theta/2)`.

use super::ScarError;
use crate::grid::{ManifoldGrid, ProjectionMap};
use crate::linalg::C64;
use crate::model::{is_sign, Manifold, SpinConfiguration};
use crate::quantum::state::{check_sector, expand_to_full, single_spin_state};
use crate::quantum::{SectorState, SymmetrySector};
use rayon::prelude::*;

/// Precomputed evaluation of manifold projections on a fixed grid.
#[derive(Debug, Clone)]
pub struct HusimiEvaluator {
    grid: ManifoldGrid,
    manifold: Manifold,
    n_sites: usize,
    dimension: usize,
    /// Count class of every sector basis state.
    class_of: Vec<u16>,
    sqrt_orbit: Vec<f64>,
    n_classes: usize,
    /// `N - m`, the power of `e^{-i phi}` carried by each class.
    class_power: Vec<usize>,
    /// Real prefactor of each class per theta row, `[i * n_classes + class]`.
    theta_coef: Vec<f64>,
    /// `e^{-i phi_k p}` for `p = 0..=N`, `[k * (N + 1) + p]`.
    phase: Vec<C64>,
}

impl HusimiEvaluator {
    pub fn new(sector: &SymmetrySector, manifold: Manifold, grid: ManifoldGrid) -> Self {
        let n = sector.n_sites();
        let half = n / 2;
        let plus_mask: u32 = (0..n).filter(|&j| is_sign(j) > 0.0).fold(0, |m, j| m | (1 << j));
        let n_classes = match manifold {
            Manifold::Ti => n + 1,
            Manifold::Is => (half + 1) * (half + 1),
        };
        let class_of = sector
            .representatives()
            .iter()
            .map(|&r| match manifold {
                Manifold::Ti => r.count_ones() as u16,
                Manifold::Is => {
                    let k1 = (r & plus_mask).count_ones() as usize;
                    let k2 = (r & !plus_mask).count_ones() as usize;
                    (k1 * (half + 1) + k2) as u16
                }
            })
            .collect();
        let sqrt_orbit = sector.orbit_sizes().iter().map(|&s| (s as f64).sqrt()).collect();

        // class -> (up count m, power of cos(theta/2), power of sin(theta/2), sign)
        let shape: Vec<(usize, i32, i32, f64)> = (0..n_classes)
            .map(|class| match manifold {
                Manifold::Ti => (class, class as i32, (n - class) as i32, 1.0),
                Manifold::Is => {
                    let (k1, k2) = (class / (half + 1), class % (half + 1));
                    // + sites: cos|up> + e^{i phi} sin|down>;
                    // - sites: sin|up> - e^{i phi} cos|down>
                    let sign = if (half - k2) % 2 == 0 { 1.0 } else { -1.0 };
                    (k1 + k2, (k1 + half - k2) as i32, (half - k1 + k2) as i32, sign)
                }
            })
            .collect();
        let class_power = shape.iter().map(|s| n - s.0).collect();
        let mut theta_coef = Vec::with_capacity(grid.n_theta() * n_classes);
        for i in 0..grid.n_theta() {
            let (s, c) = (0.5 * grid.theta(i)).sin_cos();
            for &(_, pc, ps, sign) in &shape {
                theta_coef.push(sign * c.powi(pc) * s.powi(ps));
            }
        }
        let mut phase = Vec::with_capacity(grid.n_phi() * (n + 1));
        for k in 0..grid.n_phi() {
            let phi = grid.phi(k);
            for p in 0..=n {
                phase.push(C64::from_polar(1.0, -phi * p as f64));
            }
        }
        HusimiEvaluator {
            grid,
            manifold,
            n_sites: n,
            dimension: sector.dimension(),
            class_of,
            sqrt_orbit,
            n_classes,
            class_power,
            theta_coef,
            phase,
        }
    }

    pub fn grid(&self) -> &ManifoldGrid {
        &self.grid
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Class table `W` of a complex sector vector.
    pub fn class_weights(&self, amplitudes: &[C64]) -> Vec<C64> {
        assert_eq!(amplitudes.len(), self.dimension);
        let mut w = vec![C64::new(0.0, 0.0); self.n_classes];
        for ((a, &class), &s) in amplitudes.iter().zip(&self.class_of).zip(&self.sqrt_orbit) {
            w[class as usize] += a * s;
        }
        w
    }

    pub fn class_weights_real(&self, amplitudes: &[f64]) -> Vec<C64> {
        assert_eq!(amplitudes.len(), self.dimension);
        let mut w = vec![0.0; self.n_classes];
        for ((a, &class), &s) in amplitudes.iter().zip(&self.class_of).zip(&self.sqrt_orbit) {
            w[class as usize] += a * s;
        }
        w.into_iter().map(|x| C64::new(x, 0.0)).collect()
    }

    /// Adds `|<{s}|psi>|^2` at every grid point to `out` (flat grid order).
    pub fn accumulate(&self, weights: &[C64], out: &mut [f64]) {
        let n = self.n_sites;
        let n_phi = self.grid.n_phi();
        let mut f = vec![C64::new(0.0, 0.0); n + 1];
        for i in 0..self.grid.n_theta() {
            f.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            let coef = &self.theta_coef[i * self.n_classes..(i + 1) * self.n_classes];
            for ((w, &c), &p) in weights.iter().zip(coef).zip(&self.class_power) {
                f[p] += w * c;
            }
            let row = &mut out[i * n_phi..(i + 1) * n_phi];
            for (k, q) in row.iter_mut().enumerate() {
                let ph = &self.phase[k * (n + 1)..(k + 1) * (n + 1)];
                let amp: C64 = f.iter().zip(ph).map(|(a, b)| a * b).sum();
                *q += amp.norm_sqr();
            }
        }
    }

    /// `Q` values (flat grid order) for a class table.
    pub fn values(&self, weights: &[C64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        self.accumulate(weights, &mut out);
        out
    }

    pub fn map(&self, weights: &[C64]) -> ProjectionMap {
        ProjectionMap::new(self.grid, self.manifold, self.values(weights)).expect("grid-sized values")
    }
}

/// Projection map of a sector state via the count-class reduction.
pub fn husimi_projection(
    state: &SectorState,
    sector: &SymmetrySector,
    manifold: Manifold,
    grid: &ManifoldGrid,
) -> Result<ProjectionMap, ScarError> {
    check_sector(sector, state.n_sites(), state.dimension())?;
    let eval = HusimiEvaluator::new(sector, manifold, *grid);
    Ok(eval.map(&eval.class_weights(state.amplitudes())))
}

/// `<{s}|psi>` for full-space amplitudes, contracting one site at a time.
pub fn product_overlap(full: &[C64], config: &SpinConfiguration) -> C64 {
    let mut buf = full.to_vec();
    // the lowest bit is site 0; each pass removes it
    for s in config.spins() {
        let [up, down] = single_spin_state(s);
        let (up, down) = (up.conj(), down.conj());
        let half = buf.len() / 2;
        for k in 0..half {
            buf[k] = down * buf[2 * k] + up * buf[2 * k + 1];
        }
        buf.truncate(half);
    }
    buf[0]
}

/// Reference implementation: expands the state to the full space and
/// contracts it with the raw product state at every grid point.
pub fn husimi_projection_full(
    state: &SectorState,
    sector: &SymmetrySector,
    manifold: Manifold,
    grid: &ManifoldGrid,
) -> Result<ProjectionMap, ScarError> {
    check_sector(sector, state.n_sites(), state.dimension())?;
    let full = expand_to_full(state.amplitudes(), sector);
    let n = sector.n_sites();
    let points: Vec<(f64, f64)> = (0..grid.n_theta())
        .flat_map(|i| (0..grid.n_phi()).map(move |k| (i, k)))
        .map(|(i, k)| (grid.theta(i), grid.phi(k)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(theta, phi)| {
            let p = crate::model::ManifoldPoint::new(theta, phi, manifold)?;
            Ok(product_overlap(&full, &p.configuration(n)?).norm_sqr())
        })
        .collect::<Result<Vec<f64>, ScarError>>()?;
    Ok(ProjectionMap::new(*grid, manifold, values)?)
}

/// `Q` at one arbitrary configuration (full-space contraction).
pub fn husimi_at(state: &SectorState, sector: &SymmetrySector, config: &SpinConfiguration) -> Result<f64, ScarError> {
    check_sector(sector, state.n_sites(), state.dimension())?;
    if config.len() != sector.n_sites() {
        return Err(ScarError::Quantum(crate::quantum::QuantumError::SectorMismatch {
            expected: sector.n_sites(),
            got: config.len(),
        }));
    }
    Ok(product_overlap(&expand_to_full(state.amplitudes(), sector), config).norm_sqr())
}
