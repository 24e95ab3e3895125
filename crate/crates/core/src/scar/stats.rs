//! Scar scores of eigenstates against random sector states.
//!
//! The score of a map is the largest loop average of `Q / Q_max` over a
//! family of orbits; `chi` is the probability that an eigenstate outscores
//! a random state.

use super::ensemble::eigen_class_weights;
use super::husimi::HusimiEvaluator;
use super::trace::UpoTrace;
use super::ScarError;
use crate::classical::fidelity::member_rng;
use crate::grid::{ManifoldGrid, ProjectionMap};
use crate::linalg::C64;
use crate::model::Manifold;
use crate::quantum::state::check_sector;
use crate::quantum::{EigenSystem, SectorState, SymmetrySector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Bins of the exported score histograms over `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 50;

/// Random state with uniform `[0, 1]` moduli, normalized, and independent
/// uniform phases, drawn from stream `stream` of `seed`.
pub fn random_sector_state_stream(sector: &SymmetrySector, seed: u64, stream: u64) -> SectorState {
    let mut rng = member_rng(seed, stream);
    let moduli: Vec<f64> = (0..sector.dimension()).map(|_| rng.random::<f64>()).collect();
    let amps = moduli
        .into_iter()
        .map(|a| C64::from_polar(a, rng.random::<f64>() * TAU))
        .collect();
    SectorState::normalized(sector.n_sites(), amps).expect("nonzero random vector")
}

pub fn random_sector_state(sector: &SymmetrySector, seed: u64) -> SectorState {
    random_sector_state_stream(sector, seed, 0)
}

/// Interpolation stencils of a family on a fixed grid.
#[derive(Debug, Clone)]
pub struct FamilyStencil {
    loops: Vec<Vec<[(usize, f64); 4]>>,
}

impl FamilyStencil {
    pub fn new(grid: &ManifoldGrid, family: &[UpoTrace]) -> Result<Self, ScarError> {
        if family.is_empty() || family.iter().any(UpoTrace::is_empty) {
            return Err(ScarError::EmptyFamily);
        }
        Ok(FamilyStencil {
            loops: family
                .iter()
                .map(|t| t.points.iter().map(|&(th, ph)| grid.stencil(th, ph)).collect())
                .collect(),
        })
    }

    /// Interpolated loop average of flat grid values, one per orbit.
    pub fn loop_means(&self, values: &[f64]) -> Vec<f64> {
        self.loops
            .iter()
            .map(|lp| {
                let sum: f64 = lp
                    .iter()
                    .map(|st| st.iter().map(|&(idx, w)| w * values[idx]).sum::<f64>())
                    .sum();
                sum / lp.len() as f64
            })
            .collect()
    }

    /// Score of flat grid values.
    pub fn score(&self, values: &[f64]) -> Result<f64, ScarError> {
        let q_max = values.iter().copied().fold(0.0, f64::max);
        if !(q_max > 0.0) {
            return Err(ScarError::ZeroMap);
        }
        let best = self.loop_means(values).into_iter().fold(f64::NEG_INFINITY, f64::max);
        Ok(best / q_max)
    }
}

/// `max over orbits of the loop average of Q / Q_max` (bilinear on the grid).
pub fn scar_score(map: &ProjectionMap, family: &[UpoTrace]) -> Result<f64, ScarError> {
    FamilyStencil::new(map.grid(), family)?.score(map.values())
}

/// Fraction of pairs `(a, b)` with `a > b`.
pub fn chi(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let wins: usize = a.iter().map(|x| sorted.partition_point(|y| y < x)).sum();
    wins as f64 / (a.len() as f64 * b.len() as f64)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScoreHistograms {
    pub bin_edges: Vec<f64>,
    pub eigen: Vec<usize>,
    pub random: Vec<usize>,
}

fn histogram(scores: &[f64], bins: usize) -> Vec<usize> {
    let mut h = vec![0; bins];
    for &s in scores {
        let b = ((s * bins as f64).floor().max(0.0) as usize).min(bins - 1);
        h[b] += 1;
    }
    h
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScarStats {
    pub chi: f64,
    pub n_scarred: usize,
    pub n_eigen: usize,
    pub n_random: usize,
    pub seed: u64,
    pub score_histograms: ScoreHistograms,
    #[serde(skip)]
    pub s_scores_eigen: Vec<f64>,
    #[serde(skip)]
    pub s_scores_random: Vec<f64>,
}

impl ScarStats {
    pub fn from_scores(eigen: Vec<f64>, random: Vec<f64>, seed: u64) -> Self {
        let mean_random = random.iter().sum::<f64>() / random.len() as f64;
        ScarStats {
            chi: chi(&eigen, &random),
            n_scarred: eigen.iter().filter(|&&s| s > mean_random).count(),
            n_eigen: eigen.len(),
            n_random: random.len(),
            seed,
            score_histograms: ScoreHistograms {
                bin_edges: (0..=HISTOGRAM_BINS).map(|b| b as f64 / HISTOGRAM_BINS as f64).collect(),
                eigen: histogram(&eigen, HISTOGRAM_BINS),
                random: histogram(&random, HISTOGRAM_BINS),
            },
            s_scores_eigen: eigen,
            s_scores_random: random,
        }
    }

    pub fn mean_random_score(&self) -> f64 {
        self.s_scores_random.iter().sum::<f64>() / self.s_scores_random.len() as f64
    }
}

/// Scores of `n_random` random sector states (streams `0..n_random` of `seed`).
pub fn random_scores(
    sector: &SymmetrySector,
    eval: &HusimiEvaluator,
    stencil: &FamilyStencil,
    n_random: usize,
    seed: u64,
) -> Result<Vec<f64>, ScarError> {
    (0..n_random)
        .into_par_iter()
        .map(|r| {
            let psi = random_sector_state_stream(sector, seed, r as u64);
            stencil.score(&eval.values(&eval.class_weights(psi.amplitudes())))
        })
        .collect()
}

/// Scores of every eigenstate on the IS manifold.
pub fn eigen_scores(eigen: &EigenSystem, eval: &HusimiEvaluator, stencil: &FamilyStencil) -> Result<Vec<f64>, ScarError> {
    let tables = eigen_class_weights(eval, eigen);
    tables.par_iter().map(|w| stencil.score(&eval.values(w))).collect()
}

/// Scar statistics of all eigenstates against `n_random` random states,
/// scored on the IS manifold.
pub fn scar_statistics(
    eigen: &EigenSystem,
    sector: &SymmetrySector,
    family: &[UpoTrace],
    grid: &ManifoldGrid,
    n_random: usize,
    seed: u64,
) -> Result<ScarStats, ScarError> {
    if n_random == 0 {
        return Err(ScarError::Invalid("n_random must be at least 1"));
    }
    check_sector(sector, eigen.n_sites(), eigen.dimension())?;
    let eval = HusimiEvaluator::new(sector, Manifold::Is, *grid);
    let stencil = FamilyStencil::new(grid, family)?;
    let eigen_s = eigen_scores(eigen, &eval, &stencil)?;
    let random_s = random_scores(sector, &eval, &stencil, n_random, seed)?;
    Ok(ScarStats::from_scores(eigen_s, random_s, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::build_sector;

    fn circle_trace(theta: f64, n: usize) -> UpoTrace {
        UpoTrace {
            manifold: Manifold::Is,
            points: (0..n).map(|k| (theta, TAU * k as f64 / n as f64)).collect(),
            fixed_point: false,
        }
    }

    #[test]
    fn constant_map_scores_one() {
        let grid = ManifoldGrid::new(11, 20).unwrap();
        let map = ProjectionMap::new(grid, Manifold::Is, vec![0.3; grid.len()]).unwrap();
        let family = vec![circle_trace(0.4, 50), circle_trace(2.0, 33)];
        assert!((scar_score(&map, &family).unwrap() - 1.0).abs() < 1e-15);
        assert!((scar_score(&map.scaled(7.0), &family).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn indicator_of_a_trace() {
        let grid = ManifoldGrid::new(11, 20).unwrap();
        // row i = 3 is theta = 3 pi / 10
        let values = (0..grid.len()).map(|idx| if idx / 20 == 3 { 1.0 } else { 0.0 }).collect();
        let map = ProjectionMap::new(grid, Manifold::Is, values).unwrap();
        let on = circle_trace(grid.theta(3), 40);
        let off = circle_trace(grid.theta(8), 40);
        assert!((scar_score(&map, &[on.clone(), off.clone()]).unwrap() - 1.0).abs() < 1e-15);
        assert!(scar_score(&map, &[off]).unwrap().abs() < 1e-15);
        let scaled = map.scaled(0.01);
        assert!((scar_score(&scaled, &[on]).unwrap() - 1.0).abs() < 1e-13);
        assert!(matches!(scar_score(&map, &[]), Err(ScarError::EmptyFamily)));
    }

    #[test]
    fn chi_counts_strict_wins() {
        assert_eq!(chi(&[1.0, 2.0, 3.0], &[1.5, 2.5]), 3.0 / 6.0);
        assert_eq!(chi(&[1.0], &[1.0]), 0.0);
        assert_eq!(chi(&[5.0, 6.0], &[1.0, 2.0]), 1.0);
    }

    #[test]
    fn random_states_are_normalized_and_nearly_orthogonal() {
        let sector = build_sector(12).unwrap();
        let a = random_sector_state(&sector, 1);
        let b = random_sector_state(&sector, 2);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert_eq!(a, random_sector_state(&sector, 1));
        let overlap = a.inner(&b).norm_sqr();
        // |<a|b>|^2 ~ 1/d with fluctuations of the same order
        assert!(overlap < 20.0 / sector.dimension() as f64, "{overlap}");
    }

    #[test]
    fn summary_fields() {
        let stats = ScarStats::from_scores(vec![0.9, 0.5, 0.2], vec![0.4, 0.6], 3);
        assert_eq!(stats.n_scarred, 1);
        assert!((stats.chi - 3.0 / 6.0).abs() < 1e-15);
        assert_eq!(stats.score_histograms.eigen.iter().sum::<usize>(), 3);
        let json = serde_json::to_value(&stats).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 6);
        for k in ["chi", "n_scarred", "n_eigen", "n_random", "seed", "score_histograms"] {
            assert!(keys.contains(&k));
        }
    }
}
