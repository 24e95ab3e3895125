//! One pipeline per subcommand. Each writes its files through
//! [`Artifacts`]; nothing here depends on the thread count.

use crate::artifacts::Artifacts;
use crate::config::{AverageMethod, EntropyChoice, ExperimentConfig};
use crate::error::CliError;
use rayon::prelude::*;
use scars_core::classical::{
    classical_fidelity_map, lyapunov_analytical_is, lyapunov_of_anchor, FidelityParams, LyapunovResult,
    MonodromyOptions,
};
use scars_core::quantum::{
    build_hamiltonian, build_sector, coherent_product_state, diagonalize, EigenSystem, SectorOperator, SectorState,
    SymmetrySector, DEFAULT_DENSE_MAX_SITES,
};
use scars_core::scar::{
    diagonal_ensemble_projection, eth_scatter, husimi_projection, is_family, scar_statistics, time_averaged_projection,
    time_averaged_projection_krylov, upo_trace, write_spectrum_csv, EntropySelection, Observable, UpoTrace,
};
use scars_core::{make_model, Manifold, ManifoldGrid, ProjectionMap, SpinChainModel};
use serde::Serialize;
use std::io::Write;

fn model(config: &ExperimentConfig) -> Result<SpinChainModel, CliError> {
    Ok(make_model(config.model.preset, &config.model)?)
}

fn map_grid(config: &ExperimentConfig) -> Result<ManifoldGrid, CliError> {
    Ok(ManifoldGrid::new(config.grid.n_theta, config.grid.n_phi)?)
}

fn tag(m: Manifold) -> String {
    m.to_string().to_lowercase()
}

struct Dense {
    sector: SymmetrySector,
    eigen: EigenSystem,
}

fn sector_and_operator(model: &SpinChainModel) -> Result<(SymmetrySector, SectorOperator), CliError> {
    let sector = build_sector(model.n_sites())?;
    let op = build_hamiltonian(model, &sector)?;
    Ok((sector, op))
}

fn dense(model: &SpinChainModel) -> Result<Dense, CliError> {
    let (sector, op) = sector_and_operator(model)?;
    let eigen = diagonalize(&op)?;
    Ok(Dense { sector, eigen })
}

#[derive(Serialize)]
struct MapSummary {
    manifold: Manifold,
    q_max: f64,
    q_min: f64,
    argmax_theta: f64,
    argmax_phi: f64,
}

impl MapSummary {
    fn of(map: &ProjectionMap) -> Self {
        let (i, k) = map.argmax();
        MapSummary {
            manifold: map.manifold(),
            q_max: map.max(),
            q_min: map.min(),
            argmax_theta: map.grid().theta(i),
            argmax_phi: map.grid().phi(k),
        }
    }
}

fn write_trace(out: &mut Artifacts, name: &str, trace: &UpoTrace) -> Result<(), CliError> {
    out.write_with(name, |buf| trace.write_csv(buf))
}

fn write_map(out: &mut Artifacts, name: &str, map: &ProjectionMap) -> Result<(), CliError> {
    out.write_with(name, |buf| map.write_csv(buf))
}

/// `points` log-spaced values in `[min, max]`.
fn log_space(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let ratio = max / min;
    (0..points)
        .map(|k| min * ratio.powf(k as f64 / (points - 1) as f64))
        .collect()
}

pub fn lyapunov_scan(config: &ExperimentConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let c = &config.lyapunov;
    let base = model(config)?;
    let ratio0 = base.coupling_ratio();
    if !(ratio0 > 0.0 && ratio0.is_finite()) {
        return Err(CliError::Config("the scan needs a nonzero coupling to rescale".into()));
    }
    if c.points == 0 || !(c.ratio_min > 0.0 && c.ratio_min <= c.ratio_max && c.ratio_max.is_finite()) {
        return Err(CliError::Config("lyapunov scan needs points >= 1 and 0 < ratio_min <= ratio_max".into()));
    }
    if c.manifolds.is_empty() {
        return Err(CliError::Config("lyapunov scan needs at least one manifold".into()));
    }
    let options = MonodromyOptions {
        steps_per_period: c.steps_per_period,
        ..MonodromyOptions::default()
    };
    let ratios = log_space(c.ratio_min, c.ratio_max, c.points);
    let rows: Vec<Vec<(f64, LyapunovResult, String)>> = ratios
        .par_iter()
        .map(|&r| {
            let m = base.with_coupling(base.coupling() * (r / ratio0))?;
            let mut rows = Vec::new();
            for &manifold in &c.manifolds {
                let anchor = c.anchor.point(c.theta, c.phi, m.mu(), manifold)?;
                let report = lyapunov_of_anchor(&anchor, &m, options)?;
                rows.push((r, report.result, format!("monodromy_{}", tag(manifold))));
                if manifold == Manifold::Is && c.analytical {
                    rows.push((r, lyapunov_analytical_is(&m, &anchor)?, "analytical_is".to_string()));
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, CliError>>()?;
    out.write_with("lyapunov_scan.csv", |buf| {
        writeln!(buf, "J_over_mu,lambda,omega,ratio,method")?;
        for (r, res, method) in rows.iter().flatten() {
            writeln!(buf, "{r:.12e},{:.12e},{:.12e},{:.12e},{method}", res.lambda, res.omega, res.ratio)?;
        }
        Ok(())
    })
}

pub fn spectrum(config: &ExperimentConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let c = &config.spectrum;
    let m = model(config)?;
    let n = m.n_sites();
    let cut = if c.cut == 0 { n / 2 } else { c.cut };
    if cut > n {
        return Err(CliError::Config(format!("entropy cut {cut} exceeds N = {n}")));
    }
    let selection = match c.entropy {
        EntropyChoice::None => EntropySelection::None,
        EntropyChoice::All => EntropySelection::All,
        EntropyChoice::Central => EntropySelection::Central(c.entropy_fraction),
    };
    let d = dense(&m)?;
    let points = eth_scatter(&d.eigen, &d.sector, Observable::SigmaXSite1, cut, selection)?;
    out.write_with("spectrum.csv", |buf| write_spectrum_csv(&points, buf))?;
    out.write_json("sector.json", &d.sector.metadata())?;
    if c.cache {
        let mut buf = Vec::new();
        d.eigen.write_cache(&mut buf)?;
        out.write("eigensystem.bin", buf)?;
    }
    Ok(())
}

/// `count` consecutive indices centred on the middle of the spectrum.
fn middle_indices(dimension: usize, count: usize) -> Vec<usize> {
    let count = count.min(dimension);
    let start = (dimension / 2).saturating_sub(count / 2).min(dimension - count);
    (start..start + count).collect()
}

pub fn project(config: &ExperimentConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let c = &config.project;
    let m = model(config)?;
    let grid = map_grid(config)?;
    if c.manifolds.is_empty() {
        return Err(CliError::Config("project needs at least one manifold".into()));
    }
    let d = dense(&m)?;
    let indices = if c.states.is_empty() {
        middle_indices(d.eigen.dimension(), c.count)
    } else {
        c.states.clone()
    };
    if let Some(&bad) = indices.iter().find(|&&k| k >= d.eigen.dimension()) {
        return Err(CliError::Config(format!(
            "eigenstate index {bad} out of range for dimension {}",
            d.eigen.dimension()
        )));
    }
    let mut table = Vec::new();
    for &k in &indices {
        let psi = SectorState::new(m.n_sites(), d.eigen.state(k))?;
        let mut maxima = Vec::new();
        for &manifold in &c.manifolds {
            let map = husimi_projection(&psi, &d.sector, manifold, &grid)?;
            maxima.push(map.max());
            write_map(out, &format!("project_{}_n{k:05}.csv", tag(manifold)), &map)?;
        }
        table.push((k, d.eigen.energies()[k], maxima));
    }
    let header: Vec<String> = c.manifolds.iter().map(|&mf| format!("Q_max_{}", tag(mf))).collect();
    out.write_with("projected_states.csv", |buf| {
        writeln!(buf, "n,E_n,{}", header.join(","))?;
        for (k, e, maxima) in &table {
            let q: Vec<String> = maxima.iter().map(|q| format!("{q:.12e}")).collect();
            writeln!(buf, "{k},{e:.12},{}", q.join(","))?;
        }
        Ok(())
    })?;
    for &manifold in &c.manifolds {
        let anchor = c.anchor.point(c.theta, c.phi, m.mu(), manifold)?;
        let trace = upo_trace(&anchor, &m, c.trace_samples)?;
        write_trace(out, &format!("trace_{}.csv", tag(manifold)), &trace)?;
    }
    if c.family {
        let family = is_family(&m, scars_core::scar::FAMILY_SIZE, c.trace_samples)?;
        out.write_with("upo_family_is.csv", |buf| {
            writeln!(buf, "orbit,k,theta,phi")?;
            for (i, trace) in family.iter().enumerate() {
                for (k, (theta, phi)) in trace.points.iter().enumerate() {
                    writeln!(buf, "{i},{k},{theta:.12},{phi:.12}")?;
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TimeAverageSummary {
    method: AverageMethod,
    initial_manifold: Manifold,
    anchor_theta: f64,
    anchor_phi: f64,
    /// Norm of the product state inside the sector.
    sector_weight: f64,
    horizon: Option<f64>,
    dt: Option<f64>,
    degenerate_blocks: Option<usize>,
    min_level_gap: Option<f64>,
    maps: Vec<MapSummary>,
}

pub fn time_average(config: &ExperimentConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let c = &config.time_average;
    let m = model(config)?;
    let grid = map_grid(config)?;
    if c.manifolds.is_empty() {
        return Err(CliError::Config("time-average needs at least one manifold".into()));
    }
    let method = match c.method {
        AverageMethod::Auto if m.n_sites() <= DEFAULT_DENSE_MAX_SITES => AverageMethod::Diagonal,
        AverageMethod::Auto => AverageMethod::Krylov,
        other => other,
    };
    let anchor = c.anchor.point(c.theta, c.phi, m.mu(), c.initial_manifold)?;
    let (sector, op) = sector_and_operator(&m)?;
    let projection = coherent_product_state(&anchor.configuration(m.n_sites())?, &sector)?;
    let psi0 = projection.state;
    let eigen = match method {
        AverageMethod::Diagonal | AverageMethod::Explicit => Some(diagonalize(&op)?),
        _ => None,
    };
    let mut summary = TimeAverageSummary {
        method,
        initial_manifold: c.initial_manifold,
        anchor_theta: anchor.theta,
        anchor_phi: anchor.phi,
        sector_weight: projection.weight,
        horizon: None,
        dt: None,
        degenerate_blocks: None,
        min_level_gap: None,
        maps: Vec::new(),
    };
    for &manifold in &c.manifolds {
        let map = match (method, &eigen) {
            (AverageMethod::Diagonal, Some(e)) => {
                let de = diagonal_ensemble_projection(&psi0, e, &sector, manifold, &grid)?;
                summary.degenerate_blocks = Some(de.degenerate_blocks);
                summary.min_level_gap = Some(de.min_gap);
                de.map
            }
            (AverageMethod::Explicit, Some(e)) => {
                time_averaged_projection(&psi0, e, &sector, manifold, &grid, c.horizon, c.dt)?
            }
            _ => time_averaged_projection_krylov(&psi0, &op, &sector, manifold, &grid, c.horizon, c.dt)?,
        };
        if method != AverageMethod::Diagonal {
            summary.horizon = Some(c.horizon);
            summary.dt = Some(c.dt);
        }
        summary.maps.push(MapSummary::of(&map));
        write_map(out, &format!("time_average_{}.csv", tag(manifold)), &map)?;
    }
    let trace = upo_trace(&anchor, &m, scars_core::scar::TRACE_SAMPLES)?;
    write_trace(out, &format!("initial_trace_{}.csv", tag(c.initial_manifold)), &trace)?;
    out.write_json("time_average.json", &summary)
}

#[derive(Serialize)]
struct FidelitySummary {
    anchor_theta: f64,
    anchor_phi: f64,
    samples: usize,
    half_ensemble_change: f64,
    q_max: f64,
    q_min: f64,
    q_mean: f64,
    /// `(max - min) / mean` of the map.
    relative_variation: f64,
}

pub fn classical_fidelity(config: &ExperimentConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let c = &config.classical_fidelity;
    let m = model(config)?;
    let grid = ManifoldGrid::new(c.n_theta, c.n_phi)?;
    let anchor = c.anchor.point(c.theta, c.phi, m.mu(), Manifold::Is)?;
    let params = FidelityParams {
        samples: c.samples,
        delta: c.delta,
        transient_periods: c.transient_periods,
        horizon_periods: c.horizon_periods,
        steps_per_period: c.steps_per_period,
        sample_every: c.sample_every,
        seed: config.seed,
        convergence_threshold: (c.convergence_threshold >= 0.0).then_some(c.convergence_threshold),
    };
    let result = classical_fidelity_map(&m, &anchor, &grid, &params)?;
    let map = &result.map;
    let mean = map.values().iter().sum::<f64>() / map.values().len() as f64;
    write_map(out, "classical_fidelity.csv", map)?;
    out.write_json(
        "classical_fidelity.json",
        &FidelitySummary {
            anchor_theta: anchor.theta,
            anchor_phi: anchor.phi,
            samples: c.samples,
            half_ensemble_change: result.half_ensemble_change,
            q_max: map.max(),
            q_min: map.min(),
            q_mean: mean,
            relative_variation: (map.max() - map.min()) / mean,
        },
    )
}

pub fn scar_stats(config: &ExperimentConfig, out: &mut Artifacts) -> Result<(), CliError> {
    let c = &config.scar_stats;
    if c.n_random == 0 {
        return Err(CliError::Config("scar_stats.n_random must be at least 1".into()));
    }
    let m = model(config)?;
    let grid = map_grid(config)?;
    let family = is_family(&m, c.family_size, c.trace_samples)?;
    let d = dense(&m)?;
    let stats = scar_statistics(&d.eigen, &d.sector, &family, &grid, c.n_random, config.seed)?;
    out.write_json("scar_stats.json", &stats)?;
    out.write_with("scar_scores.csv", |buf| {
        writeln!(buf, "kind,index,score")?;
        for (k, s) in stats.s_scores_eigen.iter().enumerate() {
            writeln!(buf, "eigen,{k},{s:.12e}")?;
        }
        for (k, s) in stats.s_scores_random.iter().enumerate() {
            writeln!(buf, "random,{k},{s:.12e}")?;
        }
        Ok(())
    })
}
