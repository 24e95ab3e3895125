//! Experiment configuration: built-in defaults, then a TOML file, then
//! `--set key=value` overrides.
//!
//! A `[model]` table in the file replaces the default model except for the
//! field, chain length and spin, so couplings it omits are zero.

use crate::error::CliError;
use scars_core::model::ModelSpec;
use scars_core::{Manifold, ManifoldPoint, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    LyapunovScan,
    Spectrum,
    ProjectEigenstates,
    TimeAverage,
    ClassicalFidelity,
    ScarStats,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::LyapunovScan => "lyapunov_scan",
            Experiment::Spectrum => "spectrum",
            Experiment::ProjectEigenstates => "project_eigenstates",
            Experiment::TimeAverage => "time_average",
            Experiment::ClassicalFidelity => "classical_fidelity",
            Experiment::ScarStats => "scar_stats",
        }
    }
}

/// Named anchors of an orbit, or an explicit `(theta, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorKind {
    /// The `y` axis, `theta = phi = pi/2`.
    Y,
    /// Along the field.
    Mu,
    /// `theta` and `phi` from the config.
    Angles,
}

impl AnchorKind {
    /// `theta` and `phi` are only read for [`AnchorKind::Angles`].
    pub fn point(self, theta: f64, phi: f64, mu: &Vec3, manifold: Manifold) -> Result<ManifoldPoint, CliError> {
        let p = match self {
            AnchorKind::Y => ManifoldPoint::new(FRAC_PI_2, FRAC_PI_2, manifold)?,
            AnchorKind::Mu => ManifoldPoint::along(mu, manifold)?,
            AnchorKind::Angles => ManifoldPoint::new(theta, phi, manifold)?,
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_theta: 101, n_phi: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovConfig {
    pub manifolds: Vec<Manifold>,
    pub anchor: AnchorKind,
    pub theta: f64,
    pub phi: f64,
    /// Number of log-spaced `|J|/|mu|` values.
    pub points: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub steps_per_period: usize,
    /// Also emit the weak-coupling closed form for IS orbits.
    pub analytical: bool,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            manifolds: vec![Manifold::Is, Manifold::Ti],
            anchor: AnchorKind::Y,
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
            points: 20,
            ratio_min: 0.01,
            ratio_max: 1.0,
            steps_per_period: 1000,
            analytical: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyChoice {
    None,
    All,
    Central,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub entropy: EntropyChoice,
    /// Fraction of the spectrum used by `entropy = "central"`.
    pub entropy_fraction: f64,
    /// Sites `0..cut` form the subsystem; `0` means `N/2`.
    pub cut: usize,
    /// Also write the binary eigensystem cache.
    pub cache: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            entropy: EntropyChoice::All,
            entropy_fraction: 0.1,
            cut: 0,
            cache: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectConfig {
    pub manifolds: Vec<Manifold>,
    /// Explicit eigenstate indices; when empty, `count` states around the
    /// middle of the spectrum.
    pub states: Vec<usize>,
    pub count: usize,
    /// Anchor of the orbits drawn with the maps.
    pub anchor: AnchorKind,
    pub theta: f64,
    pub phi: f64,
    pub trace_samples: usize,
    /// Also write the IS orbit family used by the scar score.
    pub family: bool,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        ProjectConfig {
            manifolds: vec![Manifold::Ti, Manifold::Is],
            states: Vec::new(),
            count: 4,
            anchor: AnchorKind::Y,
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
            trace_samples: 400,
            family: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMethod {
    /// Diagonal ensemble when the sector fits the dense budget, Krylov otherwise.
    Auto,
    Diagonal,
    /// Explicit sampled average with eigenbasis evolution.
    Explicit,
    Krylov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeAverageConfig {
    /// Manifold of the initial coherent state.
    pub initial_manifold: Manifold,
    pub anchor: AnchorKind,
    pub theta: f64,
    pub phi: f64,
    pub manifolds: Vec<Manifold>,
    pub method: AverageMethod,
    /// Horizon and sampling step of the explicit averages.
    pub horizon: f64,
    pub dt: f64,
}

impl Default for TimeAverageConfig {
    fn default() -> Self {
        TimeAverageConfig {
            initial_manifold: Manifold::Is,
            anchor: AnchorKind::Y,
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
            manifolds: vec![Manifold::Is],
            method: AverageMethod::Auto,
            horizon: 2000.0,
            dt: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelityConfig {
    pub anchor: AnchorKind,
    pub theta: f64,
    pub phi: f64,
    pub samples: usize,
    pub delta: f64,
    pub transient_periods: f64,
    pub horizon_periods: f64,
    pub steps_per_period: usize,
    pub sample_every: usize,
    /// Largest accepted half-ensemble change of the map maximum; negative
    /// disables the check.
    pub convergence_threshold: f64,
    /// Grid of the classical map, coarser than `[grid]` by default since
    /// every point costs a full overlap per time sample.
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        FidelityConfig {
            anchor: AnchorKind::Y,
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
            samples: 200,
            delta: 0.05,
            transient_periods: 20.0,
            horizon_periods: 100.0,
            steps_per_period: 500,
            sample_every: 25,
            convergence_threshold: 0.2,
            n_theta: 51,
            n_phi: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScarStatsConfig {
    pub n_random: usize,
    pub family_size: usize,
    pub trace_samples: usize,
}

impl Default for ScarStatsConfig {
    fn default() -> Self {
        ScarStatsConfig {
            n_random: 1000,
            family_size: 60,
            trace_samples: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub project: ProjectConfig,
    #[serde(default)]
    pub time_average: TimeAverageConfig,
    #[serde(default)]
    pub classical_fidelity: FidelityConfig,
    #[serde(default)]
    pub scar_stats: ScarStatsConfig,
}

pub const DEFAULT_SEED: u64 = 1;

/// Keys every `[model]` table starts from; couplings not given are zero.
fn model_base() -> Table {
    let mut t = Table::new();
    t.insert("preset".into(), Value::from("ising"));
    t.insert("mu_x".into(), Value::from(2.4));
    t.insert("mu_y".into(), Value::from(0.0));
    t.insert("mu_z".into(), Value::from(0.4));
    t.insert("N".into(), Value::from(12));
    t.insert("spin".into(), Value::from(0.5));
    t
}

/// Model used when the config has no `[model]` table at all: the Ising
/// chain with `mu = (2.4, 0, 0.4)`, `J_zz = -1.8`, `N = 12`.
fn model_default() -> Table {
    let mut t = model_base();
    t.insert("Jzz".into(), Value::from(-1.8));
    t
}

/// Parses `key.sub=value`; the value is read as a TOML literal and falls
/// back to a bare string.
fn parse_override(text: &str) -> Result<(Vec<String>, Value), CliError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{text}` is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(|s| s.trim().to_string()).collect();
    if path.iter().any(String::is_empty) {
        return Err(CliError::Config(format!("override `{text}` has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::from(raw));
    Ok((path, value))
}

fn set_path(table: &mut Table, path: &[String], value: Value) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("nonempty path");
    let mut cur = table;
    for key in parents {
        let entry = cur.entry(key.clone()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{key}` is not a table")))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

impl ExperimentConfig {
    /// Resolves the config text (may be empty), then the overrides, then
    /// the explicit seed.
    pub fn resolve(text: &str, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        let model = match table.remove("model") {
            None => model_default(),
            Some(Value::Table(user)) => {
                let mut base = model_base();
                base.extend(user);
                base
            }
            Some(_) => return Err(CliError::Config("`model` must be a table".into())),
        };
        table.insert("model".into(), Value::Table(model));
        // overrides edit the resolved model, so `model.N=8` keeps the couplings
        for o in overrides {
            let (path, value) = parse_override(o)?;
            set_path(&mut table, &path, value)?;
        }
        if let Some(s) = seed {
            table.insert("seed".into(), Value::Integer(s as i64));
        }
        table.entry("seed").or_insert(Value::Integer(DEFAULT_SEED as i64));
        let config: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        Ok(config)
    }

    pub fn check_experiment(&self, running: Experiment) -> Result<(), CliError> {
        match self.experiment {
            Some(e) if e != running => Err(CliError::Config(format!(
                "config is for experiment `{}` but `{}` was requested",
                e.name(),
                running.name()
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_fully_defaulted() {
        let c = ExperimentConfig::resolve("", &[], None).unwrap();
        assert_eq!(c.seed, 1);
        assert_eq!(c.model.n_sites, 12);
        assert_eq!(c.model.jzz, -1.8);
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.scar_stats.n_random, 1000);
    }

    #[test]
    fn user_model_replaces_default_couplings() {
        let c = ExperimentConfig::resolve("[model]\npreset = \"xx\"\nJxx = -1.4\n", &[], None).unwrap();
        assert_eq!(c.model.jzz, 0.0);
        assert_eq!(c.model.jxx, -1.4);
        assert_eq!(c.model.mu_x, 2.4);
    }

    #[test]
    fn overrides_and_seed_win() {
        let text = "seed = 5\n[model]\nN = 8\n[scar_stats]\nn_random = 10\n";
        let sets = ["model.N=16".to_string(), "scar_stats.n_random = 0".to_string()];
        let c = ExperimentConfig::resolve(text, &sets, Some(9)).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.model.n_sites, 16);
        assert_eq!(c.scar_stats.n_random, 0);
        let c = ExperimentConfig::resolve(text, &["time_average.method=krylov".into()], None).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.time_average.method, AverageMethod::Krylov);
    }

    #[test]
    fn model_override_keeps_default_couplings() {
        let c = ExperimentConfig::resolve("", &["model.N=8".into()], None).unwrap();
        assert_eq!((c.model.n_sites, c.model.jzz), (8, -1.8));
    }

    #[test]
    fn unknown_keys_fail() {
        for text in ["colour = 1", "[model]\nJab = 1.0", "[grid]\nn_x = 3", "[spectrum]\nentropy = \"some\""] {
            assert!(ExperimentConfig::resolve(text, &[], None).is_err(), "{text}");
        }
        assert!(ExperimentConfig::resolve("", &["novalue".into()], None).is_err());
        assert!(ExperimentConfig::resolve("[time_average]\ntheta = 1.0\nthet = 2.0", &[], None).is_err());
    }

    #[test]
    fn anchor_fields() {
        let c = ExperimentConfig::resolve("[time_average]\nanchor = \"mu\"\n", &[], None).unwrap();
        assert_eq!(c.time_average.anchor, AnchorKind::Mu);
        let c = ExperimentConfig::resolve("[lyapunov]\nanchor = \"angles\"\ntheta = 1.0\nphi = 0.5\n", &[], None).unwrap();
        assert_eq!(c.lyapunov.theta, 1.0);
    }

    #[test]
    fn experiment_tag_must_match() {
        let c = ExperimentConfig::resolve("experiment = \"spectrum\"", &[], None).unwrap();
        assert!(c.check_experiment(Experiment::Spectrum).is_ok());
        assert!(c.check_experiment(Experiment::ScarStats).is_err());
    }
}
