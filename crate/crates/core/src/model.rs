//! Spin-chain model family, classical configurations and the two
//! manifolds of periodic configurations (aligned and interaction
//! suppressing).
//!
//! Angle convention, used everywhere in the crate: `theta` is the polar
//! angle measured from `+z`, `phi` the azimuth measured from `+x` towards
//! `+y`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on `|s_j| = 1` for a valid configuration.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("chain length must be at least 4, got {0}")]
    ChainTooShort(usize),
    #[error("interaction-suppressing states need N divisible by 4, got N = {0}")]
    NotMultipleOfFour(usize),
    #[error("the magnetic field is zero, so the IS frequency |mu| is undefined")]
    ZeroField,
    #[error("spin magnitude must be a positive half-integer, got {0}")]
    InvalidSpin(f64),
    #[error("non-finite parameter `{0}`")]
    NonFinite(&'static str),
    #[error("polar angle {0} outside [0, pi]")]
    PolarAngle(f64),
    #[error("spin {index} has norm {norm}, expected 1")]
    NotUnit { index: usize, norm: f64 },
    #[error("configuration has {got} spins, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("unknown preset `{0}` (expected ising, xx, xxz or custom)")]
    UnknownPreset(String),
    #[error("preset {preset} does not use coupling `{key}`")]
    PresetCoupling { preset: Preset, key: &'static str },
    #[error("coupling matrix is not symmetric")]
    AsymmetricCoupling,
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Unit vector for spherical angles.
pub fn spherical(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

/// Spherical angles `(theta, phi)` of a nonzero vector, `phi` in `[0, 2pi)`.
pub fn angles_of(v: &Vec3) -> (f64, f64) {
    let r = v.norm();
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let phi = v.y.atan2(v.x).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    (theta, if phi >= TAU { 0.0 } else { phi })
}

/// Sign pattern `(+, +, -, -, ...)` of the interaction-suppressing states.
#[inline]
pub fn is_sign(site: usize) -> f64 {
    if site % 4 < 2 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    /// Translationally invariant: all spins aligned.
    Ti,
    /// Interaction suppressing: `(+s, +s, -s, -s, ...)`.
    Is,
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Manifold::Ti => "TI",
            Manifold::Is => "IS",
        })
    }
}

impl FromStr for Manifold {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ti" => Ok(Manifold::Ti),
            "is" => Ok(Manifold::Is),
            other => Err(ModelError::Config(format!("unknown manifold `{other}`"))),
        }
    }
}

/// A point `(theta, phi)` on one of the two periodic-orbit manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPoint {
    pub theta: f64,
    pub phi: f64,
    pub manifold: Manifold,
}

impl ManifoldPoint {
    pub fn new(theta: f64, phi: f64, manifold: Manifold) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(ModelError::NonFinite("anchor angle"));
        }
        if !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(ModelError::PolarAngle(theta));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(ManifoldPoint {
            theta: theta.clamp(0.0, PI),
            phi,
            manifold,
        })
    }

    /// Anchor pointing along `v` (normalized internally).
    pub fn along(v: &Vec3, manifold: Manifold) -> Result<Self> {
        if v.norm() == 0.0 || !v.iter().all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite("anchor direction"));
        }
        let (theta, phi) = angles_of(v);
        Ok(ManifoldPoint { theta, phi, manifold })
    }

    pub fn unit_vector(&self) -> Vec3 {
        spherical(self.theta, self.phi)
    }

    /// Full chain configuration on this point's manifold.
    pub fn configuration(&self, n_sites: usize) -> Result<SpinConfiguration> {
        match self.manifold {
            Manifold::Ti => Ok(make_ti_state(self, n_sites)),
            Manifold::Is => make_is_state(self, n_sites),
        }
    }
}

/// A periodic orbit on one of the manifolds: anchor plus period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpoDescriptor {
    pub anchor: ManifoldPoint,
    pub period: f64,
    pub frequency: f64,
}

impl UpoDescriptor {
    pub fn new(anchor: ManifoldPoint, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(ModelError::NonFinite("period"));
        }
        Ok(UpoDescriptor {
            anchor,
            period,
            frequency: TAU / period,
        })
    }

    /// Orbit of an IS anchor, whose frequency is exactly `|mu|`.
    pub fn interaction_suppressing(anchor: ManifoldPoint, model: &SpinChainModel) -> Result<Self> {
        let omega = model.mu().norm();
        if omega == 0.0 {
            return Err(ModelError::ZeroField);
        }
        Ok(UpoDescriptor {
            anchor: ManifoldPoint {
                manifold: Manifold::Is,
                ..anchor
            },
            period: TAU / omega,
            frequency: omega,
        })
    }
}

/// Spin magnitude stored as the integer `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinMagnitude(u32);

impl SpinMagnitude {
    pub const HALF: SpinMagnitude = SpinMagnitude(1);

    pub fn from_value(s: f64) -> Result<Self> {
        let two_s = 2.0 * s;
        if !(two_s.is_finite() && two_s >= 1.0 && (two_s - two_s.round()).abs() < 1e-12) {
            return Err(ModelError::InvalidSpin(s));
        }
        Ok(SpinMagnitude(two_s.round() as u32))
    }

    pub fn two_s(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Ising,
    Xx,
    Xxz,
    Custom,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Ising => "ising",
            Preset::Xx => "xx",
            Preset::Xxz => "xxz",
            Preset::Custom => "custom",
        })
    }
}

impl FromStr for Preset {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ising" => Ok(Preset::Ising),
            "xx" => Ok(Preset::Xx),
            "xxz" => Ok(Preset::Xxz),
            "custom" => Ok(Preset::Custom),
            other => Err(ModelError::UnknownPreset(other.to_string())),
        }
    }
}

/// Homogeneous chain `H = sum_j mu.s_j + (1/s) s_j J s_{j+1}` with
/// periodic boundary conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChainModel {
    mu: Vec3,
    coupling: Mat3,
    n_sites: usize,
    spin: SpinMagnitude,
}

impl SpinChainModel {
    pub fn new(mu: Vec3, coupling: Mat3, n_sites: usize, spin: SpinMagnitude) -> Result<Self> {
        if !mu.iter().all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite("mu"));
        }
        if !coupling.iter().all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite("J"));
        }
        if n_sites < 4 {
            return Err(ModelError::ChainTooShort(n_sites));
        }
        Ok(SpinChainModel {
            mu,
            coupling,
            n_sites,
            spin,
        })
    }

    /// Ising chain in a field: `J = J_zz z (x) z`.
    pub fn ising(mu: Vec3, jzz: f64, n_sites: usize) -> Result<Self> {
        let coupling = Mat3::from_diagonal(&Vec3::new(0.0, 0.0, jzz));
        Self::new(mu, coupling, n_sites, SpinMagnitude::HALF)
    }

    /// XX chain in a field: `J_xx = J_yy`.
    pub fn xx(mu: Vec3, jxx: f64, n_sites: usize) -> Result<Self> {
        let coupling = Mat3::from_diagonal(&Vec3::new(jxx, jxx, 0.0));
        Self::new(mu, coupling, n_sites, SpinMagnitude::HALF)
    }

    /// XXZ chain in a field: `J_xx = J_yy` plus `J_zz`.
    pub fn xxz(mu: Vec3, jxx: f64, jzz: f64, n_sites: usize) -> Result<Self> {
        let coupling = Mat3::from_diagonal(&Vec3::new(jxx, jxx, jzz));
        Self::new(mu, coupling, n_sites, SpinMagnitude::HALF)
    }

    pub fn mu(&self) -> &Vec3 {
        &self.mu
    }

    pub fn coupling(&self) -> &Mat3 {
        &self.coupling
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn spin(&self) -> SpinMagnitude {
        self.spin
    }

    pub fn with_n_sites(&self, n_sites: usize) -> Result<Self> {
        Self::new(self.mu, self.coupling, n_sites, self.spin)
    }

    pub fn with_coupling(&self, coupling: Mat3) -> Result<Self> {
        Self::new(self.mu, coupling, self.n_sites, self.spin)
    }

    /// Frobenius norm of `J` over `|mu|`.
    pub fn coupling_ratio(&self) -> f64 {
        self.coupling.norm() / self.mu.norm()
    }

    /// Unit field direction `u = mu / |mu|`.
    pub fn field_direction(&self) -> Result<Vec3> {
        let m = self.mu.norm();
        if m == 0.0 {
            return Err(ModelError::ZeroField);
        }
        Ok(self.mu / m)
    }

    /// Checks the preconditions of every IS-manifold computation.
    pub fn require_is(&self) -> Result<()> {
        if self.n_sites % 4 != 0 {
            return Err(ModelError::NotMultipleOfFour(self.n_sites));
        }
        self.field_direction().map(|_| ())
    }

    pub fn is_coupling_symmetric(&self) -> bool {
        let c = &self.coupling;
        let scale = c.norm().max(1.0);
        (c - c.transpose()).norm() <= 1e-14 * scale
    }

    /// Local field felt by a spin with neighbours `left` and `right`:
    /// the gradient of the classical energy per unit `s`.
    #[inline]
    pub fn local_field(&self, left: &Vec3, right: &Vec3) -> Vec3 {
        self.mu + self.coupling * right + self.coupling.tr_mul(left)
    }
}

/// Flat key/value description of a model, the form read from config
/// files. Missing couplings default to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub preset: Preset,
    #[serde(default)]
    pub mu_x: f64,
    #[serde(default)]
    pub mu_y: f64,
    #[serde(default)]
    pub mu_z: f64,
    #[serde(rename = "Jxx", default)]
    pub jxx: f64,
    #[serde(rename = "Jxy", default)]
    pub jxy: f64,
    #[serde(rename = "Jxz", default)]
    pub jxz: f64,
    #[serde(rename = "Jyx", default)]
    pub jyx: f64,
    #[serde(rename = "Jyy", default)]
    pub jyy: f64,
    #[serde(rename = "Jyz", default)]
    pub jyz: f64,
    #[serde(rename = "Jzx", default)]
    pub jzx: f64,
    #[serde(rename = "Jzy", default)]
    pub jzy: f64,
    #[serde(rename = "Jzz", default)]
    pub jzz: f64,
    #[serde(rename = "N")]
    pub n_sites: usize,
    #[serde(default = "default_spin")]
    pub spin: f64,
}

fn default_spin() -> f64 {
    0.5
}

impl ModelSpec {
    pub fn new(preset: Preset, mu: Vec3, n_sites: usize) -> Self {
        ModelSpec {
            preset,
            mu_x: mu.x,
            mu_y: mu.y,
            mu_z: mu.z,
            jxx: 0.0,
            jxy: 0.0,
            jxz: 0.0,
            jyx: 0.0,
            jyy: 0.0,
            jyz: 0.0,
            jzx: 0.0,
            jzy: 0.0,
            jzz: 0.0,
            n_sites,
            spin: 0.5,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ModelError::Config(e.message().to_string()))
    }

    fn coupling_entries(&self) -> [(&'static str, f64); 9] {
        [
            ("Jxx", self.jxx),
            ("Jxy", self.jxy),
            ("Jxz", self.jxz),
            ("Jyx", self.jyx),
            ("Jyy", self.jyy),
            ("Jyz", self.jyz),
            ("Jzx", self.jzx),
            ("Jzy", self.jzy),
            ("Jzz", self.jzz),
        ]
    }
}

/// Builds a validated model from a preset and its parameters.
///
/// Presets only read the couplings they define (`Jzz` for Ising, `Jxx`
/// for XX, `Jxx` and `Jzz` for XXZ; `Jyy` may repeat `Jxx`); any other
/// nonzero coupling is rejected rather than silently dropped.
pub fn make_model(preset: Preset, spec: &ModelSpec) -> Result<SpinChainModel> {
    let mu = Vec3::new(spec.mu_x, spec.mu_y, spec.mu_z);
    let spin = SpinMagnitude::from_value(spec.spin)?;
    let allowed: &[&str] = match preset {
        Preset::Ising => &["Jzz"],
        Preset::Xx => &["Jxx", "Jyy"],
        Preset::Xxz => &["Jxx", "Jyy", "Jzz"],
        Preset::Custom => &["Jxx", "Jxy", "Jxz", "Jyx", "Jyy", "Jyz", "Jzx", "Jzy", "Jzz"],
    };
    for (key, value) in spec.coupling_entries() {
        if !value.is_finite() {
            return Err(ModelError::NonFinite(key));
        }
        if value != 0.0 && !allowed.contains(&key) {
            return Err(ModelError::PresetCoupling { preset, key });
        }
    }
    if matches!(preset, Preset::Xx | Preset::Xxz) && spec.jyy != 0.0 && spec.jyy != spec.jxx {
        return Err(ModelError::PresetCoupling { preset, key: "Jyy" });
    }
    let coupling = match preset {
        Preset::Ising => Mat3::from_diagonal(&Vec3::new(0.0, 0.0, spec.jzz)),
        Preset::Xx => Mat3::from_diagonal(&Vec3::new(spec.jxx, spec.jxx, 0.0)),
        Preset::Xxz => Mat3::from_diagonal(&Vec3::new(spec.jxx, spec.jxx, spec.jzz)),
        Preset::Custom => Mat3::new(
            spec.jxx, spec.jxy, spec.jxz, spec.jyx, spec.jyy, spec.jyz, spec.jzx, spec.jzy, spec.jzz,
        ),
    };
    SpinChainModel::new(mu, coupling, spec.n_sites, spin)
}

/// A point of the classical phase space: one unit vector per site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfiguration {
    spins: Vec<Vec3>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<Vec3>) -> Result<Self> {
        for (index, s) in spins.iter().enumerate() {
            let norm = s.norm();
            if !((norm - 1.0).abs() <= UNIT_NORM_TOL) {
                return Err(ModelError::NotUnit { index, norm });
            }
        }
        Ok(SpinConfiguration { spins })
    }

    /// Normalizes every vector; fails on zero or non-finite input.
    pub fn from_directions(spins: Vec<Vec3>) -> Result<Self> {
        let spins = spins
            .into_iter()
            .map(|s| {
                let n = s.norm();
                if n > 0.0 && n.is_finite() {
                    Ok(s / n)
                } else {
                    Err(ModelError::NonFinite("spin direction"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpinConfiguration { spins })
    }

    pub(crate) fn from_raw(spins: Vec<Vec3>) -> Self {
        SpinConfiguration { spins }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[Vec3] {
        &self.spins
    }

    pub fn into_spins(self) -> Vec<Vec3> {
        self.spins
    }

    /// Largest `| |s_j| - 1 |`.
    pub fn max_norm_error(&self) -> f64 {
        self.spins.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest Euclidean distance to the TI configuration built on spin 0.
    pub fn ti_deviation(&self) -> f64 {
        let reference = self.spins[0];
        self.spins.iter().map(|s| (s - reference).norm()).fold(0.0, f64::max)
    }

    /// Largest Euclidean distance to the IS configuration built on spin 0.
    pub fn is_deviation(&self) -> f64 {
        let reference = self.spins[0];
        self.spins
            .iter()
            .enumerate()
            .map(|(j, s)| (s - is_sign(j) * reference).norm())
            .fold(0.0, f64::max)
    }

    /// Largest per-spin Euclidean distance between two configurations.
    pub fn distance(&self, other: &SpinConfiguration) -> f64 {
        self.spins
            .iter()
            .zip(&other.spins)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// All `n_sites` spins along the anchor.
pub fn make_ti_state(anchor: &ManifoldPoint, n_sites: usize) -> SpinConfiguration {
    SpinConfiguration::from_raw(vec![anchor.unit_vector(); n_sites])
}

/// Spins `nu_j * s` with `nu = (+, +, -, -, ...)`.
pub fn make_is_state(anchor: &ManifoldPoint, n_sites: usize) -> Result<SpinConfiguration> {
    if n_sites % 4 != 0 || n_sites == 0 {
        return Err(ModelError::NotMultipleOfFour(n_sites));
    }
    let s = anchor.unit_vector();
    Ok(SpinConfiguration::from_raw(
        (0..n_sites).map(|j| is_sign(j) * s).collect(),
    ))
}

/// Classical energy `E = s * sum_j [mu.s_j + s_j J s_{j+1}]`, periodic.
///
/// This is the expectation value of the quantum Hamiltonian in the
/// product coherent state pointing along the configuration.
pub fn classical_energy(config: &SpinConfiguration, model: &SpinChainModel) -> f64 {
    let spins = config.spins();
    let n = spins.len();
    let j = model.coupling();
    let sum: f64 = (0..n)
        .map(|i| {
            let si = &spins[i];
            let next = &spins[(i + 1) % n];
            model.mu().dot(si) + si.dot(&(j * next))
        })
        .sum();
    model.spin().value() * sum
}
