//! Fixed-step RK4 for the classical rotor chain
//! `ds_j/dt = B_j x s_j`, `B_j = mu + J s_{j+1} + J^T s_{j-1}`,
//! with every spin renormalized after each step.

use super::ClassicalError;
use crate::model::{classical_energy, SpinChainModel, SpinConfiguration, Vec3};
use std::io::{self, Write};

/// Step control for [`integrate_chain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Requested step; the actual step is `t_final / ceil(t_final / dt)`.
    pub dt: f64,
    /// Store every `sample_every`-th step (the final state is always stored).
    pub sample_every: usize,
    /// Allowed relative energy drift `|E(t) - E(0)| / max(|E(0)|, 1)`.
    pub energy_tolerance: f64,
}

impl StepControl {
    /// `T / 1000` steps for an orbit of period `T`.
    pub fn for_period(period: f64) -> Self {
        StepControl {
            dt: period / 1000.0,
            sample_every: 1,
            energy_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<SpinConfiguration>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpinConfiguration] {
        &self.states
    }

    pub fn last(&self) -> &SpinConfiguration {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative energy drift over the stored samples.
    pub fn energy_drift(&self, model: &SpinChainModel) -> f64 {
        let e0 = classical_energy(&self.states[0], model);
        let scale = e0.abs().max(1.0);
        self.states
            .iter()
            .map(|s| (classical_energy(s, model) - e0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// CSV rows `t,j,sx,sy,sz`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,j,sx,sy,sz")?;
        for (t, state) in self.times.iter().zip(&self.states) {
            for (j, s) in state.spins().iter().enumerate() {
                writeln!(out, "{:.12},{},{:.15},{:.15},{:.15}", t, j, s.x, s.y, s.z)?;
            }
        }
        Ok(())
    }
}

/// Right-hand side of the chain equations.
pub fn chain_rhs(model: &SpinChainModel, spins: &[Vec3], out: &mut [Vec3]) {
    let n = spins.len();
    for j in 0..n {
        let left = &spins[(j + n - 1) % n];
        let right = &spins[(j + 1) % n];
        out[j] = model.local_field(left, right).cross(&spins[j]);
    }
}

/// Reusable RK4 stepper with preallocated stage buffers.
pub struct ChainStepper<'a> {
    model: &'a SpinChainModel,
    k: [Vec<Vec3>; 4],
    stage: Vec<Vec3>,
}

impl<'a> ChainStepper<'a> {
    pub fn new(model: &'a SpinChainModel, n: usize) -> Self {
        ChainStepper {
            model,
            k: std::array::from_fn(|_| vec![Vec3::zeros(); n]),
            stage: vec![Vec3::zeros(); n],
        }
    }

    /// One RK4 step followed by renormalization.
    pub fn step(&mut self, spins: &mut [Vec3], dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        chain_rhs(self.model, spins, k1);
        for ((st, s), k) in stage.iter_mut().zip(spins.iter()).zip(k1.iter()) {
            *st = s + 0.5 * dt * k;
        }
        chain_rhs(self.model, stage, k2);
        for ((st, s), k) in stage.iter_mut().zip(spins.iter()).zip(k2.iter()) {
            *st = s + 0.5 * dt * k;
        }
        chain_rhs(self.model, stage, k3);
        for ((st, s), k) in stage.iter_mut().zip(spins.iter()).zip(k3.iter()) {
            *st = s + dt * k;
        }
        chain_rhs(self.model, stage, k4);
        for (j, s) in spins.iter_mut().enumerate() {
            *s += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            s.normalize_mut();
        }
    }
}

pub(crate) fn step_count(t_final: f64, dt: f64) -> Result<(usize, f64), ClassicalError> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(ClassicalError::InvalidHorizon(t_final));
    }
    if !(dt.is_finite() && dt > t_final * 1e-12 && dt > f64::MIN_POSITIVE) {
        return Err(ClassicalError::StepUnderflow(dt));
    }
    let n = (t_final / dt).ceil().max(1.0);
    if n > 1e12 {
        return Err(ClassicalError::StepUnderflow(dt));
    }
    Ok((n as usize, t_final / n))
}

/// Integrates the chain from `initial` up to `t_final`.
pub fn integrate_chain(
    initial: &SpinConfiguration,
    model: &SpinChainModel,
    t_final: f64,
    control: StepControl,
) -> Result<Trajectory, ClassicalError> {
    if initial.len() != model.n_sites() {
        return Err(ClassicalError::Model(crate::model::ModelError::WrongLength {
            expected: model.n_sites(),
            got: initial.len(),
        }));
    }
    let (steps, dt) = step_count(t_final, control.dt)?;
    let every = control.sample_every.max(1);
    let e0 = classical_energy(initial, model);
    let scale = e0.abs().max(1.0);

    let mut spins = initial.spins().to_vec();
    let mut stepper = ChainStepper::new(model, spins.len());
    let mut times = vec![0.0];
    let mut states = vec![initial.clone()];
    for step in 1..=steps {
        stepper.step(&mut spins, dt);
        if step % every == 0 || step == steps {
            let config = SpinConfiguration::from_raw(spins.clone());
            let drift = (classical_energy(&config, model) - e0).abs() / scale;
            if !(drift <= control.energy_tolerance) {
                return Err(ClassicalError::EnergyDrift {
                    drift,
                    tolerance: control.energy_tolerance,
                    time: step as f64 * dt,
                });
            }
            times.push(if step == steps { t_final } else { step as f64 * dt });
            states.push(config);
        }
    }
    Ok(Trajectory { times, states })
}
