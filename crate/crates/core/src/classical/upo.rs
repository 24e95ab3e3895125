//! Single-spin dynamics on the TI and IS manifolds and their periods.
//!
//! TI: `ds/dt = (mu + (J + J^T) s) x s`; IS: `ds/dt = mu x s`.

use super::ClassicalError;
use crate::model::{Manifold, ManifoldPoint, ModelError, SpinChainModel, UpoDescriptor, Vec3};
use std::f64::consts::TAU;

/// Return distance accepted by [`orbit_period`].
pub const PERIOD_TOLERANCE: f64 = 1e-8;

/// Steps per characteristic rotation time in the period search.
const SEARCH_STEPS_PER_TURN: f64 = 2000.0;
/// Search horizon in characteristic rotation times.
const SEARCH_TURNS: f64 = 2000.0;

#[inline]
pub fn upo_rhs(model: &SpinChainModel, manifold: Manifold, s: &Vec3) -> Vec3 {
    match manifold {
        Manifold::Ti => model.local_field(s, s).cross(s),
        Manifold::Is => model.mu().cross(s),
    }
}

fn rk4(model: &SpinChainModel, manifold: Manifold, s: &Vec3, dt: f64) -> Vec3 {
    let k1 = upo_rhs(model, manifold, s);
    let k2 = upo_rhs(model, manifold, &(s + 0.5 * dt * k1));
    let k3 = upo_rhs(model, manifold, &(s + 0.5 * dt * k2));
    let k4 = upo_rhs(model, manifold, &(s + dt * k3));
    (s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).normalize()
}

/// Upper bound on the angular speed of the single-spin flow.
fn rotation_scale(model: &SpinChainModel) -> f64 {
    model.mu().norm() + 2.0 * model.coupling().norm()
}

/// Samples `(t, s(t))` of the single-spin orbit through `anchor`,
/// uniformly spaced with step close to `dt`, including both endpoints.
pub fn integrate_upo(
    anchor: &ManifoldPoint,
    model: &SpinChainModel,
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, Vec3)>, ClassicalError> {
    if anchor.manifold == Manifold::Is {
        model.field_direction()?;
    }
    let (steps, h) = super::integrator::step_count(t_final, dt)?;
    let mut s = anchor.unit_vector();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, s));
    for k in 1..=steps {
        s = rk4(model, anchor.manifold, &s, h);
        out.push((if k == steps { t_final } else { k as f64 * h }, s));
    }
    Ok(out)
}

/// Period of the single-spin orbit through `anchor`.
///
/// IS orbits precess uniformly and return `2pi/|mu|` directly. TI
/// orbits are integrated until the first upward crossing of the plane
/// through the anchor normal to its velocity, refined by bisection.
pub fn orbit_period(anchor: &ManifoldPoint, model: &SpinChainModel) -> Result<f64, ClassicalError> {
    match anchor.manifold {
        Manifold::Is => {
            let omega = model.mu().norm();
            if omega == 0.0 {
                return Err(ModelError::ZeroField.into());
            }
            Ok(TAU / omega)
        }
        Manifold::Ti => ti_period(anchor, model),
    }
}

fn ti_period(anchor: &ManifoldPoint, model: &SpinChainModel) -> Result<f64, ClassicalError> {
    let s0 = anchor.unit_vector();
    let v0 = upo_rhs(model, Manifold::Ti, &s0);
    if v0.norm() < 1e-10 {
        return Err(ClassicalError::FixedPoint);
    }
    let scale = rotation_scale(model);
    let h = TAU / scale / SEARCH_STEPS_PER_TURN;
    let horizon = SEARCH_TURNS * TAU / scale;
    let section = |s: &Vec3| v0.dot(&(s - s0));
    // coarse proximity so that far-away crossings of the plane are skipped
    let near = 50.0 * h * v0.norm();

    let mut s = s0;
    let mut t = 0.0;
    let mut g = 0.0;
    while t < horizon {
        let next = rk4(model, Manifold::Ti, &s, h);
        let g_next = section(&next);
        if g < 0.0 && g_next >= 0.0 && (next - s0).norm() < near {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if section(&rk4(model, Manifold::Ti, &s, mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let period = t + tau;
            let distance = (rk4(model, Manifold::Ti, &s, tau) - s0).norm();
            if distance > PERIOD_TOLERANCE {
                return Err(ClassicalError::PeriodMismatch { distance });
            }
            return Ok(period);
        }
        s = next;
        g = g_next;
        t += h;
    }
    Err(ClassicalError::NoReturn { horizon })
}

/// Anchor plus period for the orbit through `anchor`.
pub fn upo_descriptor(anchor: &ManifoldPoint, model: &SpinChainModel) -> Result<UpoDescriptor, ClassicalError> {
    match anchor.manifold {
        Manifold::Is => Ok(UpoDescriptor::interaction_suppressing(*anchor, model)?),
        Manifold::Ti => Ok(UpoDescriptor::new(*anchor, orbit_period(anchor, model)?)?),
    }
}
