//! Periodic orbits drawn on the `(theta, phi)` chart.

use super::ScarError;
use crate::classical::floquet::rotation;
use crate::classical::upo::upo_rhs;
use crate::classical::{integrate_upo, orbit_period};
use crate::model::{angles_of, Manifold, ManifoldPoint, SpinChainModel, Vec3};
use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

/// Default number of orbits in the IS family.
pub const FAMILY_SIZE: usize = 60;
/// Default samples per orbit.
pub const TRACE_SAMPLES: usize = 400;

/// Ordered chart points of one orbit, one period, without the closing point.
#[derive(Debug, Clone, PartialEq)]
pub struct UpoTrace {
    pub manifold: Manifold,
    pub points: Vec<(f64, f64)>,
    /// The anchor is a fixed point and the trace is that single point.
    pub fixed_point: bool,
}

impl UpoTrace {
    fn from_vectors(manifold: Manifold, vectors: impl IntoIterator<Item = Vec3>) -> Self {
        UpoTrace {
            manifold,
            points: vectors.into_iter().map(|v| angles_of(&v)).collect(),
            fixed_point: false,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn unit_vectors(&self) -> Vec<Vec3> {
        self.points.iter().map(|&(t, p)| crate::model::spherical(t, p)).collect()
    }

    /// Largest great-circle angle between consecutive points (closing the loop).
    pub fn max_step(&self) -> f64 {
        let v = self.unit_vectors();
        (0..v.len())
            .map(|k| v[k].dot(&v[(k + 1) % v.len()]).clamp(-1.0, 1.0).acos())
            .fold(0.0, f64::max)
    }

    /// CSV with header `k,theta,phi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,theta,phi")?;
        for (k, (theta, phi)) in self.points.iter().enumerate() {
            writeln!(out, "{k},{theta:.12},{phi:.12}")?;
        }
        Ok(())
    }
}

/// Counter-clockwise precession of `start` about `u`, sampled uniformly.
pub fn precession_circle(u: &Vec3, start: &Vec3, samples: usize) -> Vec<Vec3> {
    (0..samples)
        .map(|k| rotation(u, TAU * k as f64 / samples as f64) * start)
        .collect()
}

/// The orbit through `anchor`, sampled at `samples` points over one period.
pub fn upo_trace(anchor: &ManifoldPoint, model: &SpinChainModel, samples: usize) -> Result<UpoTrace, ScarError> {
    if samples == 0 {
        return Err(ScarError::Invalid("trace needs at least one sample"));
    }
    let s0 = anchor.unit_vector();
    if upo_rhs(model, anchor.manifold, &s0).norm() < 1e-12 {
        return Ok(UpoTrace {
            manifold: anchor.manifold,
            points: vec![(anchor.theta, anchor.phi)],
            fixed_point: true,
        });
    }
    match anchor.manifold {
        Manifold::Is => {
            // ds/dt = mu x s is a counter-clockwise rotation about mu
            let u = model.field_direction()?;
            Ok(UpoTrace::from_vectors(Manifold::Is, precession_circle(&u, &s0, samples)))
        }
        Manifold::Ti => {
            let period = orbit_period(anchor, model)?;
            const SUBSTEPS: usize = 20;
            let orbit = integrate_upo(anchor, model, period, period / (samples * SUBSTEPS) as f64)?;
            Ok(UpoTrace::from_vectors(
                Manifold::Ti,
                orbit.iter().step_by(SUBSTEPS).take(samples).map(|(_, s)| *s),
            ))
        }
    }
}

/// IS orbits labelled by `beta = arccos(u . s)`, `beta_i = i pi / (n + 1)`
/// for `i = 1..=n`, each sampled at `samples` points.
pub fn is_family(model: &SpinChainModel, n_orbits: usize, samples: usize) -> Result<Vec<UpoTrace>, ScarError> {
    if n_orbits == 0 || samples == 0 {
        return Err(ScarError::EmptyFamily);
    }
    let u = model.field_direction()?;
    let helper = if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = u.cross(&helper).normalize();
    Ok((1..=n_orbits)
        .map(|i| {
            let beta = PI * i as f64 / (n_orbits + 1) as f64;
            let start = beta.cos() * u + beta.sin() * e1;
            UpoTrace::from_vectors(Manifold::Is, precession_circle(&u, &start, samples))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::upo::integrate_upo as integrate;
    use crate::model::spherical;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn latitude_circle_about_z() {
        let model = SpinChainModel::ising(Vec3::z(), -1.0, 8).unwrap();
        let anchor = ManifoldPoint::new(PI / 3.0, 0.0, Manifold::Is).unwrap();
        let trace = upo_trace(&anchor, &model, 100).unwrap();
        assert_eq!(trace.len(), 100);
        assert!(trace.points.iter().all(|(t, _)| (t - PI / 3.0).abs() < 1e-12));
        // counter-clockwise: phi increases
        assert!((trace.points[1].1 - TAU / 100.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_is_flagged() {
        let model = SpinChainModel::ising(Vec3::new(2.4, 0.0, 0.4), -1.8, 8).unwrap();
        let anchor = ManifoldPoint::along(model.mu(), Manifold::Is).unwrap();
        let trace = upo_trace(&anchor, &model, 400).unwrap();
        assert!(trace.fixed_point);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn ti_trace_follows_the_integrated_orbit() {
        let model = SpinChainModel::ising(Vec3::new(2.4, 0.0, 0.4), -1.8, 16).unwrap();
        let anchor = ManifoldPoint::new(FRAC_PI_2, FRAC_PI_2, Manifold::Ti).unwrap();
        let trace = upo_trace(&anchor, &model, 400).unwrap();
        let period = orbit_period(&anchor, &model).unwrap();
        let reference = integrate(&anchor, &model, period, period / 8000.0).unwrap();
        for (k, (theta, phi)) in trace.points.iter().enumerate().step_by(37) {
            let (_, s) = reference[20 * k];
            assert!((spherical(*theta, *phi) - s).norm() < 1e-9);
        }
        assert!(trace.max_step() < crate::grid::ManifoldGrid::default().theta_step());
    }

    #[test]
    fn family_covers_beta() {
        let model = SpinChainModel::xx(Vec3::new(2.4, 0.0, 0.4), -1.4, 16).unwrap();
        let u = model.mu().normalize();
        let family = is_family(&model, FAMILY_SIZE, TRACE_SAMPLES).unwrap();
        assert_eq!(family.len(), 60);
        for (i, trace) in family.iter().enumerate() {
            let beta = PI * (i + 1) as f64 / 61.0;
            assert!(trace.unit_vectors().iter().all(|v| (v.dot(&u) - beta.cos()).abs() < 1e-12));
            assert!(trace.max_step() < 2.0 * PI / 400.0 + 1e-12);
        }
        assert!(is_family(&model, 0, 400).is_err());
    }
}
