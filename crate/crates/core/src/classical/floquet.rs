//! Zeroth-order Floquet average of the coupling in the frame precessing
//! about the field at the IS frequency `|mu|`.

use super::ClassicalError;
use crate::model::{Mat3, SpinChainModel, Vec3};

/// Averaged coupling `Jbar` and field direction `u`.
///
/// `Jbar = u(x)u (3 uJu - Tr J)/2 - I (uJu - Tr J)/2`, with eigenvalue
/// `uJu` along `u` and `-(uJu - Tr J)/2` (twice) in the transverse plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetCoupling {
    pub jbar: Mat3,
    pub u: Vec3,
    /// `u J u`
    longitudinal: f64,
    /// `Tr J`
    trace: f64,
}

impl FloquetCoupling {
    /// Eigenvalue along `u`.
    pub fn lambda1(&self) -> f64 {
        self.longitudinal
    }

    /// Doubly degenerate transverse eigenvalue.
    pub fn lambda23(&self) -> f64 {
        -0.5 * (self.longitudinal - self.trace)
    }

    pub fn determinant(&self) -> f64 {
        let d = self.longitudinal - self.trace;
        0.25 * self.longitudinal * d * d
    }

    /// Closed-form adjugate, `Adj(Jbar) Jbar = det(Jbar) I`.
    pub fn adjugate(&self) -> Mat3 {
        let a = self.longitudinal;
        let t = self.trace;
        let uu = self.u * self.u.transpose();
        0.25 * (a - t) * (uu * (3.0 * a - t) - 2.0 * a * Mat3::identity())
    }

    /// `alpha = -s Adj(Jbar) s` for the IS orbit tagged by `s`.
    pub fn alpha(&self, s: &Vec3) -> f64 {
        -s.dot(&(self.adjugate() * s))
    }
}

/// Rodrigues rotation by `angle` about the unit axis `u`.
pub fn rotation(u: &Vec3, angle: f64) -> Mat3 {
    let ux = u.cross_matrix();
    let (s, c) = angle.sin_cos();
    Mat3::identity() + s * ux + (1.0 - c) * ux * ux
}

/// Closed-form rotating-frame average of the model's coupling.
///
/// Requires a nonzero field and a symmetric coupling matrix.
pub fn floquet_averaged_coupling(model: &SpinChainModel) -> Result<FloquetCoupling, ClassicalError> {
    let u = model.field_direction()?;
    if !model.is_coupling_symmetric() {
        return Err(ClassicalError::AsymmetricCoupling);
    }
    let j = model.coupling();
    let longitudinal = u.dot(&(j * u));
    let trace = j.trace();
    let uu = u * u.transpose();
    let jbar = uu * (0.5 * (3.0 * longitudinal - trace)) - Mat3::identity() * (0.5 * (longitudinal - trace));
    Ok(FloquetCoupling {
        jbar,
        u,
        longitudinal,
        trace,
    })
}
