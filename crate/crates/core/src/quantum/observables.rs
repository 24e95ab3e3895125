//! Local observables and half-chain entanglement of full-space states.

use super::QuantumError;
use crate::linalg::{eigh_complex, eigh_real, C64};
use nalgebra::DMatrix;

fn check_len(len: usize, n_sites: usize) -> Result<(), QuantumError> {
    if len != 1usize << n_sites {
        return Err(QuantumError::SectorMismatch {
            expected: n_sites,
            got: len.trailing_zeros() as usize,
        });
    }
    Ok(())
}

/// `<psi|sigma^x_site|psi>` for full-space amplitudes.
pub fn sigma_x(psi: &[C64], site: usize) -> f64 {
    let bit = 1usize << site;
    psi.iter().enumerate().map(|(c, a)| (psi[c ^ bit].conj() * a).re).sum()
}

pub fn sigma_x_real(psi: &[f64], site: usize) -> f64 {
    let bit = 1usize << site;
    psi.iter().enumerate().map(|(c, a)| psi[c ^ bit] * a).sum()
}

/// `<psi|sigma^z_site|psi>`, bit set meaning `+1`.
pub fn sigma_z(psi: &[C64], site: usize) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(c, a)| if (c >> site) & 1 == 1 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

fn entropy_of(spectrum: impl Iterator<Item = f64>) -> f64 {
    spectrum.filter(|&p| p > 1e-300).map(|p| -p * p.ln()).sum()
}

/// Von Neumann entropy (natural log) of sites `0..cut`.
pub fn entanglement_entropy(psi: &[C64], n_sites: usize, cut: usize) -> Result<f64, QuantumError> {
    check_len(psi.len(), n_sites)?;
    if cut == 0 || cut >= n_sites {
        return Ok(0.0);
    }
    // psi(c) with c = low + 2^cut * high, column-major (low, high) matrix
    let a = DMatrix::from_column_slice(1 << cut, 1 << (n_sites - cut), psi);
    let (w, _) = if cut <= n_sites - cut {
        eigh_complex(&a * a.adjoint(), false)?
    } else {
        eigh_complex(a.adjoint() * &a, false)?
    };
    Ok(entropy_of(w.iter().copied()))
}

pub fn entanglement_entropy_real(psi: &[f64], n_sites: usize, cut: usize) -> Result<f64, QuantumError> {
    check_len(psi.len(), n_sites)?;
    if cut == 0 || cut >= n_sites {
        return Ok(0.0);
    }
    let a = DMatrix::from_column_slice(1 << cut, 1 << (n_sites - cut), psi);
    let (w, _) = if cut <= n_sites - cut {
        eigh_real(&a * a.transpose(), false)?
    } else {
        eigh_real(a.transpose() * &a, false)?
    };
    Ok(entropy_of(w.iter().copied()))
}

/// Entropy of the contiguous half chain `0..N/2`.
pub fn half_chain_entropy(psi: &[C64], n_sites: usize) -> Result<f64, QuantumError> {
    entanglement_entropy(psi, n_sites, n_sites / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn bell_pair_has_ln2() {
        let h = 0.5f64.sqrt();
        let psi = [h, 0.0, 0.0, h];
        assert!((entanglement_entropy_real(&psi, 2, 1).unwrap() - LN_2).abs() < 1e-14);
        let z: Vec<C64> = psi.iter().map(|&x| C64::new(0.0, x)).collect();
        assert!((entanglement_entropy(&z, 2, 1).unwrap() - LN_2).abs() < 1e-14);
    }

    #[test]
    fn product_state_is_unentangled() {
        // |up, down, (up+down)/sqrt2, up> : bits 0..3
        let mut psi = vec![0.0; 16];
        let h = 0.5f64.sqrt();
        psi[0b1001] = h;
        psi[0b1101] = h;
        assert!(entanglement_entropy_real(&psi, 4, 2).unwrap().abs() < 1e-14);
        assert!(entanglement_entropy_real(&psi, 4, 3).unwrap().abs() < 1e-14);
        assert!((sigma_x_real(&psi, 2) - 1.0).abs() < 1e-15);
        assert!(sigma_x_real(&psi, 0).abs() < 1e-15);
        let z: Vec<C64> = psi.iter().map(|&x| C64::new(x, 0.0)).collect();
        assert!((sigma_z(&z, 0) - 1.0).abs() < 1e-15 && (sigma_z(&z, 1) + 1.0).abs() < 1e-15);
        assert!((sigma_x(&z, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(entanglement_entropy_real(&[1.0, 0.0, 0.0], 2, 1).is_err());
    }
}
