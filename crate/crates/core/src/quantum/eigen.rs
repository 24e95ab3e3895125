//! Dense diagonalization of sector operators and the on-disk cache.

use super::hamiltonian::SectorOperator;
use super::QuantumError;
use crate::linalg::{eigh_complex, eigh_real, C64};
use nalgebra::{DMatrix, DVector};
use std::io::{Read, Write};

/// Largest chain diagonalized densely by default (dimension 8356).
pub const DEFAULT_DENSE_MAX_SITES: usize = 16;

const MAGIC_REAL: &[u8; 8] = b"SCEIGR01";
const MAGIC_COMPLEX: &[u8; 8] = b"SCEIGC01";

#[derive(Debug, Clone, PartialEq)]
pub enum EigenVectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

/// Complete eigensystem; eigenvectors are the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    n_sites: usize,
    energies: Vec<f64>,
    vectors: EigenVectors,
}

pub fn diagonalize(op: &SectorOperator) -> Result<EigenSystem, QuantumError> {
    diagonalize_with_limit(op, DEFAULT_DENSE_MAX_SITES)
}

/// Full diagonalization, refused when the chain exceeds `max_sites`.
pub fn diagonalize_with_limit(op: &SectorOperator, max_sites: usize) -> Result<EigenSystem, QuantumError> {
    if op.n_sites() > max_sites {
        return Err(QuantumError::DenseBudget {
            n_sites: op.n_sites(),
            dimension: op.dimension(),
            limit: max_sites,
        });
    }
    let (energies, vectors) = match op.to_dense_real() {
        Some(m) => {
            let (w, v) = eigh_real(m, true)?;
            (w, EigenVectors::Real(v))
        }
        None => {
            let (w, v) = eigh_complex(op.to_dense_complex(), true)?;
            (w, EigenVectors::Complex(v))
        }
    };
    Ok(EigenSystem {
        n_sites: op.n_sites(),
        energies: energies.as_slice().to_vec(),
        vectors,
    })
}

impl EigenSystem {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &EigenVectors {
        &self.vectors
    }

    pub fn is_real(&self) -> bool {
        matches!(self.vectors, EigenVectors::Real(_))
    }

    /// Eigenvector `n` as a real slice, if the system is real.
    pub fn real_state(&self, n: usize) -> Option<&[f64]> {
        match &self.vectors {
            EigenVectors::Real(v) => {
                let d = self.dimension();
                Some(&v.as_slice()[n * d..(n + 1) * d])
            }
            EigenVectors::Complex(_) => None,
        }
    }

    /// Eigenvector `n` in complex form.
    pub fn state(&self, n: usize) -> Vec<C64> {
        let d = self.dimension();
        match &self.vectors {
            EigenVectors::Real(v) => v.as_slice()[n * d..(n + 1) * d].iter().map(|&x| C64::new(x, 0.0)).collect(),
            EigenVectors::Complex(v) => v.as_slice()[n * d..(n + 1) * d].to_vec(),
        }
    }

    /// `<E_n|psi>` for every `n`.
    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        assert_eq!(psi.len(), self.dimension());
        match &self.vectors {
            EigenVectors::Real(v) => {
                let re = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.re));
                let im = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.im));
                let a = v.tr_mul(&re);
                let b = v.tr_mul(&im);
                a.iter().zip(b.iter()).map(|(&x, &y)| C64::new(x, y)).collect()
            }
            EigenVectors::Complex(v) => {
                let x = DVector::from_column_slice(psi);
                v.ad_mul(&x).as_slice().to_vec()
            }
        }
    }

    /// `sum_n c_n |E_n>`.
    pub fn combine(&self, coefficients: &[C64]) -> Vec<C64> {
        assert_eq!(coefficients.len(), self.dimension());
        match &self.vectors {
            EigenVectors::Real(v) => {
                let re = DVector::from_iterator(coefficients.len(), coefficients.iter().map(|z| z.re));
                let im = DVector::from_iterator(coefficients.len(), coefficients.iter().map(|z| z.im));
                let a = v * re;
                let b = v * im;
                a.iter().zip(b.iter()).map(|(&x, &y)| C64::new(x, y)).collect()
            }
            EigenVectors::Complex(v) => (v * DVector::from_column_slice(coefficients)).as_slice().to_vec(),
        }
    }

    /// `max_{m != n} |<E_m|E_n>|` together with `max_n |<E_n|E_n> - 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = match &self.vectors {
            EigenVectors::Real(v) => v.tr_mul(v).map(|x| C64::new(x, 0.0)),
            EigenVectors::Complex(v) => v.ad_mul(v),
        };
        let mut worst: f64 = 0.0;
        for (i, j) in (0..gram.nrows()).flat_map(|i| (0..gram.ncols()).map(move |j| (i, j))) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
        worst
    }

    /// `max_n ||H|E_n> - E_n|E_n>||`.
    pub fn max_residual(&self, op: &SectorOperator) -> f64 {
        let d = self.dimension();
        let mut out = vec![C64::new(0.0, 0.0); d];
        (0..d)
            .map(|n| {
                let v = self.state(n);
                op.apply(&v, &mut out);
                out.iter()
                    .zip(&v)
                    .map(|(h, x)| (h - x * self.energies[n]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Binary cache: magic, `N` and dimension as little-endian `u64`,
    /// energies, then the eigenvector matrix row by row (complex entries
    /// as `re, im` pairs), all little-endian `f64`.
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<(), QuantumError> {
        let d = self.dimension();
        let magic = if self.is_real() { MAGIC_REAL } else { MAGIC_COMPLEX };
        let mut buf = Vec::with_capacity(24 + 8 * d);
        buf.extend_from_slice(magic);
        buf.extend_from_slice(&(self.n_sites as u64).to_le_bytes());
        buf.extend_from_slice(&(d as u64).to_le_bytes());
        for e in &self.energies {
            buf.extend_from_slice(&e.to_le_bytes());
        }
        out.write_all(&buf)?;
        let mut row = Vec::with_capacity(16 * d);
        for i in 0..d {
            row.clear();
            match &self.vectors {
                EigenVectors::Real(v) => {
                    for j in 0..d {
                        row.extend_from_slice(&v[(i, j)].to_le_bytes());
                    }
                }
                EigenVectors::Complex(v) => {
                    for j in 0..d {
                        row.extend_from_slice(&v[(i, j)].re.to_le_bytes());
                        row.extend_from_slice(&v[(i, j)].im.to_le_bytes());
                    }
                }
            }
            out.write_all(&row)?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut input: R) -> Result<Self, QuantumError> {
        let mut header = [0u8; 24];
        input.read_exact(&mut header)?;
        let real = match &header[..8] {
            m if m == MAGIC_REAL => true,
            m if m == MAGIC_COMPLEX => false,
            _ => return Err(QuantumError::CacheFormat("unknown magic bytes".into())),
        };
        let n_sites = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
        let d = u64::from_le_bytes(header[16..24].try_into().expect("8 bytes")) as usize;
        if n_sites > 64 || d > (1 << 24) {
            return Err(QuantumError::CacheFormat(format!("implausible header N = {n_sites}, dimension = {d}")));
        }
        let mut read_f64s = |count: usize| -> Result<Vec<f64>, QuantumError> {
            let mut bytes = vec![0u8; 8 * count];
            input.read_exact(&mut bytes)?;
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect())
        };
        let energies = read_f64s(d)?;
        let vectors = if real {
            let data = read_f64s(d * d)?;
            EigenVectors::Real(DMatrix::from_row_slice(d, d, &data))
        } else {
            let data = read_f64s(2 * d * d)?;
            let z: Vec<C64> = data.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
            EigenVectors::Complex(DMatrix::from_row_slice(d, d, &z))
        };
        Ok(EigenSystem {
            n_sites,
            energies,
            vectors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> SectorOperator {
        let one = C64::new(1.0, 0.0);
        SectorOperator::from_triplets(4, 2, &[(0, 1, one), (1, 0, one)])
    }

    #[test]
    fn two_level_operator() {
        let eig = diagonalize(&pauli_x()).unwrap();
        assert_eq!(eig.energies(), &[-1.0, 1.0]);
        assert!(eig.orthonormality_error() < 1e-15);
        assert!(eig.max_residual(&pauli_x()) < 1e-15);

        let i = C64::new(0.0, 1.0);
        let y = SectorOperator::from_triplets(4, 2, &[(0, 1, -i), (1, 0, i)]);
        let eig = diagonalize(&y).unwrap();
        assert!(!eig.is_real());
        assert!((eig.energies()[0] + 1.0).abs() < 1e-15 && (eig.energies()[1] - 1.0).abs() < 1e-15);
        assert!(eig.max_residual(&y) < 1e-15);
    }

    #[test]
    fn coefficients_round_trip() {
        let i = C64::new(0.0, 1.0);
        let y = SectorOperator::from_triplets(4, 2, &[(0, 1, -i), (1, 0, i), (0, 0, C64::new(0.3, 0.0))]);
        for eig in [diagonalize(&pauli_x()).unwrap(), diagonalize(&y).unwrap()] {
            let psi = vec![C64::new(0.6, 0.1), C64::new(-0.2, 0.77)];
            let back = eig.combine(&eig.coefficients(&psi));
            assert!(back.iter().zip(&psi).all(|(a, b)| (a - b).norm() < 1e-15));
        }
    }

    #[test]
    fn cache_round_trip() {
        let i = C64::new(0.0, 1.0);
        let y = SectorOperator::from_triplets(4, 2, &[(0, 1, -i), (1, 0, i)]);
        for eig in [diagonalize(&pauli_x()).unwrap(), diagonalize(&y).unwrap()] {
            let mut buf = Vec::new();
            eig.write_cache(&mut buf).unwrap();
            assert_eq!(&buf[..5], b"SCEIG");
            let back = EigenSystem::read_cache(buf.as_slice()).unwrap();
            assert_eq!(back, eig);
        }
        assert!(matches!(
            EigenSystem::read_cache(&b"NOTACACHE_______________"[..]),
            Err(QuantumError::CacheFormat(_))
        ));
    }

    #[test]
    fn dense_budget_is_enforced() {
        let op = SectorOperator::from_triplets(20, 1, &[(0, 0, C64::new(1.0, 0.0))]);
        match diagonalize(&op) {
            Err(QuantumError::DenseBudget { limit, .. }) => assert_eq!(limit, 16),
            other => panic!("{other:?}"),
        }
    }
}
