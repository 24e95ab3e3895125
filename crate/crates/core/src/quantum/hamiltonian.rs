//! Sparse sector Hamiltonian
//! `H = 1/2 sum_j (mu . sigma_j + sigma_j J sigma_{j+1})`.
//!
//! In the symmetrized basis `|r~> = |O_r|^{-1/2} sum_{c in O_r} |c>`,
//! `<r~'|H|r~> = sqrt(|O_r| / |O_r'|) sum_{c' in O_r'} <c'|H|r>`.

use super::sector::SymmetrySector;
use super::QuantumError;
use crate::linalg::C64;
use crate::model::{SpinChainModel, SpinMagnitude};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Entries with modulus below this are dropped after merging.
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub enum SparseValues {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

/// Hermitian operator on a sector, stored as CSR.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    n_sites: usize,
    dimension: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: SparseValues,
}

/// One Pauli factor acting on a basis state: `sigma^a |z> = f_a(z) |z'>`.
#[derive(Clone, Copy)]
enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn flips(self) -> bool {
        !matches!(self, Pauli::Z)
    }

    /// Amplitude for a site with `sz = z` (`+1` up, `-1` down).
    fn factor(self, z: f64) -> C64 {
        match self {
            Pauli::X => C64::new(1.0, 0.0),
            Pauli::Y => C64::new(0.0, z),
            Pauli::Z => C64::new(z, 0.0),
        }
    }
}

/// Nonzero one- and two-site terms of the Hamiltonian (with the 1/2).
struct Terms {
    field: Vec<(Pauli, f64)>,
    bond: Vec<(Pauli, Pauli, f64)>,
}

impl Terms {
    fn new(model: &SpinChainModel) -> Self {
        let mu = model.mu();
        let j = model.coupling();
        let field = Pauli::ALL
            .iter()
            .enumerate()
            .filter(|(a, _)| mu[*a] != 0.0)
            .map(|(a, &p)| (p, 0.5 * mu[a]))
            .collect();
        let mut bond = Vec::new();
        for (a, &pa) in Pauli::ALL.iter().enumerate() {
            for (b, &pb) in Pauli::ALL.iter().enumerate() {
                if j[(a, b)] != 0.0 {
                    bond.push((pa, pb, 0.5 * j[(a, b)]));
                }
            }
        }
        Terms { field, bond }
    }

    /// Pushes `(c', <c'|H|c>)` for every term, unmerged.
    fn act(&self, c: u32, n: usize, out: &mut Vec<(u32, C64)>) {
        let z = |site: usize| if (c >> site) & 1 == 1 { 1.0 } else { -1.0 };
        for j in 0..n {
            let zj = z(j);
            for &(p, coef) in &self.field {
                let target = if p.flips() { c ^ (1 << j) } else { c };
                out.push((target, p.factor(zj) * coef));
            }
            let k = (j + 1) % n;
            let zk = z(k);
            for &(pa, pb, coef) in &self.bond {
                let mut target = c;
                if pa.flips() {
                    target ^= 1 << j;
                }
                if pb.flips() {
                    target ^= 1 << k;
                }
                out.push((target, pa.factor(zj) * pb.factor(zk) * coef));
            }
        }
    }
}

fn merge_row(mut entries: Vec<(u32, C64)>) -> Vec<(u32, C64)> {
    entries.sort_unstable_by_key(|e| e.0);
    let mut merged: Vec<(u32, C64)> = Vec::with_capacity(entries.len());
    for (col, v) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == col => last.1 += v,
            _ => merged.push((col, v)),
        }
    }
    merged.retain(|e| e.1.norm() > DROP_TOL);
    merged
}

/// Assembles the sector Hamiltonian of a spin-1/2 model.
///
/// The sector is only invariant when the coupling is symmetric (the
/// reflection maps `J` to its transpose).
pub fn build_hamiltonian(model: &SpinChainModel, sector: &SymmetrySector) -> Result<SectorOperator, QuantumError> {
    if model.spin() != SpinMagnitude::HALF {
        return Err(QuantumError::UnsupportedSpin(model.spin().value()));
    }
    if !model.is_coupling_symmetric() {
        return Err(QuantumError::AsymmetricCoupling);
    }
    let n = sector.n_sites();
    if model.n_sites() != n {
        return Err(QuantumError::SectorMismatch {
            expected: n,
            got: model.n_sites(),
        });
    }
    let terms = Terms::new(model);
    let sizes = sector.orbit_sizes();
    let rows: Vec<Vec<(u32, C64)>> = sector
        .representatives()
        .par_iter()
        .enumerate()
        .map_init(Vec::new, |buf, (r, &rep)| {
            buf.clear();
            terms.act(rep, n, buf);
            let own = sizes[r] as f64;
            let entries = buf
                .iter()
                .map(|&(target, amp)| {
                    let col = sector.index_of(target);
                    (col as u32, amp * (own / sizes[col] as f64).sqrt())
                })
                .collect();
            merge_row(entries)
        })
        .collect();

    // rows hold H[., r]; the operator is Hermitian so store the transpose
    // conjugate layout directly as rows of H^dagger = H
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    for row in &rows {
        for &(c, v) in row {
            cols.push(c);
            vals.push(v.conj());
        }
        row_ptr.push(cols.len());
    }
    let values = if vals.iter().all(|v| v.im == 0.0) {
        SparseValues::Real(vals.iter().map(|v| v.re).collect())
    } else {
        SparseValues::Complex(vals)
    };
    Ok(SectorOperator {
        n_sites: n,
        dimension: sector.dimension(),
        row_ptr,
        cols,
        values,
    })
}

impl SectorOperator {
    /// Operator from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n_sites: usize, dimension: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); dimension];
        for &(r, c, v) in triplets {
            rows[r].push((c as u32, v));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            for (c, v) in merge_row(row) {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        let values = if vals.iter().all(|v| v.im == 0.0) {
            SparseValues::Real(vals.iter().map(|v| v.re).collect())
        } else {
            SparseValues::Complex(vals)
        };
        SectorOperator {
            n_sites,
            dimension,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.values, SparseValues::Real(_))
    }

    pub fn values(&self) -> &SparseValues {
        &self.values
    }

    fn row(&self, r: usize) -> std::ops::Range<usize> {
        self.row_ptr[r]..self.row_ptr[r + 1]
    }

    fn value(&self, idx: usize) -> C64 {
        match &self.values {
            SparseValues::Real(v) => C64::new(v[idx], 0.0),
            SparseValues::Complex(v) => v[idx],
        }
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        assert_eq!(x.len(), self.dimension);
        assert_eq!(out.len(), self.dimension);
        out.par_iter_mut().enumerate().with_min_len(256).for_each(|(r, o)| {
            let mut acc = C64::new(0.0, 0.0);
            match &self.values {
                SparseValues::Real(v) => {
                    for idx in self.row(r) {
                        acc += x[self.cols[idx] as usize] * v[idx];
                    }
                }
                SparseValues::Complex(v) => {
                    for idx in self.row(r) {
                        acc += v[idx] * x[self.cols[idx] as usize];
                    }
                }
            }
            *o = acc;
        });
    }

    /// `<x|H|x>` (real part; the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let mut hx = vec![C64::new(0.0, 0.0); self.dimension];
        self.apply(x, &mut hx);
        x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dimension)
            .map(|r| self.row(r).map(|idx| self.value(idx).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dimension {
            for idx in self.row(r) {
                let c = self.cols[idx] as usize;
                let back = self
                    .row(c)
                    .find(|&k| self.cols[k] as usize == r)
                    .map(|k| self.value(k))
                    .unwrap_or_default();
                worst = worst.max((self.value(idx) - back.conj()).norm());
            }
        }
        worst
    }

    /// Dense real matrix, `None` for complex operators.
    pub fn to_dense_real(&self) -> Option<DMatrix<f64>> {
        let SparseValues::Real(v) = &self.values else {
            return None;
        };
        let mut m = DMatrix::zeros(self.dimension, self.dimension);
        for r in 0..self.dimension {
            for idx in self.row(r) {
                m[(r, self.cols[idx] as usize)] = v[idx];
            }
        }
        Some(m)
    }

    pub fn to_dense_complex(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dimension, self.dimension);
        for r in 0..self.dimension {
            for idx in self.row(r) {
                m[(r, self.cols[idx] as usize)] = self.value(idx);
            }
        }
        m
    }
}
