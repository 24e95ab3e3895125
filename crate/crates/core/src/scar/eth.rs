//! Per-eigenstate local expectation values and entanglement.

use super::ScarError;
use crate::quantum::observables::{entanglement_entropy, entanglement_entropy_real, sigma_x, sigma_x_real, sigma_z};
use crate::quantum::state::{check_sector, expand_to_full, expand_to_full_real};
use crate::quantum::{EigenSystem, SymmetrySector};
use rayon::prelude::*;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `sigma^x` on the first site.
    SigmaXSite1,
    /// `sigma^z` on the first site.
    SigmaZSite1,
}

/// Which eigenstates get an entanglement entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropySelection {
    None,
    All,
    /// The central fraction of the spectrum by index.
    Central(f64),
}

impl EntropySelection {
    pub fn range(&self, dimension: usize) -> std::ops::Range<usize> {
        match *self {
            EntropySelection::None => 0..0,
            EntropySelection::All => 0..dimension,
            EntropySelection::Central(f) => {
                let width = ((f.clamp(0.0, 1.0) * dimension as f64).round() as usize).max(1);
                let start = (dimension - width.min(dimension)) / 2;
                start..start + width.min(dimension)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EthPoint {
    pub index: usize,
    pub energy: f64,
    pub expectation: f64,
    pub entropy: Option<f64>,
}

/// `(E_n, <E_n|O|E_n>, S_n)` for every eigenstate; the entropy is taken
/// for sites `0..cut` on the selected states.
pub fn eth_scatter(
    eigen: &EigenSystem,
    sector: &SymmetrySector,
    observable: Observable,
    cut: usize,
    entropy: EntropySelection,
) -> Result<Vec<EthPoint>, ScarError> {
    check_sector(sector, eigen.n_sites(), eigen.dimension())?;
    let n = sector.n_sites();
    let with_entropy = entropy.range(eigen.dimension());
    (0..eigen.dimension())
        .into_par_iter()
        .map(|k| {
            let want = with_entropy.contains(&k);
            let (expectation, s) = match eigen.real_state(k) {
                Some(v) => {
                    let full = expand_to_full_real(v, sector);
                    let expectation = match observable {
                        Observable::SigmaXSite1 => sigma_x_real(&full, 0),
                        Observable::SigmaZSite1 => full
                            .iter()
                            .enumerate()
                            .map(|(c, a)| if c & 1 == 1 { a * a } else { -a * a })
                            .sum(),
                    };
                    let s = if want { Some(entanglement_entropy_real(&full, n, cut)?) } else { None };
                    (expectation, s)
                }
                None => {
                    let full = expand_to_full(&eigen.state(k), sector);
                    let expectation = match observable {
                        Observable::SigmaXSite1 => sigma_x(&full, 0),
                        Observable::SigmaZSite1 => sigma_z(&full, 0),
                    };
                    let s = if want { Some(entanglement_entropy(&full, n, cut)?) } else { None };
                    (expectation, s)
                }
            };
            Ok(EthPoint {
                index: k,
                energy: eigen.energies()[k],
                expectation,
                entropy: s,
            })
        })
        .collect()
}

/// CSV with header `n,E_n,sx_expectation,entropy`; missing entropies are `nan`.
pub fn write_spectrum_csv<W: Write>(points: &[EthPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "n,E_n,sx_expectation,entropy")?;
    for p in points {
        match p.entropy {
            Some(s) => writeln!(out, "{},{:.12},{:.12},{:.12}", p.index, p.energy, p.expectation, s)?,
            None => writeln!(out, "{},{:.12},{:.12},nan", p.index, p.energy, p.expectation)?,
        }
    }
    Ok(())
}
