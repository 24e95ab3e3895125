//! Momentum-zero, mirror-even sector of the spin-1/2 chain under the
//! group generated by translation by four sites and the reflection
//! `j -> 1 - j (mod N)`; the reflection maps the `(+,+,-,-)` pattern onto
//! itself, so every TI and IS product state lies in the sector.
//!
//! Basis states are `N`-bit integers, bit `j` set meaning site `j` is up.

use super::QuantumError;
use serde::Serialize;

/// Largest chain accepted by default; the lookup table has `2^N` entries.
pub const DEFAULT_MAX_SITES: usize = 20;
/// Hard ceiling regardless of configuration (labels are `u32`).
pub const ABSOLUTE_MAX_SITES: usize = 30;

const UNSET: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct SymmetrySector {
    n_sites: usize,
    /// Minimal label of every orbit, ascending.
    representatives: Vec<u32>,
    orbit_sizes: Vec<u32>,
    /// Sector index of every basis label.
    lookup: Vec<u32>,
}

/// JSON metadata of a sector.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SectorMetadata {
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub dimension: usize,
    pub generators: Vec<String>,
}

/// Translation `j -> j + shift` of the bit pattern.
#[inline]
pub fn translate(c: u32, shift: usize, n: usize) -> u32 {
    let mask = mask(n);
    let shift = shift % n;
    if shift == 0 {
        return c;
    }
    ((c << shift) | (c >> (n - shift))) & mask
}

/// Reflection `j -> 1 - j (mod N)` of the bit pattern.
#[inline]
pub fn reflect(c: u32, n: usize) -> u32 {
    // reverse_bits sends j -> N - 1 - j; a further shift by 2 gives 1 - j
    let reversed = c.reverse_bits() >> (32 - n);
    translate(reversed, 2, n)
}

#[inline]
fn mask(n: usize) -> u32 {
    if n == 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// All images `g(c)` for the `N/2` group elements (with repetitions).
pub fn orbit_images(c: u32, n: usize) -> impl Iterator<Item = u32> {
    let r = reflect(c, n);
    (0..n / 4).flat_map(move |k| [translate(c, 4 * k, n), translate(r, 4 * k, n)])
}

impl SymmetrySector {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[u32] {
        &self.representatives
    }

    pub fn orbit_sizes(&self) -> &[u32] {
        &self.orbit_sizes
    }

    /// Sector index of the orbit containing `c`.
    #[inline]
    pub fn index_of(&self, c: u32) -> usize {
        self.lookup[c as usize] as usize
    }

    pub fn full_dimension(&self) -> usize {
        1usize << self.n_sites
    }

    pub fn metadata(&self) -> SectorMetadata {
        SectorMetadata {
            n_sites: self.n_sites,
            dimension: self.dimension(),
            generators: vec!["translation by 4 sites".into(), "reflection j -> 1 - j (mod N)".into()],
        }
    }
}

/// Builds the sector for `n_sites` with the default size limit.
pub fn build_sector(n_sites: usize) -> Result<SymmetrySector, QuantumError> {
    build_sector_with_limit(n_sites, DEFAULT_MAX_SITES)
}

pub fn build_sector_with_limit(n_sites: usize, max_sites: usize) -> Result<SymmetrySector, QuantumError> {
    if n_sites < 4 || n_sites % 4 != 0 {
        return Err(QuantumError::SectorSize(n_sites));
    }
    let limit = max_sites.min(ABSOLUTE_MAX_SITES);
    if n_sites > limit {
        return Err(QuantumError::TooManySites { n_sites, limit });
    }
    let full = 1usize << n_sites;
    let mut lookup = vec![UNSET; full];
    let mut representatives = Vec::new();
    let mut orbit_sizes = Vec::new();
    let mut members = Vec::with_capacity(n_sites);
    // ascending scan: the first label met in an orbit is its minimum
    for c in 0..full as u32 {
        if lookup[c as usize] != UNSET {
            continue;
        }
        let index = representatives.len() as u32;
        members.clear();
        for image in orbit_images(c, n_sites) {
            if lookup[image as usize] == UNSET {
                lookup[image as usize] = index;
                members.push(image);
            }
        }
        representatives.push(c);
        orbit_sizes.push(members.len() as u32);
    }
    Ok(SymmetrySector {
        n_sites,
        representatives,
        orbit_sizes,
        lookup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn group_actions_permute_sites() {
        let n = 8;
        for j in 0..n {
            assert_eq!(translate(1 << j, 4, n), 1 << ((j + 4) % n));
            assert_eq!(reflect(1 << j, n), 1 << ((n + 1 - j) % n));
        }
        assert_eq!(reflect(reflect(0b1011_0010, n), n), 0b1011_0010);
    }

    #[test]
    fn brute_force_orbit_count_n8() {
        // closure of {c} under the generators, computed without orbit_images
        let n = 8;
        let mut seen = BTreeSet::new();
        let mut orbits = 0;
        for c in 0..256u32 {
            if seen.contains(&c) {
                continue;
            }
            orbits += 1;
            let mut stack = vec![c];
            while let Some(x) = stack.pop() {
                if seen.insert(x) {
                    let t = (0..n).fold(0, |acc, j| acc | (((x >> j) & 1) << ((j + 4) % n)));
                    let r = (0..n).fold(0, |acc, j| acc | (((x >> j) & 1) << ((n + 1 - j) % n)));
                    stack.push(t);
                    stack.push(r);
                }
            }
        }
        let sector = build_sector(8).unwrap();
        assert_eq!(sector.dimension(), orbits);
        assert_eq!(sector.dimension(), 76);
        let total: u32 = sector.orbit_sizes().iter().sum();
        assert_eq!(total, 256);
    }

    #[test]
    fn representatives_are_minimal() {
        let sector = build_sector(12).unwrap();
        assert_eq!(sector.dimension(), 720);
        for (i, &r) in sector.representatives().iter().enumerate() {
            assert!(orbit_images(r, 12).all(|g| g >= r && sector.index_of(g) == i));
        }
    }

    #[test]
    fn size_checks() {
        assert!(matches!(build_sector(6), Err(QuantumError::SectorSize(6))));
        assert!(matches!(
            build_sector_with_limit(16, 12),
            Err(QuantumError::TooManySites { n_sites: 16, limit: 12 })
        ));
    }
}
