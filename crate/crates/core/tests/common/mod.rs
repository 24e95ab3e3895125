//! Independent full-space construction shared by the oracle tests: explicit
//! 2x2 Pauli matrices, site permutations and dense product vectors.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use scars_core::quantum::SymmetrySector;
use scars_core::{Manifold, ManifoldPoint, SpinChainModel, SpinConfiguration, Vec3};

pub const MU: [f64; 3] = [2.4, 0.0, 0.4];

pub fn models(n: usize) -> Vec<SpinChainModel> {
    let mu = Vec3::from(MU);
    vec![
        SpinChainModel::ising(mu, -1.8, n).unwrap(),
        SpinChainModel::xx(mu, -1.4, n).unwrap(),
        SpinChainModel::xxz(mu, -0.4, -1.8, n).unwrap(),
    ]
}

/// Pauli matrices in the (up, down) basis.
pub fn pauli(a: usize) -> [[C64; 2]; 2] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match a {
        0 => [[o, l], [l, o]],
        1 => [[o, -i], [i, o]],
        _ => [[l, o], [o, -l]],
    }
}

/// Local index of site `j` in label `c`: bit set = up = index 0.
pub fn local(c: usize, j: usize) -> usize {
    1 - ((c >> j) & 1)
}

/// Adds `coef * (op_1 (x) op_2 ...)` acting on `sites` into `h`.
pub fn add_term(h: &mut DMatrix<C64>, n: usize, sites: &[(usize, [[C64; 2]; 2])], coef: f64) {
    for c in 0..1usize << n {
        // enumerate every output pattern on the acted sites
        for out_bits in 0..1usize << sites.len() {
            let mut target = c;
            let mut amp = C64::new(coef, 0.0);
            for (k, (site, m)) in sites.iter().enumerate() {
                let out_local = (out_bits >> k) & 1;
                amp *= m[out_local][local(c, *site)];
                target = (target & !(1 << site)) | ((1 - out_local) << site);
            }
            if amp.norm() > 0.0 {
                h[(target, c)] += amp;
            }
        }
    }
}

pub fn full_hamiltonian(model: &SpinChainModel) -> DMatrix<C64> {
    let n = model.n_sites();
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for j in 0..n {
        for a in 0..3 {
            if model.mu()[a] != 0.0 {
                add_term(&mut h, n, &[(j, pauli(a))], 0.5 * model.mu()[a]);
            }
            for b in 0..3 {
                let jab = model.coupling()[(a, b)];
                if jab != 0.0 {
                    add_term(&mut h, n, &[(j, pauli(a)), ((j + 1) % n, pauli(b))], 0.5 * jab);
                }
            }
        }
    }
    h
}

pub fn permute(c: usize, n: usize, map: impl Fn(usize) -> usize) -> usize {
    (0..n).fold(0, |acc, j| acc | (((c >> j) & 1) << map(j)))
}

/// Orthonormal symmetric vectors, one per orbit, ordered like the sector.
pub fn sector_basis(sector: &SymmetrySector) -> DMatrix<f64> {
    let n = sector.n_sites();
    let mut b = DMatrix::zeros(1 << n, sector.dimension());
    for (r, &rep) in sector.representatives().iter().enumerate() {
        let mut orbit = std::collections::BTreeSet::new();
        for k in 0..n / 4 {
            let t = permute(rep as usize, n, |j| (j + 4 * k) % n);
            orbit.insert(t);
            orbit.insert(permute(t, n, |j| (n + 1 - j) % n));
        }
        let norm = (orbit.len() as f64).sqrt();
        for c in orbit {
            b[(c, r)] = 1.0 / norm;
        }
    }
    b
}

pub fn product_vector(config: &SpinConfiguration) -> Vec<C64> {
    let n = config.len();
    let local_states: Vec<[C64; 2]> = config
        .spins()
        .iter()
        .map(|s| {
            let theta = s.z.clamp(-1.0, 1.0).acos();
            let phi = s.y.atan2(s.x);
            [
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
            ]
        })
        .collect();
    (0..1usize << n)
        .map(|c| (0..n).map(|j| local_states[j][local(c, j)]).product())
        .collect()
}

pub fn real_part(h: &DMatrix<C64>) -> DMatrix<f64> {
    assert!(h.iter().all(|z| z.im == 0.0));
    h.map(|z| z.re)
}

pub fn random_anchor(rng: &mut ChaCha8Rng, manifold: Manifold) -> ManifoldPoint {
    let z: f64 = rng.random_range(-1.0..1.0);
    ManifoldPoint::new(z.acos(), rng.random_range(0.0..std::f64::consts::TAU), manifold).unwrap()
}

/// Groups ascending energies into clusters closer than `tol`.
pub fn clusters(energies: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &e) in energies.iter().enumerate() {
        match out.last_mut() {
            Some((last, members)) if e - *last < tol => {
                *last = e;
                members.push(i);
            }
            _ => out.push((e, vec![i])),
        }
    }
    out
}
