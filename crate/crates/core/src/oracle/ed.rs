use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::dense_ground_state;
use crate::discretize::{LatticeHamiltonian, LatticeSpec};
use crate::error::{Error, Result};
use crate::model::Statistics;

/// Largest fixed-N sector handled by [`small_system_ed`].
pub const ED_MAX_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct EdResult {
    pub energy: f64,
    pub density: Vec<f64>,
    pub odm: DMatrix<f64>,
    pub pair_corr: DMatrix<f64>,
    pub dimension: usize,
    pub ground_vector: DVector<f64>,
}

fn enumerate(l: usize, n: usize, cap: usize) -> Vec<Vec<u8>> {
    fn rec(site: usize, left: usize, l: usize, cap: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if site == l {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if left > (l - site) * cap {
            return;
        }
        for k in (0..=left.min(cap)).rev() {
            cur.push(k as u8);
            rec(site + 1, left - k, l, cap, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, l, cap, &mut Vec::with_capacity(l), &mut out);
    out
}

fn sector_dim(l: usize, n: usize, cap: usize) -> f64 {
    // counts compositions of n into l parts bounded by cap
    let mut ways = vec![0.0f64; n + 1];
    ways[0] = 1.0;
    for _ in 0..l {
        let mut next = vec![0.0; n + 1];
        for (m, &w) in ways.iter().enumerate() {
            for k in 0..=cap.min(n - m) {
                next[m + k] += w;
            }
        }
        ways = next;
    }
    ways[n]
}

/// `a†_i a_j |cfg⟩` as (amplitude, new configuration), including the
/// Jordan-Wigner sign for fermions.
fn hop(cfg: &[u8], i: usize, j: usize, cap: u8, fermi: bool) -> Option<(f64, Vec<u8>)> {
    if cfg[j] == 0 {
        return None;
    }
    let mut out = cfg.to_vec();
    let nj = out[j] as f64;
    out[j] -= 1;
    if out[i] >= cap {
        return None;
    }
    let ni = out[i] as f64;
    out[i] += 1;
    let mut amp = nj.sqrt() * (ni + 1.0).sqrt();
    if fermi {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let between: u32 = cfg[lo + 1..hi].iter().map(|&x| x as u32).sum();
        if between % 2 == 1 {
            amp = -amp;
        }
    }
    Some((amp, out))
}

/// Exact ground state in the N-particle sector by dense diagonalization,
/// with observables normalized as in the observables module.
pub fn small_system_ed(ham: &LatticeHamiltonian, n: usize, lattice: &LatticeSpec) -> Result<EdResult> {
    let l = ham.site_count();
    if lattice.site_count != l {
        return Err(Error::Contract(format!("lattice of {} sites for a {l}-site model", lattice.site_count)));
    }
    let cap = ham.local_dim() - 1;
    let dim = sector_dim(l, n, cap);
    if dim > ED_MAX_DIM as f64 {
        return Err(Error::Unsupported(format!("sector dimension {dim} exceeds {ED_MAX_DIM}")));
    }
    if dim == 0.0 {
        return Err(Error::Config(format!("{n} particles do not fit {l} sites")));
    }
    let basis = enumerate(l, n, cap);
    let index: HashMap<&[u8], usize> = basis.iter().enumerate().map(|(k, c)| (c.as_slice(), k)).collect();
    let fermi = ham.statistics() == Statistics::Fermi;
    let dimension = basis.len();
    let mut h = DMatrix::zeros(dimension, dimension);
    let j = ham.hopping();
    let nb = ham.neighbor();
    for (k, cfg) in basis.iter().enumerate() {
        let mut diag = 0.0;
        for i in 0..l {
            diag += ham.onsite_energy(i, cfg[i] as usize);
            if i + 1 < l {
                diag += nb * (cfg[i] as f64) * (cfg[i + 1] as f64);
            }
        }
        h[(k, k)] = diag;
        for i in 0..l - 1 {
            for (a, b) in [(i, i + 1), (i + 1, i)] {
                if let Some((amp, out)) = hop(cfg, a, b, cap as u8, fermi) {
                    h[(index[out.as_slice()], k)] += -j * amp;
                }
            }
        }
    }
    let spec = dense_ground_state(&h)?;
    let psi = spec.ground_vector;
    let dx = lattice.dx;

    let mut odm = DMatrix::zeros(l, l);
    let mut pair = DMatrix::zeros(l, l);
    for (k, cfg) in basis.iter().enumerate() {
        let p = psi[k];
        if p == 0.0 {
            continue;
        }
        for a in 0..l {
            let na = cfg[a] as f64;
            odm[(a, a)] += p * p * na;
            pair[(a, a)] += p * p * na * (na - 1.0);
            for b in 0..l {
                if a == b {
                    continue;
                }
                pair[(a, b)] += p * p * na * cfg[b] as f64;
                if let Some((amp, out)) = hop(cfg, a, b, cap as u8, fermi) {
                    odm[(a, b)] += psi[index[out.as_slice()]] * amp * p;
                }
            }
        }
    }
    odm /= dx;
    pair /= dx * dx;
    let density = (0..l).map(|i| odm[(i, i)]).collect();
    Ok(EdResult { energy: spec.eigenvalues[0], density, odm, pair_corr: pair, dimension, ground_vector: psi })
}
