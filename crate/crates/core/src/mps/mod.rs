//! Number-conserving matrix-product states.
//!
//! Every bond carries a U(1) label: the number of particles to its left.
//! Site tensors are stored as dense blocks `B[q, s]` of shape
//! `dim(bond_i, q) × dim(bond_{i+1}, q + s)`; all other entries vanish by
//! construction, so the particle number is conserved exactly by every
//! operation and truncation never mixes sectors.
//!
//! States are kept in the right-canonical Vidal/Hastings form: site tensors
//! `B_i` together with Schmidt values `λ_b` on every bond, the state being
//! the plain product `B_0 B_1 ⋯ B_{L−1}`. Imaginary-time gates spoil exact
//! canonicality slightly; [`MpsState::canonicalize`] restores it and all
//! measurements run on a canonicalized copy.

mod canonical;
mod gate;
mod measure;
mod tebd;
mod update;

pub use gate::{bond_gate, bond_hamiltonian, trotter_gates, LocalOp, TwoSiteGate};
pub use measure::{energy, total_number};
pub use tebd::{
    imaginary_time_evolve, imaginary_time_ground_state, initial_occupations, initial_state,
    TraceRow, TrotterSchedule,
};
pub use update::apply_gate_and_truncate;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub chi_max: usize,
    /// Schmidt states whose relative weight λ²/Σλ² falls below this are dropped.
    pub svd_cutoff: f64,
    /// Always true: the state is renormalized after every truncation.
    pub renormalize_after_truncation: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { chi_max: 64, svd_cutoff: 1e-14, renormalize_after_truncation: true }
    }
}

impl TruncationPolicy {
    pub fn new(chi_max: usize, svd_cutoff: f64) -> Result<Self> {
        let p = Self { chi_max, svd_cutoff, renormalize_after_truncation: true };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi_max < 2 {
            return Err(Error::Config(format!("chi_max must be at least 2, got {}", self.chi_max)));
        }
        if !(0.0..1.0).contains(&self.svd_cutoff) {
            return Err(Error::Config(format!("svd_cutoff must lie in [0, 1), got {}", self.svd_cutoff)));
        }
        if !self.renormalize_after_truncation {
            return Err(Error::Config("renormalize_after_truncation must be true".into()));
        }
        Ok(())
    }
}

/// Block-sparse rank-3 tensor of one site.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SiteTensor {
    /// Indexed by `q * local_dim + s`.
    pub(crate) blocks: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    local_dim: usize,
    particles: usize,
    /// `bonds[b][q]`: dimension of charge sector q on bond b (b = 0..=L).
    bonds: Vec<Vec<usize>>,
    sites: Vec<SiteTensor>,
    /// Schmidt values per bond and charge sector.
    lambdas: Vec<Vec<DVector<f64>>>,
    canonical: bool,
}

impl MpsState {
    /// Product state with the given occupation per site.
    pub fn product(occupations: &[usize], local_dim: usize) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::Config(format!("local dimension must be at least 2, got {local_dim}")));
        }
        if occupations.len() < 2 {
            return Err(Error::Config("an MPS needs at least 2 sites".into()));
        }
        if let Some((i, &n)) = occupations.iter().enumerate().find(|(_, &n)| n >= local_dim) {
            return Err(Error::Config(format!(
                "occupation {n} at site {i} does not fit local dimension {local_dim}"
            )));
        }
        let particles: usize = occupations.iter().sum();
        let mut bonds = Vec::with_capacity(occupations.len() + 1);
        let mut charge = 0;
        let mut dims = vec![0; particles + 1];
        dims[0] = 1;
        bonds.push(dims);
        for &n in occupations {
            charge += n;
            let mut dims = vec![0; particles + 1];
            dims[charge] = 1;
            bonds.push(dims);
        }
        let mut state = Self::zeros(local_dim, particles, bonds);
        let mut charge = 0;
        for (i, &n) in occupations.iter().enumerate() {
            state.sites[i].blocks[charge * local_dim + n] = DMatrix::from_element(1, 1, 1.0);
            charge += n;
        }
        state.canonical = true;
        Ok(state)
    }

    /// All-zero tensors with the given bond structure and unit Schmidt values.
    pub(crate) fn zeros(local_dim: usize, particles: usize, bonds: Vec<Vec<usize>>) -> Self {
        let l = bonds.len() - 1;
        let sites = (0..l)
            .map(|i| SiteTensor {
                blocks: (0..(particles + 1) * local_dim)
                    .map(|k| {
                        let (q, s) = (k / local_dim, k % local_dim);
                        let right = if q + s <= particles { bonds[i + 1][q + s] } else { 0 };
                        DMatrix::zeros(bonds[i][q], right)
                    })
                    .collect(),
            })
            .collect();
        let lambdas = bonds
            .iter()
            .map(|dims| dims.iter().map(|&d| DVector::from_element(d, 1.0)).collect())
            .collect();
        Self { local_dim, particles, bonds, sites, lambdas, canonical: false }
    }

    /// Normalized sum of two states with identical shape and particle number.
    pub fn superpose(a: &MpsState, b: &MpsState) -> Result<Self> {
        if a.local_dim != b.local_dim || a.particles != b.particles || a.len() != b.len() {
            return Err(Error::Contract("superposed states differ in shape".into()));
        }
        let l = a.len();
        let n = a.particles;
        let d = a.local_dim;
        let bonds: Vec<Vec<usize>> = (0..=l)
            .map(|bi| {
                (0..=n)
                    .map(|q| {
                        if bi == 0 || bi == l {
                            a.bonds[bi][q].max(b.bonds[bi][q])
                        } else {
                            a.bonds[bi][q] + b.bonds[bi][q]
                        }
                    })
                    .collect()
            })
            .collect();
        let mut out = Self::zeros(d, n, bonds);
        for i in 0..l {
            for q in 0..=n {
                for s in 0..d {
                    if q + s > n {
                        continue;
                    }
                    let k = q * d + s;
                    let (ba, bb) = (&a.sites[i].blocks[k], &b.sites[i].blocks[k]);
                    let blk = &mut out.sites[i].blocks[k];
                    // Boundary bonds are shared, interior bonds are stacked.
                    let row_b = if i == 0 { 0 } else { ba.nrows() };
                    let col_b = if i == l - 1 { 0 } else { ba.ncols() };
                    add_into(blk, ba, 0, 0);
                    add_into(blk, bb, row_b, col_b);
                }
            }
        }
        out.canonicalize()?;
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// Total dimension of the L − 1 interior bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.bonds[1..self.len()].iter().map(|d| d.iter().sum()).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Site 0 when the tensors are in exact right-canonical Schmidt form.
    pub fn canonical_center(&self) -> Option<usize> {
        self.canonical.then_some(0)
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Schmidt values on interior bond `b` (between sites b−1 and b), largest first.
    pub fn schmidt_values(&self, b: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.lambdas[b].iter().flat_map(|l| l.iter().copied()).collect();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    }

    pub(crate) fn right_dim(&self, bond: usize, charge: usize) -> usize {
        if charge <= self.particles {
            self.bonds[bond][charge]
        } else {
            0
        }
    }

    pub(crate) fn block(&self, site: usize, q: usize, s: usize) -> &DMatrix<f64> {
        &self.sites[site].blocks[q * self.local_dim + s]
    }

    /// Dense amplitude vector, site 0 most significant. Small systems only.
    pub fn to_dense(&self) -> Result<DVector<f64>> {
        let l = self.len();
        let d = self.local_dim;
        let total = (d as f64).powi(l as i32);
        if total > 1e7 {
            return Err(Error::Unsupported(format!("dense vector of dimension {total}")));
        }
        // partial[q] rows: configurations of the prefix with charge q, columns: bond index
        let mut partial: Vec<Vec<(usize, DVector<f64>)>> = vec![Vec::new(); self.particles + 1];
        partial[0].push((0, DVector::from_element(1, 1.0)));
        for i in 0..l {
            let mut next: Vec<Vec<(usize, DVector<f64>)>> = vec![Vec::new(); self.particles + 1];
            for (q, rows) in partial.iter().enumerate() {
                for (cfg, v) in rows {
                    for s in 0..d {
                        if q + s > self.particles {
                            continue;
                        }
                        let blk = self.block(i, q, s);
                        if blk.nrows() == 0 || blk.ncols() == 0 {
                            continue;
                        }
                        let w = blk.tr_mul(v);
                        next[q + s].push((cfg * d + s, w));
                    }
                }
            }
            partial = next;
        }
        let mut out = DVector::zeros(total as usize);
        for (cfg, v) in &partial[self.particles] {
            out[*cfg] += v[0];
        }
        Ok(out)
    }
}

fn add_into(dst: &mut DMatrix<f64>, src: &DMatrix<f64>, r0: usize, c0: usize) {
    if src.nrows() == 0 || src.ncols() == 0 {
        return;
    }
    let mut view = dst.view_mut((r0, c0), (src.nrows(), src.ncols()));
    view += src;
}

/// Product state for an occupation pattern; `⟨n_i⟩` equals the pattern exactly.
pub fn product_state_init(occupations: &[usize], local_dim: usize) -> Result<MpsState> {
    MpsState::product(occupations, local_dim)
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn product_state_dense_image() {
        let st = MpsState::product(&[1, 0, 1, 0], 2).unwrap();
        let v = st.to_dense().unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(v[0b1010], 1.0);
        assert_abs_diff_eq!(v.norm(), 1.0);
        assert_eq!(st.bond_dims(), vec![1, 1, 1]);
        assert_eq!(st.particles(), 2);
    }

    #[test]
    fn product_state_guards() {
        assert!(matches!(MpsState::product(&[0, 2, 0], 2), Err(Error::Config(_))));
        assert!(MpsState::product(&[0, 2, 0], 3).is_ok());
        assert!(MpsState::product(&[1], 2).is_err());
    }

    #[test]
    fn superposition_is_normalized_sum() {
        let a = MpsState::product(&[1, 0, 0, 1], 2).unwrap();
        let b = MpsState::product(&[0, 1, 1, 0], 2).unwrap();
        let s = MpsState::superpose(&a, &b).unwrap();
        let v = s.to_dense().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(v[0b1001].abs(), h, epsilon = 1e-14);
        assert_abs_diff_eq!(v[0b0110].abs(), h, epsilon = 1e-14);
        assert_abs_diff_eq!(v[0b1001], v[0b0110], epsilon = 1e-14);
        assert_eq!(s.max_bond_dim(), 2);
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::new(1, 1e-10).is_err());
        assert!(TruncationPolicy::new(8, 1.0).is_err());
        assert!(TruncationPolicy::new(8, 0.0).is_ok());
    }
}
