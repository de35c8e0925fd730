use nalgebra::DMatrix;

use crate::discretize::LatticeSpec;
use crate::error::{Error, Result};
use crate::tridiagonal::SymTridiagonal;

#[derive(Clone, Debug, PartialEq)]
pub struct FreeFermionResult {
    /// ⟨n_i⟩ / Δx.
    pub density: Vec<f64>,
    /// Σ_n φ_n(i) φ_n(j) / Δx.
    pub odm: DMatrix<f64>,
    pub energy: f64,
}

/// Non-interacting lattice fermions: the lowest N orbitals of the
/// single-particle chain with hopping −J and diagonal `potential`.
pub fn lattice_free_fermions(lattice: &LatticeSpec, potential: &[f64], n: usize) -> Result<FreeFermionResult> {
    let l = lattice.site_count;
    if potential.len() != l {
        return Err(Error::Contract(format!("{} potential values for {l} sites", potential.len())));
    }
    if n > l {
        return Err(Error::Config(format!("{n} fermions do not fit {l} sites")));
    }
    let j = lattice.hopping();
    let t = SymTridiagonal::new(potential.to_vec(), vec![-j; l - 1])?;
    let mut odm = DMatrix::zeros(l, l);
    let mut energy = 0.0;
    for k in 0..n {
        let e = t.eigenvalue(k);
        let v = t.eigenvector(e);
        energy += e;
        for a in 0..l {
            for b in 0..l {
                odm[(a, b)] += v[a] * v[b];
            }
        }
    }
    odm /= lattice.dx;
    let density = (0..l).map(|i| odm[(i, i)]).collect();
    Ok(FreeFermionResult { density, odm, energy })
}
