use nalgebra::DMatrix;

use crate::discretize::LatticeHamiltonian;
use crate::error::{Error, Result};

/// Single-site operator that shifts the occupation by a fixed amount:
/// `O|s⟩ = values[s] |s + shift⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOp {
    pub shift: i32,
    pub values: Vec<f64>,
}

impl LocalOp {
    pub fn number(d: usize) -> Self {
        Self { shift: 0, values: (0..d).map(|s| s as f64).collect() }
    }

    pub fn create(d: usize) -> Self {
        Self {
            shift: 1,
            values: (0..d).map(|s| if s + 1 < d { ((s + 1) as f64).sqrt() } else { 0.0 }).collect(),
        }
    }

    pub fn annihilate(d: usize) -> Self {
        Self { shift: -1, values: (0..d).map(|s| (s as f64).sqrt()).collect() }
    }

    pub fn diagonal(values: Vec<f64>) -> Self {
        Self { shift: 0, values }
    }

    /// Jordan-Wigner string factor `(−1)^n`.
    pub fn parity(d: usize) -> Self {
        Self::diagonal((0..d).map(|s| if s % 2 == 0 { 1.0 } else { -1.0 }).collect())
    }

    /// Output occupation for input `s`, if it stays inside the local space.
    pub fn target(&self, s: usize, d: usize) -> Option<usize> {
        let t = s as i64 + self.shift as i64;
        (0..d as i64).contains(&t).then_some(t as usize)
    }

    pub fn to_matrix(&self, d: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(d, d);
        for s in 0..d {
            if let Some(t) = self.target(s, d) {
                m[(t, s)] = self.values[s];
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoSiteGate {
    /// The gate acts on sites `bond` and `bond + 1`.
    pub bond: usize,
    /// `d² × d²` matrix in the basis `s_left * d + s_right`.
    pub matrix: DMatrix<f64>,
}

/// Bond term with on-site energies split between the two bonds touching a
/// site (chain ends get their full weight from their only bond).
pub fn bond_hamiltonian(ham: &LatticeHamiltonian, bond: usize) -> Result<DMatrix<f64>> {
    let l = ham.site_count();
    if bond + 1 >= l {
        return Err(Error::Contract(format!("bond {bond} outside a chain of {l} sites")));
    }
    let d = ham.local_dim();
    let j = ham.hopping();
    let nb = ham.neighbor();
    let w_left = if bond == 0 { 1.0 } else { 0.5 };
    let w_right = if bond + 2 == l { 1.0 } else { 0.5 };
    let mut h = DMatrix::zeros(d * d, d * d);
    for s1 in 0..d {
        for s2 in 0..d {
            let k = s1 * d + s2;
            h[(k, k)] = w_left * ham.onsite_energy(bond, s1)
                + w_right * ham.onsite_energy(bond + 1, s2)
                + nb * (s1 * s2) as f64;
            // −J (b†_1 b_2 + b†_2 b_1)
            if s2 > 0 && s1 + 1 < d {
                let amp = -j * ((s1 + 1) as f64).sqrt() * (s2 as f64).sqrt();
                let k2 = (s1 + 1) * d + (s2 - 1);
                h[(k2, k)] += amp;
                h[(k, k2)] += amp;
            }
        }
    }
    Ok(h)
}

/// `exp(−τ h_bond)`.
pub fn bond_gate(ham: &LatticeHamiltonian, bond: usize, tau: f64) -> Result<TwoSiteGate> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Config(format!("imaginary time step must be finite and ≥ 0, got {tau}")));
    }
    let h = bond_hamiltonian(ham, bond)?;
    let d = ham.local_dim();
    let mut matrix = DMatrix::zeros(d * d, d * d);
    // exponentiate each particle-number block so the gate conserves N exactly
    for n in 0..=2 * (d - 1) {
        let idx: Vec<usize> = (0..d * d).filter(|k| k / d + k % d == n).collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
        let (vals, v) = crate::linalg::symmetric_eigen(&block)?;
        let mut scaled = v.clone();
        for (c, &e) in vals.iter().enumerate() {
            scaled.column_mut(c).scale_mut((-tau * e).exp());
        }
        let g = scaled * v.transpose();
        for (a, &ka) in idx.iter().enumerate() {
            for (b, &kb) in idx.iter().enumerate() {
                matrix[(ka, kb)] = g[(a, b)];
            }
        }
    }
    Ok(TwoSiteGate { bond, matrix })
}

/// Gates of one second-order step: even bonds at τ/2 and odd bonds at τ.
/// Applying even(τ/2) · odd(τ) · even(τ/2) gives an O(τ³) local error.
pub fn trotter_gates(ham: &LatticeHamiltonian, tau: f64) -> Result<(Vec<TwoSiteGate>, Vec<TwoSiteGate>)> {
    let l = ham.site_count();
    let even = (0..l - 1).step_by(2).map(|b| bond_gate(ham, b, tau / 2.0)).collect::<Result<_>>()?;
    let odd = (1..l - 1).step_by(2).map(|b| bond_gate(ham, b, tau)).collect::<Result<_>>()?;
    Ok((even, odd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{BoseHubbardParams, FermiLatticeParams};

    fn bose(l: usize) -> LatticeHamiltonian {
        LatticeHamiltonian::BoseHubbard(BoseHubbardParams {
            hopping: 1.3,
            onsite: -0.7,
            potential: (0..l).map(|i| 0.1 * i as f64).collect(),
            n_max: 3,
        })
    }

    #[test]
    fn bond_terms_sum_to_hamiltonian_diagonal() {
        // Σ bonds of the on-site part must reproduce Σ_i onsite_energy(i, s_i).
        let ham = bose(4);
        let occ = [2usize, 0, 1, 3];
        let d = ham.local_dim();
        let mut total = 0.0;
        for b in 0..3 {
            let h = bond_hamiltonian(&ham, b).unwrap();
            let k = occ[b] * d + occ[b + 1];
            total += h[(k, k)];
        }
        let direct: f64 = (0..4).map(|i| ham.onsite_energy(i, occ[i])).sum();
        assert!((total - direct).abs() < 1e-12);
    }

    #[test]
    fn gate_conserves_number_and_is_symmetric() {
        let ham = bose(3);
        let g = bond_gate(&ham, 1, 0.05).unwrap();
        let d = ham.local_dim();
        for a in 0..d * d {
            for b in 0..d * d {
                assert!((g.matrix[(a, b)] - g.matrix[(b, a)]).abs() < 1e-14);
                if a / d + a % d != b / d + b % d {
                    assert!(g.matrix[(a, b)].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gate_tends_to_identity() {
        let ham = LatticeHamiltonian::Fermi(FermiLatticeParams {
            hopping: 2.0,
            neighbor: -3.0,
            potential: vec![0.5; 4],
        });
        for tau in [1e-2, 1e-3, 1e-4] {
            let g = bond_gate(&ham, 0, tau).unwrap();
            let dev = (g.matrix - DMatrix::identity(4, 4)).amax();
            assert!(dev < 10.0 * tau, "τ={tau}: {dev}");
        }
        assert!(bond_gate(&ham, 0, -1.0).is_err());
        assert!(bond_gate(&ham, 3, 0.1).is_err());
    }

    #[test]
    fn trotter_layers_partition_bonds() {
        let (even, odd) = trotter_gates(&bose(7), 0.1).unwrap();
        let bonds: Vec<usize> = even.iter().chain(&odd).map(|g| g.bond).collect();
        assert_eq!(even.len(), 3);
        assert_eq!(odd.len(), 3);
        let mut sorted = bonds.clone();
        sorted.sort();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn local_operator_matrices() {
        let c = LocalOp::create(3).to_matrix(3);
        let a = LocalOp::annihilate(3).to_matrix(3);
        assert_eq!(c, a.transpose());
        let n = &c * &a;
        assert!((n - LocalOp::number(3).to_matrix(3)).amax() < 1e-14);
    }
}
