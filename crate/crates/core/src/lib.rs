//! Lattice models for one-dimensional quantum gases with contact interactions.
//!
//! The crate maps s-wave interacting bosons onto the Bose-Hubbard model and
//! p-wave interacting spin-polarized fermions onto nearest-neighbor lattice
//! fermions (equivalently an XXZ chain), finds trapped ground states by
//! imaginary-time evolution of number-conserving matrix-product states, and
//! checks the results against independent exact references.
//!
//! Units are fixed throughout: ħ = m = ω = 1, so lengths are in trap
//! oscillator lengths and energies in units of the trap frequency.

pub mod discretize;
pub mod error;
pub mod linalg;
pub mod exec;
pub mod model;
pub mod mps;
pub mod observables;
pub mod oracle;
pub mod tridiagonal;

pub use discretize::{
    bose_hubbard, fermi_lattice, relative_hamiltonian, sample_potential, xxz_params,
    BoseHubbardParams, DiscretizationScheme, FermiLatticeParams, LatticeHamiltonian, LatticeSpec,
    XXZParams,
};
pub use error::{Error, Result};
pub use exec::ExecPolicy;
pub use model::{ContinuumGas, Potential, Statistics};
pub use mps::{MpsState, TrotterSchedule, TruncationPolicy};
pub use observables::ObservableReport;
