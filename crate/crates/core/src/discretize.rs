//! Lattice Hamiltonians reproducing continuum contact interactions.
//!
//! With the three-point kinetic stencil the hopping is J = 1/(2Δx²). Bosons
//! acquire the on-site pair interaction U = γ_B/Δx. Fermions cannot meet on a
//! site, so the contact condition is carried by a nearest-neighbor
//! interaction. Expanding 1/B rather than B in powers of Δx gives
//!
//! ```text
//!     B = −(1/Δx²) · 1/(1 − 2Δx/γ_F)
//! ```
//!
//! while the straightforward series `B = −1/Δx² − 2/(γ_F Δx) + …` truncated
//! after the first interaction-dependent term gives the naive variant.
//! After a Jordan-Wigner transformation the fermion model is an XXZ chain
//! with anisotropy Δ = B·Δx², which lies in (−1, 0) for every γ_F < 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ContinuumGas, Potential, Statistics};
use crate::tridiagonal::SymTridiagonal;

/// Above this value of |2Δx/γ_F| the lattice no longer resolves the contact
/// length and a warning is logged.
pub const RESOLUTION_WARN: f64 = 0.2;

pub const DEFAULT_N_MAX: usize = 5;

/// Uniform grid x_i = origin + i·dx, i = 0..site_count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dx: f64,
    pub site_count: usize,
    pub origin: f64,
}

impl LatticeSpec {
    pub fn new(dx: f64, site_count: usize, origin: f64) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Config(format!("lattice spacing must be positive, got {dx}")));
        }
        if site_count < 2 {
            return Err(Error::Config(format!("lattice needs at least 2 sites, got {site_count}")));
        }
        Ok(Self { dx, site_count, origin })
    }

    /// Cell-centered grid of total length `extent`, mirror symmetric about x = 0.
    pub fn symmetric(dx: f64, extent: f64) -> Result<Self> {
        if !(extent > 0.0) {
            return Err(Error::Config(format!("extent must be positive, got {extent}")));
        }
        let sites = (extent / dx).round() as usize;
        Self::new(dx, sites, -0.5 * (sites as f64 - 1.0) * dx)
    }

    pub fn position(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.site_count).map(|i| self.position(i)).collect()
    }

    pub fn hopping(&self) -> f64 {
        0.5 / (self.dx * self.dx)
    }

    /// Site closest to x = 0 (the lower one on a tie).
    pub fn center_site(&self) -> usize {
        let mut best = 0;
        for i in 1..self.site_count {
            if self.position(i).abs() < self.position(best).abs() - 1e-12 * self.dx {
                best = i;
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationScheme {
    Optimal,
    NaiveTruncated,
}

impl std::fmt::Display for DiscretizationScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DiscretizationScheme::Optimal => "optimal",
            DiscretizationScheme::NaiveTruncated => "naive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoseHubbardParams {
    pub hopping: f64,
    pub onsite: f64,
    /// V(x_i) + 2J.
    pub potential: Vec<f64>,
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermiLatticeParams {
    pub hopping: f64,
    pub neighbor: f64,
    /// V(x_i) + 2J.
    pub potential: Vec<f64>,
}

/// Spin form of the fermion lattice model,
///
/// ```text
///     H = Σ_i −K (σˣσˣ + σʸσʸ)_{i,i+1} + K Δ (σᶻ_i + 1)(σᶻ_{i+1} + 1) + Σ_i h_i (σᶻ_i + 1)
/// ```
///
/// with K = 1/(4Δx²), Δ = B·Δx² and h_i = V_i / 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XXZParams {
    pub xy_coupling: f64,
    pub anisotropy: f64,
    pub field: Vec<f64>,
}

impl XXZParams {
    /// Back to the spinless fermion parameters on a lattice of spacing `dx`.
    pub fn to_fermi(&self, dx: f64) -> FermiLatticeParams {
        FermiLatticeParams {
            hopping: 2.0 * self.xy_coupling,
            neighbor: self.anisotropy / (dx * dx),
            potential: self.field.iter().map(|h| 2.0 * h).collect(),
        }
    }
}

/// A nearest-neighbor lattice model ready for exact diagonalization or TEBD.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LatticeHamiltonian {
    BoseHubbard(BoseHubbardParams),
    Fermi(FermiLatticeParams),
}

impl LatticeHamiltonian {
    pub fn statistics(&self) -> Statistics {
        match self {
            LatticeHamiltonian::BoseHubbard(_) => Statistics::Bose,
            LatticeHamiltonian::Fermi(_) => Statistics::Fermi,
        }
    }

    pub fn local_dim(&self) -> usize {
        match self {
            LatticeHamiltonian::BoseHubbard(p) => p.n_max + 1,
            LatticeHamiltonian::Fermi(_) => 2,
        }
    }

    pub fn site_count(&self) -> usize {
        self.potential().len()
    }

    pub fn hopping(&self) -> f64 {
        match self {
            LatticeHamiltonian::BoseHubbard(p) => p.hopping,
            LatticeHamiltonian::Fermi(p) => p.hopping,
        }
    }

    pub fn onsite(&self) -> f64 {
        match self {
            LatticeHamiltonian::BoseHubbard(p) => p.onsite,
            LatticeHamiltonian::Fermi(_) => 0.0,
        }
    }

    pub fn neighbor(&self) -> f64 {
        match self {
            LatticeHamiltonian::BoseHubbard(_) => 0.0,
            LatticeHamiltonian::Fermi(p) => p.neighbor,
        }
    }

    pub fn potential(&self) -> &[f64] {
        match self {
            LatticeHamiltonian::BoseHubbard(p) => &p.potential,
            LatticeHamiltonian::Fermi(p) => &p.potential,
        }
    }

    /// Diagonal single-site energy for occupation n at site i.
    pub fn onsite_energy(&self, i: usize, n: usize) -> f64 {
        let nf = n as f64;
        self.potential()[i] * nf + 0.5 * self.onsite() * nf * (nf - 1.0)
    }
}

pub fn sample_potential(trap: &Potential, lattice: &LatticeSpec) -> Result<Vec<f64>> {
    (0..lattice.site_count).map(|i| trap.eval(lattice.position(i))).collect()
}

fn kinetic_offset_potential(gas: &ContinuumGas, lattice: &LatticeSpec) -> Result<Vec<f64>> {
    let offset = 2.0 * lattice.hopping();
    Ok(sample_potential(&gas.trap, lattice)?.into_iter().map(|v| v + offset).collect())
}

pub fn bose_hubbard(gas: &ContinuumGas, lattice: &LatticeSpec, n_max: usize) -> Result<BoseHubbardParams> {
    if gas.statistics != Statistics::Bose {
        return Err(Error::Config("Bose-Hubbard mapping requires bosons".into()));
    }
    if n_max < 2 {
        return Err(Error::Config(format!(
            "n_max = {n_max} cannot represent a doubly occupied site (need n_max >= 2)"
        )));
    }
    if !gas.coupling.is_finite() {
        return Err(Error::Config("bosonic coupling must be finite".into()));
    }
    Ok(BoseHubbardParams {
        hopping: lattice.hopping(),
        onsite: gas.coupling / lattice.dx,
        potential: kinetic_offset_potential(gas, lattice)?,
        n_max,
    })
}

/// Nearest-neighbor interaction B for fermionic coupling `g` on spacing `dx`.
///
/// `g = ±∞` yields the hard-core limit B = −1/Δx².
pub fn neighbor_interaction(g: f64, dx: f64, scheme: DiscretizationScheme) -> Result<f64> {
    if g == 0.0 {
        return Err(Error::Domain(
            "gamma_F = 0 has no lattice image; use the free or hard-core limit explicitly".into(),
        ));
    }
    if g.is_nan() {
        return Err(Error::Domain("gamma_F is NaN".into()));
    }
    let ratio = 2.0 * dx / g;
    if (ratio - 1.0).abs() <= 1e-12 {
        return Err(Error::Singularity { gamma: g, pole: 2.0 * dx });
    }
    if g > 0.0 && dx >= g / 4.0 {
        return Err(Error::Config(format!(
            "repulsive gamma_F = {g} needs dx < gamma_F/4 = {} to resolve its bound state",
            g / 4.0
        )));
    }
    if ratio.abs() > RESOLUTION_WARN {
        log::warn!("|2dx/gamma_F| = {:.3} > {RESOLUTION_WARN}: lattice is coarse for this coupling", ratio.abs());
    }
    let inv_dx2 = 1.0 / (dx * dx);
    Ok(match scheme {
        DiscretizationScheme::Optimal => -inv_dx2 / (1.0 - ratio),
        DiscretizationScheme::NaiveTruncated => -inv_dx2 - 2.0 / (g * dx),
    })
}

pub fn fermi_lattice(
    gas: &ContinuumGas,
    lattice: &LatticeSpec,
    scheme: DiscretizationScheme,
) -> Result<FermiLatticeParams> {
    if gas.statistics != Statistics::Fermi {
        return Err(Error::Config("fermion lattice mapping requires fermions".into()));
    }
    Ok(FermiLatticeParams {
        hopping: lattice.hopping(),
        neighbor: neighbor_interaction(gas.coupling, lattice.dx, scheme)?,
        potential: kinetic_offset_potential(gas, lattice)?,
    })
}

pub fn xxz_params(params: &FermiLatticeParams, lattice: &LatticeSpec) -> XXZParams {
    let dx2 = lattice.dx * lattice.dx;
    XXZParams {
        xy_coupling: 0.25 / dx2,
        anisotropy: params.neighbor * dx2,
        field: params.potential.iter().map(|v| 0.5 * v).collect(),
    }
}

/// Half-line relative-coordinate Hamiltonian −∂² + V of two particles.
///
/// Bosons live on j = 0..L with the contact row `(2/Δx² + U) φ_0 − (2/Δx²) φ_1`.
/// That row makes the matrix non-symmetric; it is returned in the similar
/// symmetric form obtained by rescaling φ_0 by 1/√2, which leaves the spectrum
/// unchanged and puts −√2/Δx² on the first off-diagonal. Fermions live on
/// j = 1..=L (φ_0 = 0) with B added to the first diagonal entry. The far end
/// is a hard wall.
pub fn relative_hamiltonian(
    g: f64,
    statistics: Statistics,
    lattice: &LatticeSpec,
    scheme: DiscretizationScheme,
) -> Result<SymTridiagonal> {
    let l = lattice.site_count;
    if l < 4 {
        return Err(Error::Config(format!("relative chain needs at least 4 sites, got {l}")));
    }
    let dx = lattice.dx;
    let inv_dx2 = 1.0 / (dx * dx);
    let mut diag = vec![2.0 * inv_dx2; l];
    let mut off = vec![-inv_dx2; l - 1];
    match statistics {
        Statistics::Bose => {
            if scheme == DiscretizationScheme::NaiveTruncated {
                return Err(Error::Unsupported(
                    "bosons have no naive truncated scheme; U = gamma_B/dx is already optimal".into(),
                ));
            }
            diag[0] += g / dx;
            off[0] = -std::f64::consts::SQRT_2 * inv_dx2;
        }
        Statistics::Fermi => {
            diag[0] += neighbor_interaction(g, dx, scheme)?;
        }
    }
    SymTridiagonal::new(diag, off)
}
