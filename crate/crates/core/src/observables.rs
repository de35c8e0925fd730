//! Continuum observables from a converged state: density, one-particle
//! density matrix, momentum distribution and pair correlations.
//!
//! Lattice expectation values are divided by Δx (one-body) or Δx² (two-body)
//! so that profiles compare directly with continuum quantities.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::discretize::{LatticeHamiltonian, LatticeSpec};
use crate::error::{Error, Result};
use crate::exec::ExecPolicy;
use crate::model::Statistics;
use crate::mps::{energy, LocalOp, MpsState, TraceRow};

/// Double-occupation weight below which a boson chain is treated as hard-core.
pub const HARD_CORE_WEIGHT: f64 = 1e-6;

fn check_shape(state: &MpsState, lattice: &LatticeSpec) -> Result<()> {
    if state.len() != lattice.site_count {
        return Err(Error::Contract(format!(
            "state of {} sites on a lattice of {}",
            state.len(),
            lattice.site_count
        )));
    }
    Ok(())
}

/// (x_i, ⟨n_i⟩/Δx).
pub fn density(state: &MpsState, lattice: &LatticeSpec) -> Result<Vec<(f64, f64)>> {
    check_shape(state, lattice)?;
    let occ = state.occupations()?;
    Ok(occ.iter().enumerate().map(|(i, n)| (lattice.position(i), n / lattice.dx)).collect())
}

/// ⟨a†_i a_j⟩/Δx; for fermions the Jordan-Wigner string ∏(−1)^{n_m} runs
/// over the sites strictly between i and j.
pub fn one_particle_density_matrix(
    state: &MpsState,
    statistics: Statistics,
    lattice: &LatticeSpec,
    exec: ExecPolicy,
) -> Result<DMatrix<f64>> {
    check_shape(state, lattice)?;
    let d = state.local_dim();
    let string = (statistics == Statistics::Fermi).then(|| LocalOp::parity(d));
    let num: Vec<f64> = (0..d).map(|s| s as f64).collect();
    let m = state.correlation_matrix(&LocalOp::create(d), string.as_ref(), &LocalOp::annihilate(d), &num, exec)?;
    Ok(m / lattice.dx)
}

/// Σ_i ⟨P(n_i ≥ 2)⟩.
pub fn double_occupation_weight(state: &MpsState) -> Result<f64> {
    let f: Vec<f64> = (0..state.local_dim()).map(|s| if s >= 2 { 1.0 } else { 0.0 }).collect();
    (0..state.len()).map(|i| state.site_expectation(i, &f)).sum()
}

/// Largest per-site probability of the top occupation level n_max.
pub fn max_top_occupation(state: &MpsState) -> Result<f64> {
    let d = state.local_dim();
    let f: Vec<f64> = (0..d).map(|s| if s + 1 == d { 1.0 } else { 0.0 }).collect();
    (0..state.len()).map(|i| state.site_expectation(i, &f)).try_fold(0.0, |m, p| p.map(|p| f64::max(m, p)))
}

/// Fermionic density matrix of a boson chain read as hard-core bosons, or
/// `None` when double occupations exceed [`HARD_CORE_WEIGHT`].
pub fn fermionized_boson_odm(state: &MpsState, lattice: &LatticeSpec, exec: ExecPolicy) -> Result<Option<DMatrix<f64>>> {
    if double_occupation_weight(state)? >= HARD_CORE_WEIGHT {
        return Ok(None);
    }
    one_particle_density_matrix(state, Statistics::Fermi, lattice, exec).map(Some)
}

/// The k-grid: `k_count` points from −π/Δx in steps of 2π/(Δx k_count).
pub fn momentum_grid(lattice: &LatticeSpec, k_count: usize) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (lattice.dx * k_count as f64);
    (0..k_count).map(|m| -std::f64::consts::PI / lattice.dx + m as f64 * dk).collect()
}

/// n(k) = (Δx²/2π) Σ_{j,l} cos(k(x_j − x_l)) ρ(x_j, x_l) on [`momentum_grid`].
pub fn momentum_distribution(odm: &DMatrix<f64>, lattice: &LatticeSpec, k_count: usize) -> Result<Vec<(f64, f64)>> {
    let l = odm.nrows();
    if odm.ncols() != l || l != lattice.site_count {
        return Err(Error::Contract("density matrix does not match the lattice".into()));
    }
    if (odm - odm.transpose()).amax() > 1e-9 * odm.amax().max(1.0) {
        return Err(Error::Contract("density matrix is not symmetric".into()));
    }
    if k_count == 0 {
        return Err(Error::Config("k_count must be positive".into()));
    }
    // ρ depends on x_j − x_l only through the separation index.
    let mut by_sep = vec![0.0; l];
    for j in 0..l {
        by_sep[0] += odm[(j, j)];
        for r in 1..l - j {
            by_sep[r] += 2.0 * odm[(j, j + r)];
        }
    }
    let pref = lattice.dx * lattice.dx / (2.0 * std::f64::consts::PI);
    Ok(momentum_grid(lattice, k_count)
        .into_iter()
        .map(|k| {
            let s: f64 = by_sep.iter().enumerate().map(|(r, v)| v * (k * r as f64 * lattice.dx).cos()).sum();
            (k, pref * s)
        })
        .collect())
}

/// n(k) at a single momentum.
pub fn momentum_at(odm: &DMatrix<f64>, lattice: &LatticeSpec, k: f64) -> f64 {
    let l = odm.nrows();
    let mut s = 0.0;
    for j in 0..l {
        for m in 0..l {
            s += odm[(j, m)] * (k * (j as f64 - m as f64) * lattice.dx).cos();
        }
    }
    s * lattice.dx * lattice.dx / (2.0 * std::f64::consts::PI)
}

/// ∫ n(k) dk on the periodic grid.
pub fn momentum_norm(nk: &[(f64, f64)]) -> f64 {
    let dk = if nk.len() > 1 { nk[1].0 - nk[0].0 } else { 0.0 };
    nk.iter().map(|p| p.1).sum::<f64>() * dk
}

/// ⟨k²⟩ of n(k).
pub fn momentum_second_moment(nk: &[(f64, f64)]) -> f64 {
    let w: f64 = nk.iter().map(|p| p.1).sum();
    nk.iter().map(|(k, n)| k * k * n).sum::<f64>() / w
}

/// ⟨x²⟩ − ⟨x⟩² of a density profile.
pub fn density_variance(profile: &[(f64, f64)]) -> f64 {
    let w: f64 = profile.iter().map(|p| p.1).sum();
    let mean = profile.iter().map(|(x, r)| x * r).sum::<f64>() / w;
    profile.iter().map(|(x, r)| (x - mean).powi(2) * r).sum::<f64>() / w
}

/// G²(i, j) = ⟨a†_i a†_j a_j a_i⟩ / Δx².
pub fn pair_correlation(state: &MpsState, lattice: &LatticeSpec, exec: ExecPolicy) -> Result<DMatrix<f64>> {
    check_shape(state, lattice)?;
    let d = state.local_dim();
    let diag: Vec<f64> = (0..d).map(|s| (s * s.saturating_sub(1)) as f64).collect();
    let n = LocalOp::number(d);
    let m = state.correlation_matrix(&n, None, &n, &diag, exec)?;
    Ok(m / (lattice.dx * lattice.dx))
}

/// (x_{i₀+m} − x_{i₀}, G²(i₀, i₀ + m)) for m ≥ 0, i₀ the site nearest x = 0.
pub fn g2_center_cut(pair: &DMatrix<f64>, lattice: &LatticeSpec) -> Vec<(f64, f64)> {
    let i0 = lattice.center_site();
    (i0..lattice.site_count)
        .map(|j| (lattice.position(j) - lattice.position(i0), pair[(i0, j)]))
        .collect()
}

/// Number of strict interior local maxima.
pub fn count_local_maxima(values: &[f64]) -> usize {
    values.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LobeAnalysis {
    /// Summed |ρ| over the quadrants x·y < 0.
    pub lobe_weight: f64,
    /// Summed |ρ| over the quadrants x·y > 0.
    pub core_weight: f64,
    pub ratio: f64,
    /// Sign of the lobe extremum on the anti-diagonal (0 when no lobe is found).
    pub sign: f64,
}

/// Weight of the off-diagonal lobes of ρ(x, y) by quadrant sums.
///
/// The sign is read on the anti-diagonal ρ(x, −x): past the first local
/// minimum of |ρ| moving out from the origin, the largest entry is the lobe.
pub fn lobe_analysis(odm: &DMatrix<f64>, positions: &[f64]) -> LobeAnalysis {
    let l = positions.len();
    let (mut lobe, mut core) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let p = positions[i] * positions[j];
            if p < 0.0 {
                lobe += odm[(i, j)].abs();
            } else if p > 0.0 {
                core += odm[(i, j)].abs();
            }
        }
    }
    let mut outward: Vec<usize> = (0..l).filter(|&i| positions[i] > 0.0).collect();
    outward.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
    let anti: Vec<f64> = outward
        .iter()
        .map(|&i| {
            let m = (0..l).min_by(|&a, &b| (positions[a] + positions[i]).abs().total_cmp(&(positions[b] + positions[i]).abs()));
            odm[(i, m.expect("nonempty grid"))]
        })
        .collect();
    let node = (1..anti.len().saturating_sub(1))
        .find(|&k| anti[k].abs() <= anti[k - 1].abs() && anti[k].abs() <= anti[k + 1].abs());
    let extreme = node.map_or(0.0, |k| anti[k..].iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m }));
    LobeAnalysis {
        lobe_weight: lobe,
        core_weight: core,
        ratio: lobe / core,
        sign: if extreme == 0.0 { 0.0 } else { extreme.signum() },
    }
}

/// Least-squares fit y = a + b/N; returns (a, b, R²).
pub fn fit_inverse_n(ns: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = ns.iter().map(|n| 1.0 / n).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (a, b, 1.0 - ss_res / ss_tot)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationSummary {
    pub max_discarded_weight: f64,
    pub max_bond_dim: usize,
    pub steps: usize,
}

impl TruncationSummary {
    pub fn from_trace(state: &MpsState, trace: &[TraceRow]) -> Self {
        Self {
            max_discarded_weight: trace.iter().map(|r| r.trunc_weight).fold(0.0, f64::max),
            max_bond_dim: state.max_bond_dim(),
            steps: trace.last().map_or(0, |r| r.step),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableReport {
    pub statistics: Statistics,
    pub energy: f64,
    pub density: Vec<(f64, f64)>,
    pub odm: DMatrix<f64>,
    pub momentum: Vec<(f64, f64)>,
    pub pair_corr: DMatrix<f64>,
    pub g2_cut: Vec<(f64, f64)>,
    pub total_number: f64,
    /// Bosons only: max over sites of P(n_i = n_max).
    pub top_occupation: Option<f64>,
    pub trunc_diagnostics: TruncationSummary,
}

/// All observables of a converged state; `k_count = 0` selects 4L momenta.
pub fn report(
    state: &MpsState,
    ham: &LatticeHamiltonian,
    lattice: &LatticeSpec,
    trace: &[TraceRow],
    k_count: usize,
    exec: ExecPolicy,
) -> Result<ObservableReport> {
    let statistics = ham.statistics();
    let density = density(state, lattice)?;
    let odm = one_particle_density_matrix(state, statistics, lattice, exec)?;
    let k_count = if k_count == 0 { 4 * lattice.site_count } else { k_count };
    let momentum = momentum_distribution(&odm, lattice, k_count)?;
    let pair_corr = pair_correlation(state, lattice, exec)?;
    let g2_cut = g2_center_cut(&pair_corr, lattice);
    Ok(ObservableReport {
        statistics,
        energy: energy(state, ham)?,
        total_number: density.iter().map(|p| p.1).sum::<f64>() * lattice.dx,
        density,
        odm,
        momentum,
        pair_corr,
        g2_cut,
        top_occupation: match statistics {
            Statistics::Bose => Some(max_top_occupation(state)?),
            Statistics::Fermi => None,
        },
        trunc_diagnostics: TruncationSummary::from_trace(state, trace),
    })
}
