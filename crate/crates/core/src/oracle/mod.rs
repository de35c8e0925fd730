//! Exact references independent of the tensor-network engine.

mod ed;
mod free;
mod tg;

pub use ed::{small_system_ed, EdResult, ED_MAX_DIM};
pub use free::{lattice_free_fermions, FreeFermionResult};
pub use tg::{tg_odm_bruteforce, tg_odm_semiclosed};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::discretize::{relative_hamiltonian, DiscretizationScheme, LatticeSpec};
use crate::error::{Error, Result};
use crate::model::{bound_state_energy, bound_state_kappa, Statistics};
use crate::tridiagonal::SymTridiagonal;

pub const DENSE_MAX_DIM: usize = 4096;
pub const TRIDIAGONAL_MAX_DIM: usize = 20000;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseSpectrumResult {
    /// Ascending. The full spectrum for dense input, the lowest few levels
    /// for tridiagonal input.
    pub eigenvalues: Vec<f64>,
    pub ground_vector: DVector<f64>,
    pub dimension: usize,
    /// ‖Hv − E₀v‖ of the ground pair.
    pub residual: f64,
}

/// Full diagonalization of a dense symmetric matrix.
pub fn dense_ground_state(h: &DMatrix<f64>) -> Result<DenseSpectrumResult> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::Contract(format!("matrix of shape {}×{} is not square", n, h.ncols())));
    }
    if n > DENSE_MAX_DIM {
        return Err(Error::Unsupported(format!("dense dimension {n} exceeds {DENSE_MAX_DIM}")));
    }
    let scale = h.amax().max(1.0);
    if (h - h.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Contract("matrix is not symmetric".into()));
    }
    let (vals, vecs) = crate::linalg::symmetric_eigen(h)?;
    let e0 = vals[0];
    let mut v = vecs.column(0).into_owned();
    orient(&mut v);
    let residual = (h * &v - &v * e0).norm();
    Ok(DenseSpectrumResult {
        eigenvalues: vals.iter().copied().collect(),
        ground_vector: v,
        dimension: n,
        residual,
    })
}

/// Lowest `levels` eigenvalues and the ground vector of a tridiagonal matrix.
pub fn tridiagonal_ground_state(t: &SymTridiagonal, levels: usize) -> Result<DenseSpectrumResult> {
    let n = t.dim();
    if n > TRIDIAGONAL_MAX_DIM {
        return Err(Error::Unsupported(format!("tridiagonal dimension {n} exceeds {TRIDIAGONAL_MAX_DIM}")));
    }
    let eigenvalues: Vec<f64> = (0..levels.clamp(1, n)).map(|k| t.eigenvalue(k)).collect();
    let e0 = eigenvalues[0];
    let mut v = t.eigenvector(e0);
    orient(&mut v);
    let residual = (DVector::from_vec(t.mul_vec(v.as_slice())) - &v * e0).norm();
    Ok(DenseSpectrumResult { eigenvalues, ground_vector: v, dimension: n, residual })
}

/// Sign convention: the largest-magnitude component is positive.
fn orient(v: &mut DVector<f64>) {
    let k = v.iamax();
    if v[k] < 0.0 {
        v.neg_mut();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub dx: f64,
    pub energy: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub scheme: DiscretizationScheme,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of log(error) against log(Δx).
    pub fitted_order: f64,
}

/// Relative-coordinate chain length: at least eight bound-state lengths
/// on each side and never shorter than 32 oscillator units.
pub fn relative_chain_sites(kappa: f64, dx: f64) -> usize {
    let extent = (16.0 / kappa).max(32.0);
    (extent / dx).ceil() as usize
}

/// Two-body bound-state energy on a sequence of lattices.
pub fn two_particle_convergence(
    g: f64,
    statistics: Statistics,
    scheme: DiscretizationScheme,
    dx_list: &[f64],
) -> Result<ConvergenceStudy> {
    let exact = bound_state_energy(g, statistics).ok_or_else(|| {
        Error::Domain(format!("no two-body bound state for {statistics:?} at coupling {g}"))
    })?;
    let kappa = bound_state_kappa(g, statistics).unwrap_or(1.0);
    let mut points = Vec::with_capacity(dx_list.len());
    for &dx in dx_list {
        let lattice = LatticeSpec::new(dx, relative_chain_sites(kappa, dx), 0.0)?;
        let h = relative_hamiltonian(g, statistics, &lattice, scheme)?;
        let e = h.eigenvalue(0);
        points.push(ConvergencePoint { dx, energy: e, abs_error: (e - exact).abs() });
    }
    let fitted_order = loglog_slope(&points);
    Ok(ConvergenceStudy { scheme, points, fitted_order })
}

fn loglog_slope(points: &[ConvergencePoint]) -> f64 {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.abs_error > 0.0)
        .map(|p| (p.dx.ln(), p.abs_error.ln()))
        .collect();
    if xy.len() < 2 {
        return f64::NAN;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        let r = dense_ground_state(&h).unwrap();
        assert_abs_diff_eq!(r.eigenvalues[0], -1.0, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(r.ground_vector[0], s, epsilon = 1e-14);
        assert_abs_diff_eq!(r.ground_vector[1], s, epsilon = 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -0.5, 0.0]);
        assert!(matches!(dense_ground_state(&h), Err(Error::Contract(_))));
    }

    #[test]
    fn free_box_spectrum() {
        let l = 50;
        let dx = 0.1;
        // finite-difference −∂² in a box
        let j = 1.0 / (dx * dx);
        let t = SymTridiagonal::new(vec![2.0 * j; l], vec![-j; l - 1]).unwrap();
        let exact = 2.0 / (dx * dx) * (1.0 - (std::f64::consts::PI / (l + 1) as f64).cos());
        let r = tridiagonal_ground_state(&t, 3).unwrap();
        assert_abs_diff_eq!(r.eigenvalues[0], exact, epsilon = 1e-10);
        assert!(r.residual < 1e-9 * t.norm_inf());
        let d = dense_ground_state(&t.to_dense()).unwrap();
        assert_abs_diff_eq!(d.eigenvalues[0], exact, epsilon = 1e-10);
        assert!(d.residual < 1e-9 * t.norm_inf());
        assert!((d.ground_vector - r.ground_vector).amax() < 1e-9);
    }

    #[test]
    fn boson_bound_state_at_fine_resolution() {
        let lattice = LatticeSpec::new(1.0 / 64.0, 2048, 0.0).unwrap();
        let h = relative_hamiltonian(-2.0, Statistics::Bose, &lattice, DiscretizationScheme::Optimal).unwrap();
        let r = tridiagonal_ground_state(&h, 1).unwrap();
        assert_abs_diff_eq!(r.eigenvalues[0], -1.0, epsilon = 2e-3);
    }

    #[test]
    fn boson_convergence_is_second_order() {
        let dxs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let s = two_particle_convergence(-2.0, Statistics::Bose, DiscretizationScheme::Optimal, &dxs).unwrap();
        assert!(s.points.windows(2).all(|w| w[1].abs_error < w[0].abs_error));
        assert!((s.fitted_order - 2.0).abs() < 0.2, "{}", s.fitted_order);
    }

    #[test]
    fn fermion_lattice_energies_follow_closed_forms() {
        // The lattice two-body problem at γ_F = 2 is solvable: E = −1/(1 − Δx)
        // for the optimal coupling and −1/(1 + Δx) for the truncated one.
        let dxs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let opt = two_particle_convergence(2.0, Statistics::Fermi, DiscretizationScheme::Optimal, &dxs).unwrap();
        let naive =
            two_particle_convergence(2.0, Statistics::Fermi, DiscretizationScheme::NaiveTruncated, &dxs).unwrap();
        for (p, q) in opt.points.iter().zip(&naive.points) {
            assert_abs_diff_eq!(p.energy, -1.0 / (1.0 - p.dx), epsilon = 1e-9);
            assert_abs_diff_eq!(q.energy, -1.0 / (1.0 + q.dx), epsilon = 1e-9);
        }
        assert!(opt.points.windows(2).all(|w| w[1].abs_error < w[0].abs_error));
        assert!(naive.points.windows(2).all(|w| w[1].abs_error < w[0].abs_error));
        assert!((opt.fitted_order - 1.0).abs() < 0.1);
    }

    #[test]
    fn convergence_requires_bound_state() {
        let r = two_particle_convergence(-2.0, Statistics::Fermi, DiscretizationScheme::Optimal, &[0.1]);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
