//! Continuum-side description of the gas and closed-form references.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest harmonic-oscillator level evaluated by [`trap_orbital`].
pub const MAX_ORBITAL: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

impl Statistics {
    pub fn dual(self) -> Statistics {
        match self {
            Statistics::Bose => Statistics::Fermi,
            Statistics::Fermi => Statistics::Bose,
        }
    }
}

/// External single-particle potential V(x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    None,
    /// V(x) = x²/2.
    Harmonic,
    /// Linear interpolation through (x, V) samples with strictly increasing x.
    Tabulated(Vec<(f64, f64)>),
}

impl Potential {
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Config("tabulated potential needs at least two samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Config("tabulated potential x values must strictly increase".into()));
        }
        if samples.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::Config("tabulated potential contains non-finite samples".into()));
        }
        Ok(Potential::Tabulated(samples))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Potential::None => Ok(0.0),
            Potential::Harmonic => Ok(0.5 * x * x),
            Potential::Tabulated(s) => {
                let (first, last) = (s[0].0, s[s.len() - 1].0);
                // Sites computed as origin + i*dx may overshoot by an ulp.
                let slack = 1e-12 * (last - first).abs().max(1.0);
                if x < first - slack || x > last + slack {
                    return Err(Error::Range { x });
                }
                let x = x.clamp(first, last);
                let k = s.partition_point(|&(xs, _)| xs <= x).clamp(1, s.len() - 1);
                let (x0, v0) = s[k - 1];
                let (x1, v1) = s[k];
                Ok(v0 + (v1 - v0) * (x - x0) / (x1 - x0))
            }
        }
    }
}

/// A gas of identical particles with a contact interaction in a trap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumGas {
    pub statistics: Statistics,
    /// γ_B for bosons, γ_F for fermions.
    pub coupling: f64,
    pub particle_count: usize,
    pub trap: Potential,
    /// Total simulated length in oscillator lengths.
    pub extent: f64,
}

impl ContinuumGas {
    pub fn new(
        statistics: Statistics,
        coupling: f64,
        particle_count: usize,
        trap: Potential,
        extent: f64,
    ) -> Result<Self> {
        if particle_count == 0 {
            return Err(Error::Config("particle count must be at least 1".into()));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::Config(format!("extent must be positive, got {extent}")));
        }
        // ±∞ is allowed and denotes the hard-core (Tonks) limits.
        if coupling.is_nan() {
            return Err(Error::Config("coupling is NaN".into()));
        }
        Ok(Self { statistics, coupling, particle_count, trap, extent })
    }

    /// The same gas seen through the Bose-Fermi mapping.
    pub fn dual(&self) -> Result<Self> {
        Ok(Self {
            statistics: self.statistics.dual(),
            coupling: dual_coupling(self.coupling, self.statistics)?,
            ..self.clone()
        })
    }
}

/// Coupling of the dual gas: γ_B = −4/γ_F and γ_F = −4/γ_B.
pub fn dual_coupling(g: f64, _from: Statistics) -> Result<f64> {
    if g == 0.0 {
        return Err(Error::Domain("dual coupling of g = 0 is infinite".into()));
    }
    Ok(-4.0 / g)
}

/// Two-body bound-state energy of the relative Hamiltonian −∂² + V, if any.
///
/// The contact condition φ'(0⁺) = (γ_B/2)φ(0) admits e^{−κx} with κ = −γ_B/2,
/// so attractive bosons bind with E = −γ_B²/4. The fermionic condition
/// φ'(0⁺) = −(2/γ_F)φ(0⁺) binds for γ_F > 0 with E = −4/γ_F².
pub fn bound_state_energy(g: f64, statistics: Statistics) -> Option<f64> {
    match statistics {
        Statistics::Bose if g < 0.0 => Some(-0.25 * g * g),
        Statistics::Fermi if g > 0.0 => Some(-4.0 / (g * g)),
        _ => None,
    }
}

/// Decay constant κ of the bound state, E = −κ².
pub fn bound_state_kappa(g: f64, statistics: Statistics) -> Option<f64> {
    bound_state_energy(g, statistics).map(|e| (-e).sqrt())
}

/// n-th eigenfunction of −½∂² + ½x², by the Hermite-function recurrence.
pub fn trap_orbital(n: usize, x: f64) -> Result<f64> {
    if n > MAX_ORBITAL {
        return Err(Error::Unsupported(format!(
            "trap orbital n = {n} exceeds the recurrence guard {MAX_ORBITAL}"
        )));
    }
    Ok(*trap_orbitals(n + 1, x).last().expect("n + 1 > 0 orbitals"))
}

/// φ_0(x), …, φ_{count−1}(x) in one pass.
pub(crate) fn trap_orbitals(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let phi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(phi0);
    if count == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * phi0);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Density of N non-interacting fermions filling the lowest trap orbitals.
pub fn free_fermion_density(n: usize, x_grid: &[f64]) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("particle count must be at least 1".into()));
    }
    if n > MAX_ORBITAL + 1 {
        return Err(Error::Unsupported(format!("free fermion density for N = {n}")));
    }
    Ok(x_grid
        .iter()
        .map(|&x| trap_orbitals(n, x).iter().map(|p| p * p).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn duality_examples() {
        assert_eq!(dual_coupling(-4.0, Statistics::Fermi).unwrap(), 1.0);
        assert_eq!(dual_coupling(1.0, Statistics::Bose).unwrap(), -4.0);
        assert_abs_diff_eq!(dual_coupling(-0.05, Statistics::Fermi).unwrap(), 80.0, epsilon = 1e-12);
        assert!(matches!(dual_coupling(0.0, Statistics::Bose), Err(Error::Domain(_))));
    }

    #[test]
    fn duality_is_an_involution() {
        for g in [0.05, -0.05, 1.0, -1.0, 51.2, -51.2] {
            let back = dual_coupling(dual_coupling(g, Statistics::Fermi).unwrap(), Statistics::Bose)
                .unwrap();
            assert_abs_diff_eq!(back, g, epsilon = 4.0 * f64::EPSILON * g.abs());
        }
    }

    #[test]
    fn bound_states() {
        assert_eq!(bound_state_energy(-2.0, Statistics::Bose), Some(-1.0));
        assert_eq!(bound_state_energy(2.0, Statistics::Fermi), Some(-1.0));
        assert_eq!(bound_state_energy(1.0, Statistics::Bose), None);
        assert_eq!(bound_state_energy(-1.0, Statistics::Fermi), None);
        for gf in [0.5, 2.0, 10.0] {
            let gb = dual_coupling(gf, Statistics::Fermi).unwrap();
            let ef = bound_state_energy(gf, Statistics::Fermi).unwrap();
            let eb = bound_state_energy(gb, Statistics::Bose).unwrap();
            assert!((ef - eb).abs() < 1e-14 * ef.abs());
        }
    }

    #[test]
    fn orbital_values() {
        assert_abs_diff_eq!(trap_orbital(0, 0.0).unwrap(), 0.751_125_544_464_942_5, epsilon = 1e-15);
        assert_eq!(trap_orbital(1, 0.0).unwrap(), 0.0);
        assert!(matches!(trap_orbital(61, 0.3), Err(Error::Unsupported(_))));
        // φ_2(x) = (2x² − 1) φ_0(x) / √2
        let x = 0.7;
        let expect = (2.0 * x * x - 1.0) / 2f64.sqrt() * trap_orbital(0, x).unwrap();
        assert_abs_diff_eq!(trap_orbital(2, x).unwrap(), expect, epsilon = 1e-14);
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn orbitals_are_orthonormal() {
        let norm3 = simpson(|x| trap_orbital(3, x).unwrap().powi(2), -12.0, 12.0, 4000);
        assert_abs_diff_eq!(norm3, 1.0, epsilon = 1e-10);
        let overlap = simpson(|x| trap_orbital(3, x).unwrap() * trap_orbital(5, x).unwrap(), -12.0, 12.0, 4000);
        assert_abs_diff_eq!(overlap, 0.0, epsilon = 1e-10);
        let high = simpson(|x| trap_orbital(40, x).unwrap().powi(2), -14.0, 14.0, 20000);
        assert_abs_diff_eq!(high, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn free_density_examples() {
        let d = free_fermion_density(1, &[0.0]).unwrap();
        assert_abs_diff_eq!(d[0], 1.0 / PI.sqrt(), epsilon = 1e-14);

        let dx = 1.0 / 64.0;
        let grid: Vec<f64> = (0..=1024).map(|i| -8.0 + i as f64 * dx).collect();
        let rho = free_fermion_density(2, &grid).unwrap();
        let trap: f64 = rho.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dx).sum();
        assert_abs_diff_eq!(trap, 2.0, epsilon = 1e-6);
        for (a, b) in rho.iter().zip(rho.iter().rev()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }

        let mut prev = 0.0;
        for n in 1..=12 {
            let c = free_fermion_density(n, &[0.0]).unwrap()[0];
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn tabulated_potential_interpolates_and_guards_range() {
        let p = Potential::tabulated(vec![(-1.0, 1.0), (0.0, 0.0), (2.0, 4.0)]).unwrap();
        assert_abs_diff_eq!(p.eval(-0.5).unwrap(), 0.5);
        assert_abs_diff_eq!(p.eval(1.0).unwrap(), 2.0);
        assert!(matches!(p.eval(2.5), Err(Error::Range { .. })));
        assert!(Potential::tabulated(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn gas_guards() {
        assert!(ContinuumGas::new(Statistics::Fermi, -1.0, 0, Potential::Harmonic, 10.0).is_err());
        assert!(ContinuumGas::new(Statistics::Fermi, -1.0, 2, Potential::Harmonic, 0.0).is_err());
        let g = ContinuumGas::new(Statistics::Fermi, -0.8, 3, Potential::Harmonic, 12.0).unwrap();
        let d = g.dual().unwrap();
        assert_eq!(d.statistics, Statistics::Bose);
        assert_abs_diff_eq!(d.coupling, 5.0, epsilon = 1e-14);
    }
}
