use serde::{Deserialize, Serialize};

use super::gate::trotter_gates;
use super::measure::{energy, total_number};
use super::update::{compute_update, install};
use super::{MpsState, TruncationPolicy, TwoSiteGate};
use crate::discretize::LatticeHamiltonian;
use crate::error::{Error, Result};
use crate::exec::ExecPolicy;

/// Imaginary-time schedule. Times are absolute (the CLI converts from
/// units of 1/J).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterSchedule {
    pub tau_initial: f64,
    pub tau_shrink_factor: f64,
    pub tau_min: f64,
    /// A stage ends once |ΔE| / (|E| Δt) between measurements drops below this.
    pub stage_energy_tol: f64,
    pub max_steps: usize,
    /// Trotter steps between energy measurements.
    pub measure_every: usize,
}

impl TrotterSchedule {
    /// Defaults scaled to the hopping amplitude `j`.
    pub fn for_hopping(j: f64) -> Self {
        Self {
            tau_initial: 0.1 / j,
            tau_shrink_factor: 0.1,
            tau_min: 1e-2 / j,
            stage_energy_tol: 1e-8,
            max_steps: 2_000_000,
            measure_every: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.tau_initial.is_finite() && self.tau_initial > 0.0) {
            return bad("tau_initial must be positive");
        }
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau_initial) {
            return bad("tau_min must lie in (0, tau_initial]");
        }
        if !(self.tau_shrink_factor > 0.0 && self.tau_shrink_factor < 1.0) {
            return bad("tau_shrink_factor must lie in (0, 1)");
        }
        if !(self.stage_energy_tol > 0.0) {
            return bad("stage_energy_tol must be positive");
        }
        if self.max_steps == 0 || self.measure_every == 0 {
            return bad("max_steps and measure_every must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub tau: f64,
    pub energy: f64,
    /// Largest discarded weight since the previous row.
    pub trunc_weight: f64,
    pub total_number: f64,
}

/// Occupations of the starting product state: particles on every other
/// site around the chain center, or packed as evenly as the local space
/// allows when they do not fit.
pub fn initial_occupations(site_count: usize, particles: usize, local_dim: usize) -> Result<Vec<usize>> {
    let cap = local_dim - 1;
    if particles > site_count * cap {
        return Err(Error::Config(format!(
            "{particles} particles do not fit {site_count} sites with at most {cap} each"
        )));
    }
    let mut occ = vec![0; site_count];
    if particles == 0 {
        return Ok(occ);
    }
    if 2 * particles - 1 <= site_count {
        let start = (site_count - (2 * particles - 1)) / 2;
        for k in 0..particles {
            occ[start + 2 * k] = 1;
        }
    } else {
        let per = particles.div_ceil(site_count).min(cap);
        let width = particles.div_ceil(per);
        let start = (site_count - width) / 2;
        let mut left = particles;
        for o in occ.iter_mut().skip(start).take(width) {
            *o = per.min(left);
            left -= *o;
        }
    }
    Ok(occ)
}

/// Starting state symmetric under reflection of the chain: the initial
/// pattern superposed with its mirror image.
pub fn initial_state(site_count: usize, particles: usize, local_dim: usize) -> Result<MpsState> {
    let occ = initial_occupations(site_count, particles, local_dim)?;
    let mirror: Vec<usize> = occ.iter().rev().copied().collect();
    let a = MpsState::product(&occ, local_dim)?;
    if mirror == occ {
        return Ok(a);
    }
    MpsState::superpose(&a, &MpsState::product(&mirror, local_dim)?)
}

fn apply_layer(
    state: &mut MpsState,
    gates: &[TwoSiteGate],
    policy: &TruncationPolicy,
    exec: ExecPolicy,
) -> Result<f64> {
    let updates = exec.map(gates, |g| compute_update(state, g, policy));
    let mut worst: f64 = 0.0;
    for u in updates {
        let u = u?;
        worst = worst.max(u.discarded);
        install(state, u);
    }
    Ok(worst)
}

/// Ground state by imaginary-time TEBD from the reflection-symmetric
/// starting pattern. Returns the canonicalized state and the energy trace.
pub fn imaginary_time_ground_state(
    ham: &LatticeHamiltonian,
    particles: usize,
    schedule: &TrotterSchedule,
    policy: &TruncationPolicy,
    exec: ExecPolicy,
) -> Result<(MpsState, Vec<TraceRow>)> {
    let start = initial_state(ham.site_count(), particles, ham.local_dim())?;
    imaginary_time_evolve(start, ham, schedule, policy, exec)
}

/// Imaginary-time evolution of a given state with a shrinking time step.
pub fn imaginary_time_evolve(
    mut state: MpsState,
    ham: &LatticeHamiltonian,
    schedule: &TrotterSchedule,
    policy: &TruncationPolicy,
    exec: ExecPolicy,
) -> Result<(MpsState, Vec<TraceRow>)> {
    schedule.validate()?;
    policy.validate()?;
    if ham.site_count() != state.len() || ham.local_dim() != state.local_dim() {
        return Err(Error::Contract("Hamiltonian and state disagree in shape".into()));
    }
    state.canonicalize()?;
    let mut e_prev = energy(&state, ham)?;
    let mut trace = vec![TraceRow {
        step: 0,
        tau: schedule.tau_initial,
        energy: e_prev,
        trunc_weight: 0.0,
        total_number: total_number(&state)?,
    }];
    let mut step = 0;
    let mut tau = schedule.tau_initial;
    loop {
        let (even, odd) = trotter_gates(ham, tau)?;
        let (even_full, _) = trotter_gates(ham, 2.0 * tau)?;
        loop {
            if step >= schedule.max_steps {
                return Err(Error::Convergence { steps: step, trace });
            }
            let k = schedule.measure_every.min(schedule.max_steps - step);
            let mut worst = apply_layer(&mut state, &even, policy, exec)?;
            for r in 0..k {
                worst = worst.max(apply_layer(&mut state, &odd, policy, exec)?);
                let last = if r + 1 == k { &even } else { &even_full };
                worst = worst.max(apply_layer(&mut state, last, policy, exec)?);
            }
            step += k;
            state.canonicalize()?;
            let e = energy(&state, ham)?;
            trace.push(TraceRow {
                step,
                tau,
                energy: e,
                trunc_weight: worst,
                total_number: total_number(&state)?,
            });
            if !e.is_finite() {
                return Err(Error::Numerical { bond: 0, reason: format!("energy {e}") });
            }
            let rate = (e - e_prev).abs() / (e.abs().max(f64::MIN_POSITIVE) * k as f64 * tau);
            e_prev = e;
            log::debug!("step {step} τ={tau:.3e} E={e:.12} rate={rate:.2e} χ={}", state.max_bond_dim());
            if rate < schedule.stage_energy_tol {
                break;
            }
        }
        if tau <= schedule.tau_min * (1.0 + 1e-9) {
            break;
        }
        tau = (tau * schedule.tau_shrink_factor).max(schedule.tau_min);
    }
    Ok((state, trace))
}
