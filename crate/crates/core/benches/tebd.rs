use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use contact1d::discretize::fermi_lattice;
use contact1d::mps::imaginary_time_ground_state;
use contact1d::observables::one_particle_density_matrix;
use contact1d::oracle::tg_odm_bruteforce;
use contact1d::{
    ContinuumGas, DiscretizationScheme, ExecPolicy, LatticeHamiltonian, LatticeSpec, Potential, Statistics,
    TrotterSchedule, TruncationPolicy,
};

const POLICIES: [(&str, ExecPolicy); 2] = [("serial", ExecPolicy::Serial), ("parallel", ExecPolicy::Parallel)];

fn model(n: usize) -> (LatticeSpec, LatticeHamiltonian) {
    let lattice = LatticeSpec::symmetric(0.125, 12.0).unwrap();
    let gas = ContinuumGas::new(Statistics::Fermi, -3.2, n, Potential::Harmonic, 12.0).unwrap();
    let ham = LatticeHamiltonian::Fermi(fermi_lattice(&gas, &lattice, DiscretizationScheme::Optimal).unwrap());
    (lattice, ham)
}

/// A single stage that stops at its first measurement: exactly `steps` Trotter steps.
fn fixed_steps(j: f64, steps: usize) -> TrotterSchedule {
    TrotterSchedule {
        tau_initial: 0.2 / j,
        tau_shrink_factor: 0.1,
        tau_min: 0.2 / j,
        stage_energy_tol: f64::MAX,
        max_steps: steps,
        measure_every: steps,
    }
}

fn tebd_steps(c: &mut Criterion) {
    let (lattice, ham) = model(4);
    let sched = fixed_steps(lattice.hopping(), 50);
    let mut group = c.benchmark_group("tebd_50_steps");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| imaginary_time_ground_state(&ham, 4, &sched, &TruncationPolicy::default(), exec).unwrap())
        });
    }
    group.finish();
}

fn density_matrix(c: &mut Criterion) {
    let (lattice, ham) = model(4);
    let sched = fixed_steps(lattice.hopping(), 200);
    let (state, _) =
        imaginary_time_ground_state(&ham, 4, &sched, &TruncationPolicy::default(), ExecPolicy::Serial).unwrap();
    let mut group = c.benchmark_group("fermion_odm");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| one_particle_density_matrix(&state, Statistics::Fermi, &lattice, exec).unwrap())
        });
    }
    group.finish();
}

fn tonks_quadrature(c: &mut Criterion) {
    let grid: Vec<f64> = (-12..=12).map(|i| i as f64 * 0.25).collect();
    let mut group = c.benchmark_group("tg_odm_n3");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| tg_odm_bruteforce(3, &grid, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tebd_steps, density_matrix, tonks_quadrature);
criterion_main!(benches);
