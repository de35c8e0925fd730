use contact1d::discretize::neighbor_interaction;
use contact1d::model::{bound_state_energy, dual_coupling, free_fermion_density};
use contact1d::mps::{apply_gate_and_truncate, bond_gate, initial_state, trotter_gates};
use contact1d::observables::{momentum_distribution, momentum_norm};
use contact1d::oracle::two_particle_convergence;
use contact1d::{
    fermi_lattice, xxz_params, BoseHubbardParams, ContinuumGas, DiscretizationScheme, FermiLatticeParams,
    LatticeHamiltonian, LatticeSpec, MpsState, Potential, Statistics, TruncationPolicy,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn fermi_gas(g: f64) -> ContinuumGas {
    ContinuumGas::new(Statistics::Fermi, g, 2, Potential::Harmonic, 8.0).unwrap()
}

fn anisotropy(g: f64, dx: f64) -> f64 {
    let lattice = LatticeSpec::symmetric(dx, 8.0).unwrap();
    let p = fermi_lattice(&fermi_gas(g), &lattice, DiscretizationScheme::Optimal).unwrap();
    xxz_params(&p, &lattice).anisotropy
}

fn coupling() -> impl Strategy<Value = f64> {
    (0.01f64..100.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn random_hamiltonian(l: usize, d: usize, j: f64, inter: f64, pot: &[f64]) -> LatticeHamiltonian {
    let potential: Vec<f64> = (0..l).map(|i| pot[i % pot.len()]).collect();
    if d == 2 {
        LatticeHamiltonian::Fermi(FermiLatticeParams { hopping: j, neighbor: inter, potential })
    } else {
        LatticeHamiltonian::BoseHubbard(BoseHubbardParams { hopping: j, onsite: inter, potential, n_max: d - 1 })
    }
}

fn overlap(a: &MpsState, b: &MpsState) -> f64 {
    a.to_dense().unwrap().dot(&b.to_dense().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_coupling_is_an_involution(g in coupling()) {
        let back = dual_coupling(dual_coupling(g, Statistics::Fermi).unwrap(), Statistics::Bose).unwrap();
        prop_assert!((back - g).abs() <= 4.0 * f64::EPSILON * g.abs());
    }

    #[test]
    fn bound_state_energy_respects_duality(g in 0.05f64..50.0) {
        let ef = bound_state_energy(g, Statistics::Fermi).unwrap();
        let eb = bound_state_energy(dual_coupling(g, Statistics::Fermi).unwrap(), Statistics::Bose).unwrap();
        prop_assert!((ef - eb).abs() <= 1e-14 * ef.abs());
        prop_assert!(bound_state_energy(-g, Statistics::Fermi).is_none());
    }

    #[test]
    fn attractive_fermions_stay_critical(g in -200.0f64..-0.05, k in 3u32..8) {
        let dx = 0.5f64.powi(k as i32);
        prop_assume!(2.0 * dx / g.abs() < 1.0);
        let b = neighbor_interaction(g, dx, DiscretizationScheme::Optimal).unwrap();
        prop_assert!(b < 0.0);
        prop_assert!(b.abs() < 1.0 / (dx * dx));
        let a = anisotropy(g, dx);
        prop_assert!(a > -1.0 && a < 0.0);
    }

    #[test]
    fn anisotropy_approaches_minus_one(g in 0.1f64..50.0, factor in 1.01f64..10.0) {
        let dx = 1.0 / 32.0;
        let weak = anisotropy(-g, dx);
        let strong = anisotropy(-g * factor, dx);
        prop_assert!(strong < weak, "{strong} !< {weak}");
        prop_assert!(anisotropy(-1e6, dx) + 1.0 < 1e-6);
    }

    #[test]
    fn schemes_agree_through_first_order(g in coupling()) {
        let gap = |dx: f64| {
            let opt = neighbor_interaction(g, dx, DiscretizationScheme::Optimal).unwrap();
            let naive = neighbor_interaction(g, dx, DiscretizationScheme::NaiveTruncated).unwrap();
            dx * dx * (opt - naive).abs()
        };
        let dxs: Vec<f64> = (0..6).map(|k| g.abs() / 8.0 * 0.5f64.powi(k)).collect();
        let gaps: Vec<f64> = dxs.iter().map(|&dx| gap(dx)).collect();
        for w in gaps.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        prop_assert!(gaps[5] < 0.01 * gaps[0]);
    }

    #[test]
    fn gates_conserve_particle_number(
        d in 2usize..5,
        j in 0.1f64..10.0,
        inter in -10.0f64..10.0,
        pot in prop::collection::vec(0.0f64..5.0, 4),
        bond in 0usize..3,
        tau in 0.0f64..1.0,
    ) {
        let ham = random_hamiltonian(4, d, j, inter, &pot);
        let gate = bond_gate(&ham, bond, tau).unwrap();
        for a in 0..d * d {
            for b in 0..d * d {
                if a / d + a % d != b / d + b % d {
                    prop_assert_eq!(gate.matrix[(a, b)], 0.0);
                }
            }
        }
    }

    #[test]
    fn layer_order_does_not_matter(
        d in 2usize..4,
        inter in -5.0f64..5.0,
        pot in prop::collection::vec(0.0f64..3.0, 3),
        tau in 0.05f64..0.5,
    ) {
        let l = 8;
        let ham = random_hamiltonian(l, d, 1.0, inter, &pot);
        let policy = TruncationPolicy::new(64, 0.0).unwrap();
        let (even, odd) = trotter_gates(&ham, tau).unwrap();
        let mut base = initial_state(l, 3, d).unwrap();
        for g in even.iter().chain(&odd) {
            apply_gate_and_truncate(&mut base, g, &policy).unwrap();
        }
        base.canonicalize().unwrap();
        let mut fwd = base.clone();
        let mut rev = base;
        for g in &odd {
            apply_gate_and_truncate(&mut fwd, g, &policy).unwrap();
        }
        for g in odd.iter().rev() {
            apply_gate_and_truncate(&mut rev, g, &policy).unwrap();
        }
        let fidelity = overlap(&fwd, &rev).powi(2) / (overlap(&fwd, &fwd) * overlap(&rev, &rev));
        prop_assert!((1.0 - fidelity).abs() < 1e-12, "fidelity {fidelity}");
    }

    #[test]
    fn momentum_distribution_integrates_to_trace(
        vals in prop::collection::vec(-1.0f64..1.0, 16 * 16),
        k_mult in 1usize..5,
    ) {
        let lattice = LatticeSpec::symmetric(0.25, 4.0).unwrap();
        let l = lattice.site_count;
        let m = DMatrix::from_vec(l, l, vals);
        let odm = &m + m.transpose();
        let nk = momentum_distribution(&odm, &lattice, k_mult * l).unwrap();
        let expected = odm.trace() * lattice.dx;
        prop_assert!((momentum_norm(&nk) - expected).abs() < 1e-10 * (1.0 + expected.abs()));
    }
}

#[test]
fn free_fermion_center_density_grows_with_n() {
    let rho: Vec<f64> = (1..=30).map(|n| free_fermion_density(n, &[0.0]).unwrap()[0]).collect();
    for w in rho.windows(2) {
        assert!(w[1] >= w[0], "{} then {}", w[0], w[1]);
    }
}

#[test]
fn two_particle_errors_shrink_with_spacing() {
    let dxs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let cases = [
        (2.0, Statistics::Fermi),
        (4.0, Statistics::Fermi),
        (-2.0, Statistics::Bose),
        (-1.0, Statistics::Bose),
    ];
    for (g, stat) in cases {
        let schemes: &[DiscretizationScheme] = match stat {
            Statistics::Fermi => &[DiscretizationScheme::Optimal, DiscretizationScheme::NaiveTruncated],
            Statistics::Bose => &[DiscretizationScheme::Optimal],
        };
        for &scheme in schemes {
            let study = two_particle_convergence(g, stat, scheme, &dxs).unwrap();
            for w in study.points.windows(2) {
                assert!(w[1].abs_error < w[0].abs_error, "{stat:?} g={g} {scheme:?}: {:?}", study.points);
            }
        }
    }
}
