//! Run modes.

use std::path::Path;

use contact1d::discretize::{bose_hubbard, fermi_lattice, relative_hamiltonian, xxz_params};
use contact1d::mps::{imaginary_time_ground_state, MpsState, TraceRow};
use contact1d::observables::{
    self, count_local_maxima, density_variance, momentum_at, momentum_second_moment, ObservableReport,
};
use contact1d::oracle::{self, two_particle_convergence, ConvergenceStudy};
use contact1d::tridiagonal::SymTridiagonal;
use contact1d::{
    ContinuumGas, DiscretizationScheme, ExecPolicy, LatticeHamiltonian, LatticeSpec, Potential, Statistics,
};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::config::{Mode, RunConfig};
use crate::output::{fmt, write_atomic, write_csv, write_json, write_matrix, write_pairs, write_trace};
use crate::CliError;

pub const FAILED_MARKER: &str = "FAILED";

/// One converged ground state with its observables.
pub struct Solved {
    pub lattice: LatticeSpec,
    pub ham: LatticeHamiltonian,
    pub state: MpsState,
    pub trace: Vec<TraceRow>,
    pub report: ObservableReport,
}

/// Lattice model for a trapped gas of the given statistics.
pub fn build_model(
    statistics: Statistics,
    g: f64,
    particles: usize,
    dx: f64,
    extent: f64,
    scheme: DiscretizationScheme,
    n_max: usize,
) -> Result<(LatticeSpec, LatticeHamiltonian), CliError> {
    let lattice = LatticeSpec::symmetric(dx, extent)?;
    let gas = ContinuumGas::new(statistics, g, particles, Potential::Harmonic, extent)?;
    let ham = match statistics {
        Statistics::Fermi => LatticeHamiltonian::Fermi(fermi_lattice(&gas, &lattice, scheme)?),
        Statistics::Bose => LatticeHamiltonian::BoseHubbard(bose_hubbard(&gas, &lattice, n_max)?),
    };
    Ok((lattice, ham))
}

/// Imaginary-time ground state plus observables. On a convergence failure
/// the partial trace is written to `dir` before the error is returned.
pub fn solve(
    cfg: &RunConfig,
    statistics: Statistics,
    g: f64,
    dx: f64,
    dir: Option<&Path>,
    exec: ExecPolicy,
) -> Result<Solved, CliError> {
    let (lattice, ham) = build_model(statistics, g, cfg.particles, dx, cfg.extent, cfg.scheme, cfg.n_max)?;
    let schedule = cfg.schedule(lattice.hopping());
    log::info!(
        "{statistics:?} g={g} N={} dx={dx} L={} ({})",
        cfg.particles,
        lattice.site_count,
        dir.map_or(String::from("-"), |d| d.display().to_string())
    );
    let (state, trace) = match imaginary_time_ground_state(&ham, cfg.particles, &schedule, &cfg.policy(), exec) {
        Ok(r) => r,
        Err(contact1d::Error::Convergence { steps, trace }) => {
            if let Some(d) = dir {
                write_trace(&d.join("energy_trace.csv"), &trace)?;
            }
            return Err(contact1d::Error::Convergence { steps, trace }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let report = observables::report(&state, &ham, &lattice, &trace, cfg.k_count, exec)?;
    if let Some(p) = report.top_occupation.filter(|&p| p >= TOP_OCCUPATION_LIMIT) {
        log::warn!("n_max = {} truncates the local space: top level occupied with probability {p:.2e}", cfg.n_max);
    }
    Ok(Solved { lattice, ham, state, trace, report })
}

/// Per-site probability of the top boson level above which n_max is flagged.
pub const TOP_OCCUPATION_LIMIT: f64 = 1e-8;

fn model_json(s: &Solved, g: f64) -> Value {
    let mut v = json!({
        "statistics": s.ham.statistics(),
        "g": g,
        "dx": s.lattice.dx,
        "site_count": s.lattice.site_count,
        "origin": s.lattice.origin,
        "hopping": s.ham.hopping(),
        "local_dim": s.ham.local_dim(),
    });
    match &s.ham {
        LatticeHamiltonian::BoseHubbard(p) => v["onsite"] = json!(p.onsite),
        LatticeHamiltonian::Fermi(p) => {
            v["neighbor"] = json!(p.neighbor);
            v["anisotropy"] = json!(xxz_params(p, &s.lattice).anisotropy);
        }
    }
    v
}

fn results_json(s: &Solved) -> Value {
    let d = &s.report.trunc_diagnostics;
    json!({
        "energy": s.report.energy,
        "total_number": s.report.total_number,
        "steps": d.steps,
        "max_discarded_weight": d.max_discarded_weight,
        "max_bond_dim": d.max_bond_dim,
        "top_occupation": s.report.top_occupation,
    })
}

/// Observable files and manifest of one run.
pub fn write_run(dir: &Path, cfg: &RunConfig, s: &Solved, g: f64) -> Result<(), CliError> {
    let r = &s.report;
    let x = s.lattice.positions();
    write_trace(&dir.join("energy_trace.csv"), &s.trace)?;
    write_pairs(&dir.join("density.csv"), ["x", "rho"], &r.density)?;
    write_pairs(&dir.join("momentum.csv"), ["k", "nk"], &r.momentum)?;
    write_matrix(&dir.join("odm.csv"), &x, &r.odm)?;
    write_matrix(&dir.join("g2_matrix.csv"), &x, &r.pair_corr)?;
    write_pairs(&dir.join("g2_cut.csv"), ["x", "g2"], &r.g2_cut)?;
    write_json(
        &dir.join("manifest.json"),
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "model": model_json(s, g),
            "results": results_json(s),
        }),
    )
}

/// Runs the configured mode; on failure a FAILED marker with the error
/// text is left in the output directory next to any partial results.
pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let marker = dir.join(FAILED_MARKER);
    if marker.exists() {
        let _ = std::fs::remove_file(&marker);
    }
    let exec = ExecPolicy::from_env();
    let res = match cfg.mode {
        Mode::GroundState => ground_state(cfg, exec),
        Mode::ScanDx => scan_dx(cfg, exec),
        Mode::ScanG => scan_g(cfg, exec),
        Mode::DualityCheck => duality_check(cfg, exec),
        Mode::OracleCheck => oracle_check(cfg, exec),
    };
    if let Err(e) = &res {
        write_atomic(&marker, format!("{e}\n").as_bytes())?;
    }
    res
}

fn ground_state(cfg: &RunConfig, exec: ExecPolicy) -> Result<(), CliError> {
    let s = solve(cfg, cfg.statistics, cfg.g[0], cfg.dx[0], Some(&cfg.output_dir), exec)?;
    write_run(&cfg.output_dir, cfg, &s, cfg.g[0])
}

fn child_dir(cfg: &RunConfig, key: &str, v: f64) -> std::path::PathBuf {
    cfg.output_dir.join(format!("{key}_{v}"))
}

fn top_manifest(cfg: &RunConfig, extra: Value) -> Result<(), CliError> {
    write_json(
        &cfg.output_dir.join("manifest.json"),
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "results": extra,
        }),
    )
}

fn scan_dx(cfg: &RunConfig, exec: ExecPolicy) -> Result<(), CliError> {
    let g = cfg.g[0];
    let rows = exec.map(&cfg.dx, |&dx| -> Result<(f64, f64, f64), CliError> {
        let dir = child_dir(cfg, "dx", dx);
        let s = solve(cfg, cfg.statistics, g, dx, Some(&dir), exec)?;
        write_run(&dir, cfg, &s, g)?;
        Ok((dx, s.report.energy, momentum_at(&s.report.odm, &s.lattice, 0.0)))
    });
    let rows: Vec<(f64, f64, f64)> = rows.into_iter().collect::<Result<_, _>>()?;
    let mut csv = Vec::new();
    for (k, &(dx, e, n0)) in rows.iter().enumerate() {
        let (de, dn) = match k {
            0 => (String::new(), String::new()),
            _ => (fmt((e - rows[k - 1].1).abs()), fmt((n0 - rows[k - 1].2).abs())),
        };
        csv.push(vec![fmt(dx), fmt(e), fmt(n0), de, dn]);
    }
    write_csv(&cfg.output_dir.join("convergence.csv"), &["dx", "energy", "nk0", "delta_energy", "delta_nk0"], csv)?;
    top_manifest(cfg, json!({ "runs": rows.len() }))
}

fn scan_g(cfg: &RunConfig, exec: ExecPolicy) -> Result<(), CliError> {
    let dx = cfg.dx[0];
    let rows = exec.map(&cfg.g, |&g| -> Result<Vec<String>, CliError> {
        let dir = child_dir(cfg, "g", g);
        let s = solve(cfg, cfg.statistics, g, dx, Some(&dir), exec)?;
        write_run(&dir, cfg, &s, g)?;
        let r = &s.report;
        Ok(vec![fmt(g), fmt(r.energy), fmt(density_variance(&r.density)), fmt(momentum_second_moment(&r.momentum))])
    });
    let rows: Vec<Vec<String>> = rows.into_iter().collect::<Result<_, _>>()?;
    write_csv(&cfg.output_dir.join("scan_g.csv"), &["g", "energy", "x_variance", "k2_moment"], rows)?;
    top_manifest(cfg, json!({ "runs": cfg.g.len() }))
}

/// Largest |a − b| over off-diagonal entries.
pub fn max_offdiag_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j {
                m = m.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
    }
    m
}

pub const DUALITY_TOL: f64 = 1e-3;

fn duality_check(cfg: &RunConfig, exec: ExecPolicy) -> Result<(), CliError> {
    let g = cfg.g[0];
    let gf = match cfg.statistics {
        Statistics::Fermi => g,
        Statistics::Bose => contact1d::model::dual_coupling(g, Statistics::Bose)?,
    };
    let gb = contact1d::model::dual_coupling(gf, Statistics::Fermi)?;
    let dx = cfg.dx[0];
    let fdir = cfg.output_dir.join("fermi");
    let bdir = cfg.output_dir.join("bose");
    let f = solve(cfg, Statistics::Fermi, gf, dx, Some(&fdir), exec)?;
    write_run(&fdir, cfg, &f, gf)?;
    let b = solve(cfg, Statistics::Bose, gb, dx, Some(&bdir), exec)?;
    write_run(&bdir, cfg, &b, gb)?;

    let rows: Vec<Vec<String>> = f
        .report
        .density
        .iter()
        .zip(&b.report.density)
        .map(|(p, q)| vec![fmt(p.0), fmt(p.1), fmt(q.1), fmt((p.1 - q.1).abs())])
        .collect();
    write_csv(&cfg.output_dir.join("comparison.csv"), &["x", "rho_fermi", "rho_bose", "abs_diff"], rows)?;
    let max_rho = f
        .report
        .density
        .iter()
        .zip(&b.report.density)
        .map(|(p, q)| (p.1 - q.1).abs())
        .fold(0.0, f64::max);
    let max_g2 = max_offdiag_diff(&f.report.pair_corr, &b.report.pair_corr);
    let fermi_diag = f.report.pair_corr.diagonal().amax();
    let hard_core = observables::double_occupation_weight(&b.state)?;
    let odm_diff = match observables::fermionized_boson_odm(&b.state, &b.lattice, exec)? {
        Some(m) => json!((m - &f.report.odm).amax()),
        None => Value::Null,
    };
    top_manifest(
        cfg,
        json!({
            "g_fermi": gf,
            "g_bose": gb,
            "energy_fermi": f.report.energy,
            "energy_bose": b.report.energy,
            "max_density_diff": max_rho,
            "max_g2_offdiag_diff": max_g2,
            "fermi_g2_diagonal_max": fermi_diag,
            "double_occupation_weight": hard_core,
            "max_fermionic_odm_diff": odm_diff,
        }),
    )?;
    log::info!("duality: max |Δρ| = {max_rho:.3e}, max |ΔG²| off-diagonal = {max_g2:.3e}");
    let mut failed = Vec::new();
    if max_rho >= DUALITY_TOL {
        failed.push(format!("density discrepancy {max_rho:.3e} ≥ {DUALITY_TOL:e}"));
    }
    if max_g2 >= DUALITY_TOL {
        failed.push(format!("pair correlation discrepancy {max_g2:.3e} ≥ {DUALITY_TOL:e}"));
    }
    if fermi_diag != 0.0 {
        failed.push(format!("fermionic G² diagonal {fermi_diag:e} ≠ 0"));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join("; ")))
    }
}

/// One line of the oracle report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn check(name: &'static str, value: f64, threshold: f64, pass: bool) -> CheckRow {
    CheckRow { name, value, threshold, pass }
}

fn strictly_decreasing(s: &ConvergenceStudy) -> bool {
    s.points.windows(2).all(|w| w[1].abs_error < w[0].abs_error)
}

/// The oracle self-consistency suite.
pub fn oracle_suite(exec: ExecPolicy) -> Result<(Vec<CheckRow>, Vec<ConvergenceStudy>), CliError> {
    let mut rows = Vec::new();

    let h = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
    let r = oracle::dense_ground_state(&h)?;
    rows.push(check("dense_2x2_ground_energy", (r.eigenvalues[0] + 1.0).abs(), 1e-12, (r.eigenvalues[0] + 1.0).abs() < 1e-12));

    let (l, dx) = (64usize, 0.1);
    let t = SymTridiagonal::new(vec![2.0 / (dx * dx); l], vec![-1.0 / (dx * dx); l - 1])?;
    let exact = 2.0 / (dx * dx) * (1.0 - (std::f64::consts::PI / (l + 1) as f64).cos());
    let r = oracle::tridiagonal_ground_state(&t, 1)?;
    let err = (r.eigenvalues[0] - exact).abs();
    rows.push(check("free_box_closed_form", err, 1e-10, err < 1e-10));
    rows.push(check("free_box_residual", r.residual, 1e-9 * t.norm_inf(), r.residual < 1e-9 * t.norm_inf()));

    let lat = LatticeSpec::new(1.0 / 64.0, 2048, 0.0)?;
    let rel = relative_hamiltonian(-2.0, Statistics::Bose, &lat, DiscretizationScheme::Optimal)?;
    let err = (rel.eigenvalue(0) + 1.0).abs();
    rows.push(check("boson_bound_state_dx64", err, 2e-3, err < 2e-3));

    let dxs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let opt = two_particle_convergence(2.0, Statistics::Fermi, DiscretizationScheme::Optimal, &dxs)?;
    let naive = two_particle_convergence(2.0, Statistics::Fermi, DiscretizationScheme::NaiveTruncated, &dxs)?;
    let bose = two_particle_convergence(-2.0, Statistics::Bose, DiscretizationScheme::Optimal, &dxs)?;
    let bose_weak = two_particle_convergence(-0.5, Statistics::Bose, DiscretizationScheme::Optimal, &dxs)?;
    let fermi_weak = two_particle_convergence(1.0, Statistics::Fermi, DiscretizationScheme::Optimal, &dxs)?;
    for (name, s) in [
        ("fermi_optimal_error_monotone", &opt),
        ("fermi_naive_error_monotone", &naive),
        ("bose_error_monotone", &bose),
        ("bose_weak_error_monotone", &bose_weak),
        ("fermi_weak_error_monotone", &fermi_weak),
    ] {
        rows.push(check(name, s.points.last().map_or(f64::NAN, |p| p.abs_error), 0.0, strictly_decreasing(s)));
    }
    let worse = opt.points.iter().zip(&naive.points).all(|(o, n)| o.abs_error < n.abs_error);
    let ratio = opt.points.iter().zip(&naive.points).map(|(o, n)| o.abs_error / n.abs_error).fold(0.0, f64::max);
    rows.push(check("fermi_optimal_below_naive", ratio, 1.0, worse));
    let gap = opt.fitted_order - naive.fitted_order;
    rows.push(check("fermi_order_gap", gap, 0.5, gap >= 0.5));
    rows.push(check("bose_fitted_order", bose.fitted_order, 1.5, bose.fitted_order > 1.5));

    let trap = |dx: f64, extent: f64| -> Result<(LatticeSpec, Vec<f64>), CliError> {
        let lat = LatticeSpec::symmetric(dx, extent)?;
        let v = contact1d::sample_potential(&Potential::Harmonic, &lat)?;
        let j = lat.hopping();
        Ok((lat, v.into_iter().map(|x| x + 2.0 * j).collect()))
    };
    let (lat, v) = trap(1.0 / 16.0, 12.0)?;
    let ff = oracle::lattice_free_fermions(&lat, &v, 1)?;
    let err = (ff.energy - 0.5).abs();
    rows.push(check("oscillator_ground_energy", err, 1e-3, err < 1e-3));
    let norm_err = (ff.density.iter().sum::<f64>() * lat.dx - 1.0).abs();
    rows.push(check("free_density_normalization", norm_err, 1e-10, norm_err < 1e-10));
    let (lat25, v25) = trap(1.0 / 32.0, 20.0)?;
    let ff25 = oracle::lattice_free_fermions(&lat25, &v25, 25)?;
    let peaks = count_local_maxima(&ff25.density) as f64;
    rows.push(check("friedel_peaks_n25", peaks, 25.0, peaks == 25.0));

    let grid: Vec<f64> = (-16..=16).map(|i| i as f64 * 0.25).collect();
    for (name, n) in [("tg_quadrature_n2", 2usize), ("tg_quadrature_n3", 3)] {
        let bf = oracle::tg_odm_bruteforce(n, &grid, exec)?;
        let err = (&bf - oracle::tg_odm_semiclosed(n, &grid)).amax();
        rows.push(check(name, err, 1e-8, err < 1e-8));
    }
    let fine: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.1).collect();
    let bf = oracle::tg_odm_bruteforce(3, &fine, exec)?;
    let tr = (bf.trace() * 0.1 - 3.0).abs();
    rows.push(check("tg_trace", tr, 1e-5, tr < 1e-5));
    let sym = (&bf - bf.transpose()).amax();
    rows.push(check("tg_symmetric", sym, 1e-14, sym <= 1e-14));
    let min_eig = contact1d::linalg::symmetric_eigen(&(&bf * 0.1))?.0.min();
    rows.push(check("tg_positive_semidefinite", min_eig, -1e-8, min_eig > -1e-8));

    let edl = LatticeSpec::new(0.4, 10, -1.8)?;
    let j = edl.hopping();
    let pot: Vec<f64> = edl.positions().iter().map(|x| 0.5 * x * x + 2.0 * j).collect();
    let ham = LatticeHamiltonian::Fermi(contact1d::FermiLatticeParams { hopping: j, neighbor: 0.0, potential: pot.clone() });
    let ed = oracle::small_system_ed(&ham, 3, &edl)?;
    let ff = oracle::lattice_free_fermions(&edl, &pot, 3)?;
    let err = (ed.energy - ff.energy).abs().max((&ed.odm - &ff.odm).amax());
    rows.push(check("ed_matches_free_fermions", err, 1e-10, err < 1e-10));
    let diag = ed.pair_corr.diagonal().amax();
    rows.push(check("ed_fermion_pauli_diagonal", diag, 0.0, diag == 0.0));

    Ok((rows, vec![opt, naive, bose]))
}

fn oracle_check(cfg: &RunConfig, exec: ExecPolicy) -> Result<(), CliError> {
    let (rows, studies) = oracle_suite(exec)?;
    write_csv(
        &cfg.output_dir.join("oracle_check.csv"),
        &["check", "value", "threshold", "pass"],
        rows.iter().map(|r| vec![r.name.to_string(), fmt(r.value), fmt(r.threshold), r.pass.to_string()]),
    )?;
    let mut conv = Vec::new();
    for (label, s) in ["fermi", "fermi", "bose"].iter().zip(&studies) {
        for p in &s.points {
            conv.push(vec![
                format!("{label}_{}", s.scheme),
                fmt(p.dx),
                fmt(p.energy),
                fmt(p.abs_error),
                fmt(s.fitted_order),
            ]);
        }
    }
    write_csv(&cfg.output_dir.join("convergence.csv"), &["scheme", "dx", "energy", "abs_error", "fitted_order"], conv)?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    top_manifest(cfg, json!({ "checks": rows.len(), "failed": failed }))?;
    for r in &rows {
        log::info!("{:<32} {:>6}  value {:.3e}", r.name, if r.pass { "pass" } else { "FAIL" }, r.value);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}
