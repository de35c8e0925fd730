//! Command-line interface: one subcommand per run mode, flags mirroring
//! the configuration keys.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{read_pairs, RunConfig};
use crate::run::execute;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "contact1d", version, about = "Ground states of trapped 1D gases with contact interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single ground state and its observables.
    GroundState(RunArgs),
    /// Ground states over a list of lattice spacings.
    ScanDx(RunArgs),
    /// Ground states over a list of couplings.
    ScanG(RunArgs),
    /// Fermion chain against its dual Bose-Hubbard chain.
    DualityCheck(RunArgs),
    /// Self-consistency suite of the exact references.
    OracleCheck(RunArgs),
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub statistics: Option<String>,
    /// Coupling, or a comma-separated list for scan-g.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Particle number.
    #[arg(short = 'n', long = "n")]
    pub n: Option<String>,
    /// Lattice spacing (fractions like 1/16 accepted), or a list for scan-dx.
    #[arg(long)]
    pub dx: Option<String>,
    #[arg(long)]
    pub extent: Option<String>,
    /// optimal | naive
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub n_max: Option<String>,
    #[arg(long)]
    pub chi_max: Option<String>,
    #[arg(long)]
    pub svd_cutoff: Option<String>,
    /// Imaginary-time step in units of 1/J.
    #[arg(long)]
    pub tau_initial: Option<String>,
    #[arg(long)]
    pub tau_shrink: Option<String>,
    #[arg(long)]
    pub tau_min: Option<String>,
    #[arg(long)]
    pub energy_tol: Option<String>,
    #[arg(long)]
    pub measure_every: Option<String>,
    #[arg(long)]
    pub max_steps: Option<String>,
    #[arg(long)]
    pub k_count: Option<String>,
    #[arg(long, short = 'o')]
    pub output_dir: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let fields: [(&str, &Option<String>); 18] = [
            ("preset", &self.preset),
            ("statistics", &self.statistics),
            ("g", &self.g),
            ("n", &self.n),
            ("dx", &self.dx),
            ("extent", &self.extent),
            ("scheme", &self.scheme),
            ("n_max", &self.n_max),
            ("chi_max", &self.chi_max),
            ("svd_cutoff", &self.svd_cutoff),
            ("tau_initial", &self.tau_initial),
            ("tau_shrink", &self.tau_shrink),
            ("tau_min", &self.tau_min),
            ("energy_tol", &self.energy_tol),
            ("measure_every", &self.measure_every),
            ("max_steps", &self.max_steps),
            ("k_count", &self.k_count),
            ("output_dir", &self.output_dir),
        ];
        fields.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::GroundState(a) => ("ground_state", a),
            Command::ScanDx(a) => ("scan_dx", a),
            Command::ScanG(a) => ("scan_g", a),
            Command::DualityCheck(a) => ("duality_check", a),
            Command::OracleCheck(a) => ("oracle_check", a),
        }
    }
}

/// Effective configuration: file entries, then flags, then the subcommand's mode.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let (mode, args) = cli.command.split();
    let mut pairs = match &args.config {
        Some(p) => read_pairs(p)?,
        None => Vec::new(),
    };
    pairs.extend(args.overrides());
    pairs.push(("mode".into(), mode.into()));
    RunConfig::from_pairs(&pairs)
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = resolve(&cli).and_then(|cfg| execute(&cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
