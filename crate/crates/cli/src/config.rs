//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use contact1d::discretize::{neighbor_interaction, DEFAULT_N_MAX};
use contact1d::{DiscretizationScheme, LatticeSpec, Statistics, TrotterSchedule, TruncationPolicy};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    GroundState,
    ScanDx,
    ScanG,
    OracleCheck,
    DualityCheck,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.replace('-', "_").as_str() {
            "ground_state" => Mode::GroundState,
            "scan_dx" => Mode::ScanDx,
            "scan_g" => Mode::ScanG,
            "oracle_check" => Mode::OracleCheck,
            "duality_check" => Mode::DualityCheck,
            _ => return None,
        })
    }
}

/// Fully validated configuration. Imaginary times are in units of 1/J.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub statistics: Statistics,
    pub g: Vec<f64>,
    pub particles: usize,
    pub dx: Vec<f64>,
    pub extent: f64,
    pub scheme: DiscretizationScheme,
    pub n_max: usize,
    pub chi_max: usize,
    pub svd_cutoff: f64,
    pub tau_initial: f64,
    pub tau_shrink: f64,
    pub tau_min: f64,
    pub energy_tol: f64,
    pub measure_every: usize,
    pub max_steps: usize,
    /// 0 selects 4L.
    pub k_count: usize,
    pub output_dir: PathBuf,
}

pub const KEYS: &[&str] = &[
    "preset",
    "mode",
    "statistics",
    "g",
    "n",
    "dx",
    "extent",
    "scheme",
    "n_max",
    "chi_max",
    "svd_cutoff",
    "tau_initial",
    "tau_shrink",
    "tau_min",
    "energy_tol",
    "measure_every",
    "max_steps",
    "k_count",
    "output_dir",
];

/// Values filled in by the named preset before any explicit key.
pub fn preset(name: &str) -> Option<Vec<(&'static str, &'static str)>> {
    match name {
        "desk" => Some(vec![("n", "5"), ("dx", "1/16"), ("extent", "12")]),
        "full" => Some(vec![("n", "25"), ("dx", "1/64"), ("extent", "20")]),
        _ => None,
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_pairs(&text)
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
        out.push((normalize_key(k), v.trim().to_string()));
    }
    Ok(out)
}

/// Real number, also accepting `a/b` fractions.
pub fn parse_real(key: &str, s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad(key, s))?;
            let b: f64 = b.trim().parse().map_err(|_| bad(key, s))?;
            a / b
        }
        None => match s {
            "inf" | "+inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            _ => s.parse().map_err(|_| bad(key, s))?,
        },
    };
    if v.is_nan() {
        return Err(bad(key, s));
    }
    Ok(v)
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s.split(',').map(|p| parse_real(key, p)).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(bad(key, s));
    }
    Ok(v)
}

fn parse_usize(key: &str, s: &str) -> Result<usize, CliError> {
    s.trim().parse().map_err(|_| bad(key, s))
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("invalid value for `{key}`: {value:?}"))
}

impl RunConfig {
    /// Builds a configuration from ordered pairs; later pairs win.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in pairs {
            let k = normalize_key(k);
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
            map.insert(k, v.clone());
        }
        let mut merged: BTreeMap<String, String> = BTreeMap::new();
        if let Some(name) = map.get("preset") {
            let values = preset(name).ok_or_else(|| bad("preset", name))?;
            if name == "full" {
                log::warn!("the full preset (N = 25, Δx = 1/64) is long-running");
            }
            for (k, v) in values {
                merged.insert(k.to_string(), v.to_string());
            }
        }
        merged.extend(map);
        let get = |k: &str| merged.get(k).map(String::as_str);
        let require = |k: &str| get(k).ok_or_else(|| CliError::Config(format!("missing required key `{k}`")));

        let mode = Mode::parse(require("mode")?).ok_or_else(|| bad("mode", get("mode").unwrap_or("")))?;
        let oracle = mode == Mode::OracleCheck;
        let statistics = match get("statistics") {
            Some("fermi") | Some("fermion") | Some("fermions") => Statistics::Fermi,
            Some("bose") | Some("boson") | Some("bosons") => Statistics::Bose,
            Some(other) => return Err(bad("statistics", other)),
            // the duality check reads an unlabeled coupling as gamma_F
            None if oracle || mode == Mode::DualityCheck => Statistics::Fermi,
            None => return Err(CliError::Config("missing required key `statistics`".into())),
        };
        let g = match get("g") {
            Some(s) => parse_list("g", s)?,
            None if oracle => vec![2.0],
            None => return Err(CliError::Config("missing required key `g`".into())),
        };
        let particles = match get("n") {
            Some(s) => parse_usize("n", s)?,
            None if oracle => 2,
            None => return Err(CliError::Config("missing required key `n`".into())),
        };
        let dx = match get("dx") {
            Some(s) => parse_list("dx", s)?,
            None if oracle => vec![1.0 / 64.0],
            None => return Err(CliError::Config("missing required key `dx`".into())),
        };
        let real = |k: &str, default: f64| get(k).map_or(Ok(default), |s| parse_real(k, s));
        let int = |k: &str, default: usize| get(k).map_or(Ok(default), |s| parse_usize(k, s));
        let scheme = match get("scheme").unwrap_or("optimal") {
            "optimal" => DiscretizationScheme::Optimal,
            "naive" | "naive_truncated" => DiscretizationScheme::NaiveTruncated,
            other => return Err(bad("scheme", other)),
        };
        let defaults = TrotterSchedule::for_hopping(1.0);
        let cfg = RunConfig {
            mode,
            statistics,
            g,
            particles,
            dx,
            extent: real("extent", 20.0)?,
            scheme,
            n_max: int("n_max", DEFAULT_N_MAX)?,
            chi_max: int("chi_max", 64)?,
            svd_cutoff: real("svd_cutoff", TruncationPolicy::default().svd_cutoff)?,
            tau_initial: real("tau_initial", defaults.tau_initial)?,
            tau_shrink: real("tau_shrink", defaults.tau_shrink_factor)?,
            tau_min: real("tau_min", defaults.tau_min)?,
            energy_tol: real("energy_tol", defaults.stage_energy_tol)?,
            measure_every: int("measure_every", defaults.measure_every)?,
            max_steps: int("max_steps", defaults.max_steps)?,
            k_count: int("k_count", 0)?,
            output_dir: PathBuf::from(get("output_dir").unwrap_or("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let cfg_err = |m: String| Err(CliError::Config(m));
        match self.mode {
            Mode::ScanDx if self.dx.len() < 2 || self.g.len() != 1 => {
                return cfg_err("scan_dx needs several `dx` values and a single `g`".into())
            }
            Mode::ScanG if self.g.len() < 2 || self.dx.len() != 1 => {
                return cfg_err("scan_g needs several `g` values and a single `dx`".into())
            }
            Mode::GroundState | Mode::DualityCheck if self.g.len() != 1 || self.dx.len() != 1 => {
                return cfg_err("`g` and `dx` must be single values in this mode".into())
            }
            _ => {}
        }
        if self.particles == 0 {
            return cfg_err("`n` must be at least 1".into());
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return cfg_err(format!("`extent` must be positive, got {}", self.extent));
        }
        if self.n_max == 0 {
            return cfg_err("`n_max` must be at least 1".into());
        }
        TruncationPolicy::new(self.chi_max, self.svd_cutoff).map_err(CliError::from)?;
        self.schedule(1.0).validate().map_err(CliError::from)?;
        for &dx in &self.dx {
            let lattice = LatticeSpec::symmetric(dx, self.extent).map_err(CliError::from)?;
            if self.particles > lattice.site_count {
                return cfg_err(format!("{} particles exceed {} lattice sites", self.particles, lattice.site_count));
            }
            if self.mode == Mode::OracleCheck {
                continue;
            }
            for &g in &self.g {
                let (fermi_g, needs_fermi) = match self.statistics {
                    Statistics::Fermi => (g, true),
                    Statistics::Bose => (contact1d::model::dual_coupling(g, Statistics::Bose)?, false),
                };
                if needs_fermi || self.mode == Mode::DualityCheck {
                    neighbor_interaction(fermi_g, dx, self.scheme).map_err(CliError::from)?;
                }
                if self.statistics == Statistics::Bose && !g.is_finite() {
                    return cfg_err("bosonic `g` must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> TruncationPolicy {
        TruncationPolicy { chi_max: self.chi_max, svd_cutoff: self.svd_cutoff, renormalize_after_truncation: true }
    }

    /// Schedule in absolute imaginary time for a lattice with hopping `j`.
    pub fn schedule(&self, j: f64) -> TrotterSchedule {
        TrotterSchedule {
            tau_initial: self.tau_initial / j,
            tau_shrink_factor: self.tau_shrink,
            tau_min: self.tau_min / j,
            stage_energy_tol: self.energy_tol,
            max_steps: self.max_steps,
            measure_every: self.measure_every,
        }
    }
}
