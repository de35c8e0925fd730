//! Atomic, byte-stable result files.

use std::fs;
use std::path::Path;

use contact1d::mps::TraceRow;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::CliError;

/// Twelve significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io(&tmp))?;
    fs::rename(&tmp, path).map_err(io(path))
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_pairs(path: &Path, header: [&str; 2], data: &[(f64, f64)]) -> Result<(), CliError> {
    write_csv(path, &header, data.iter().map(|(a, b)| vec![fmt(*a), fmt(*b)]))
}

pub fn write_matrix(path: &Path, x: &[f64], m: &DMatrix<f64>) -> Result<(), CliError> {
    let rows = (0..x.len()).flat_map(|i| (0..x.len()).map(move |j| (i, j)));
    write_csv(path, &["x", "y", "value"], rows.map(|(i, j)| vec![fmt(x[i]), fmt(x[j]), fmt(m[(i, j)])]))
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<(), CliError> {
    write_csv(
        path,
        &["step", "tau", "energy", "trunc_weight", "total_number"],
        trace.iter().map(|r| {
            vec![r.step.to_string(), fmt(r.tau), fmt(r.energy), fmt(r.trunc_weight), fmt(r.total_number)]
        }),
    )
}
