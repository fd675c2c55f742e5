//! File readers for the CLI's input formats: plain-text lattices and the
//! documented CSV tables (area,perimeter / x,y).

use std::path::Path;

use emergence_core::Lattice;

use crate::error::CliError;

pub fn read_lattice(path: &Path) -> Result<Lattice, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    Lattice::parse(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// CSV with header columns `area,perimeter`.
pub fn read_patches_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    read_two_column_csv(path, "area", "perimeter")
}

/// CSV with header columns `x,y`.
pub fn read_points_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    read_two_column_csv(path, "x", "y")
}

fn read_two_column_csv(path: &Path, c1: &str, c2: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers().map_err(CliError::runtime)?.clone();
    let i1 = headers
        .iter()
        .position(|h| h.trim() == c1)
        .ok_or_else(|| CliError::Runtime(format!("{}: missing column {c1:?}", path.display())))?;
    let i2 = headers
        .iter()
        .position(|h| h.trim() == c2)
        .ok_or_else(|| CliError::Runtime(format!("{}: missing column {c2:?}", path.display())))?;
    let mut out = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(CliError::runtime)?;
        let parse = |i: usize, name: &str| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Runtime(format!(
                        "{}: row {}: bad {name} value",
                        path.display(),
                        row_idx + 2
                    ))
                })
        };
        out.push((parse(i1, c1)?, parse(i2, c2)?));
    }
    Ok(out)
}
