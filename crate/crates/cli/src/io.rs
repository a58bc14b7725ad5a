//! CSV reading/writing. All floats are written with 17 significant digits so
//! reruns with the same config and seed are byte-comparable.

use std::path::Path;

use noneq_core::numeric::fmt_g17;
use noneq_core::scaling::Configuration;
use noneq_core::stochastic::SampledPath;

use crate::{fail_compute, fail_input, CliError};

/// Parse numeric CSV rows, skipping blanks, `#` comments and one optional
/// non-numeric header line.
fn numeric_rows(path: &Path, text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if rows.is_empty() => continue, // header line
            Err(_) => {
                return Err(fail_input(format!(
                    "{}: line {} is not numeric CSV: '{line}'",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(fail_input(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

/// Read a `(t, value)` path and check the grid is uniform.
pub fn read_path_csv(path: &Path) -> Result<SampledPath, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail_input(format!("cannot read {}: {e}", path.display())))?;
    let rows = numeric_rows(path, &text)?;
    if rows.iter().any(|r| r.len() != 2) {
        return Err(fail_input(format!("{}: expected two columns (t, value)", path.display())));
    }
    if rows.len() < 2 {
        return Err(fail_input(format!("{}: a path needs at least 2 samples", path.display())));
    }
    let t0 = rows[0][0];
    let dt = rows[1][0] - t0;
    for w in rows.windows(2) {
        let step = w[1][0] - w[0][0];
        if (step - dt).abs() > 1e-9 * dt.abs().max(1.0) {
            return Err(fail_input(format!(
                "{}: non-uniform time grid (step {} vs {})",
                path.display(),
                step,
                dt
            )));
        }
    }
    let values = rows.iter().map(|r| r[1]).collect();
    SampledPath::new(t0, dt, values).map_err(CliError::from)
}

pub fn write_path_csv(path: &Path, series: &SampledPath, value_name: &str) -> Result<(), CliError> {
    let mut out = String::with_capacity(series.len() * 48);
    out.push_str(&format!("t,{value_name}\n"));
    for (i, v) in series.values().iter().enumerate() {
        out.push_str(&fmt_g17(series.time(i)));
        out.push(',');
        out.push_str(&fmt_g17(*v));
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| fail_compute(format!("cannot write {}: {e}", path.display())))
}

/// Generic table writer: header plus rows of g17 floats.
pub fn write_table_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| fmt_g17(*v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| fail_compute(format!("cannot write {}: {e}", path.display())))
}

/// Read a point configuration (one point per row, 1 or 2 columns).
pub fn read_points_csv(path: &Path) -> Result<Configuration, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail_input(format!("cannot read {}: {e}", path.display())))?;
    let rows = numeric_rows(path, &text)?;
    let nu = rows[0].len();
    if rows.iter().any(|r| r.len() != nu) {
        return Err(fail_input(format!("{}: rows have mixed column counts", path.display())));
    }
    Configuration::new(nu, rows).map_err(CliError::from)
}
