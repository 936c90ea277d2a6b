//! CSV spectrum ingestion: header `omega_rad_per_s,power_au`, decimal
//! point, comma separator, UTF-8, at least 4 rows, strictly increasing
//! frequencies.

use qdsld_core::{Provenance, Spectrum};
use std::path::Path;

use crate::CliError;

pub fn ingest_spectrum(path: &Path) -> Result<Spectrum, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "omega_rad_per_s,power_au" => {}
        Some((_, header)) => {
            return Err(CliError::config(format!(
                "{}: expected header 'omega_rad_per_s,power_au', got '{}'",
                path.display(),
                header.trim()
            )))
        }
        None => return Err(CliError::config(format!("{}: empty file", path.display()))),
    }
    let mut omega = Vec::new();
    let mut power = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1; // 1-based, header is row 1
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(CliError::config(format!(
                    "{}: row {row}: expected exactly 2 comma-separated fields",
                    path.display()
                )))
            }
        };
        let w: f64 = a.trim().parse().map_err(|_| {
            CliError::config(format!(
                "{}: row {row}: malformed frequency '{a}'",
                path.display()
            ))
        })?;
        let s: f64 = b.trim().parse().map_err(|_| {
            CliError::config(format!(
                "{}: row {row}: malformed power '{b}'",
                path.display()
            ))
        })?;
        if let Some(&prev) = omega.last() {
            if !(w > prev) {
                return Err(CliError::config(format!(
                    "{}: row {row}: frequency grid not strictly increasing ({w} after {prev})",
                    path.display()
                )));
            }
        }
        if s < 0.0 {
            return Err(CliError::config(format!(
                "{}: row {row}: negative power {s}",
                path.display()
            )));
        }
        omega.push(w);
        power.push(s);
    }
    if omega.len() < 4 {
        return Err(CliError::config(format!(
            "{}: need at least 4 data rows, got {}",
            path.display(),
            omega.len()
        )));
    }
    Spectrum::new(
        omega,
        power,
        Provenance::File {
            path: path.display().to_string(),
        },
    )
    .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
