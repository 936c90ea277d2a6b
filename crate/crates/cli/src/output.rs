//! Deterministic result files: `curve.tsv` (tab-separated, one row per
//! grid point, 17 significant digits) and `result.json` (stable key
//! order, full config echo).

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Format a number with 17 significant digits so re-parsing is exact.
pub fn fmt(value: f64) -> String {
    format!("{value:.16e}")
}

pub struct CurveWriter {
    rows: Vec<String>,
    columns: usize,
}

impl CurveWriter {
    pub fn new(header: &[&str]) -> Self {
        Self {
            rows: vec![header.join("\t")],
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "curve row arity");
        self.rows.push(
            values
                .iter()
                .map(|v| fmt(*v))
                .collect::<Vec<_>>()
                .join("\t"),
        );
    }

    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf, CliError> {
        let path = dir.join("curve.tsv");
        let mut file = std::fs::File::create(&path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        for row in &self.rows {
            writeln!(file, "{row}")
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        }
        Ok(path)
    }
}

pub fn write_json<T: serde::Serialize>(
    dir: &Path,
    value: &T,
) -> Result<std::path::PathBuf, CliError> {
    let path = dir.join("result.json");
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(format!("serializing result: {e}")))?;
    std::fs::write(&path, text + "\n")
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
