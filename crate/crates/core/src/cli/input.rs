//! Single-column data files with an optional header line.

use std::path::Path;

use super::CliError;

/// Values of the only column. A first line that is not a number is a
/// header. Errors carry the line number.
fn read_column<T>(path: &Path, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |m: String| CliError::Data(format!("{}:{line}: {m}", path.display()));
        if record.len() != 1 {
            return Err(at(format!("expected one column, found {}", record.len())));
        }
        let field = &record[0];
        let is_header = first && field.parse::<f64>().is_err();
        first = false;
        if is_header {
            continue;
        }
        out.push(parse(field).map_err(at)?);
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no observations", path.display())));
    }
    Ok(out)
}

pub fn read_reals(path: &Path) -> Result<Vec<f64>, CliError> {
    read_column(path, |s| match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("`{s}` is not finite")),
        Err(_) => Err(format!("`{s}` is not a number")),
    })
}

/// Nonnegative integers; integral decimals such as `3.0` are accepted.
pub fn read_counts(path: &Path) -> Result<Vec<u64>, CliError> {
    read_column(path, |s| {
        if let Ok(v) = s.parse::<u64>() {
            return Ok(v);
        }
        match s.parse::<f64>() {
            Ok(v) if v < 0.0 => Err(format!("`{s}` is negative")),
            Ok(v) if v.fract() == 0.0 && v < 2f64.powi(53) => Ok(v as u64),
            Ok(_) => Err(format!("`{s}` is not an integer")),
            Err(_) => Err(format!("`{s}` is not a number")),
        }
    })
}
