use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use quasimode::SystemParams;

use crate::error::CliError;

pub fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn load_params(path: &Path) -> Result<SystemParams, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let params = SystemParams::from_json(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for w in params.regime_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(params)
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes. Negative zero is written as `0`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}
