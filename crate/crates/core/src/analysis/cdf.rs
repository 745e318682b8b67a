use std::io::Write;
use std::path::Path;

use crate::error::{Result, SimError};

/// Distinct sample values with the fraction of samples at or below each.
pub fn cdf_points(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("latency samples are never NaN"));
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = frac,
            _ => out.push((x, frac)),
        }
    }
    out
}

pub fn write_cdf<W: Write>(mut w: W, samples: &[f64]) -> std::io::Result<()> {
    writeln!(w, "latency_ns,cumulative_fraction")?;
    for (x, f) in cdf_points(samples) {
        writeln!(w, "{x},{f}")?;
    }
    Ok(())
}

/// Writes the CDF of `samples` (ns) as a two-column CSV.
pub fn export_cdf(samples: &[f64], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_cdf(&mut w, samples).map_err(|e| SimError::io(path, e))?;
    w.flush().map_err(|e| SimError::io(path, e))
}
