//! Report rendering. CSV and text reports open with `#` metadata lines; JSON
//! reports carry the same metadata as fields. All three are byte-stable for a given
//! scenario and seed.

use std::io::Write;

use memqsim::engine::PRNG_ALGORITHM;
use memqsim::Exact;
use serde_json::{json, Value};

use crate::scenario::{Format, Scenario};

/// Version of the JSON report layout.
pub const JSON_SCHEMA: &str = "memqsim-report/1";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    /// Exact value: written as a decimal when it terminates within
    /// [`EXACT_DIGITS`] places, else as `num/den`.
    Exact(Exact),
    Text(String),
}

/// Decimal places tried before an exact value falls back to `num/den`.
pub const EXACT_DIGITS: u32 = 12;

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Exact(q) => format_exact(q),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) => Value::Null,
            Cell::Exact(q) => json!(format_exact(q)),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Exact> for Cell {
    fn from(v: Exact) -> Self {
        Cell::Exact(v)
    }
}

/// Six decimals, trailing zeros trimmed.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn format_exact(q: &Exact) -> String {
    let (num, den) = (*q.numer() as i128, *q.denom() as i128);
    let mut scale = 1i128;
    for digits in 0..=EXACT_DIGITS {
        if (num * scale) % den == 0 {
            let scaled = num * scale / den;
            if digits == 0 {
                return scaled.to_string();
            }
            let sign = if scaled < 0 { "-" } else { "" };
            let abs = scaled.abs();
            let int = abs / scale;
            let frac = format!("{:0width$}", abs % scale, width = digits as usize);
            return format!("{sign}{int}.{}", frac.trim_end_matches('0'));
        }
        scale *= 10;
    }
    format!("{num}/{den}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match columns");
        self.rows.push(row);
    }

    fn json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Result of one experiment.
#[derive(Clone, Debug)]
pub struct Report {
    /// Main table, the CSV body.
    pub table: Table,
    /// Scalar results that do not fit the table, JSON only.
    pub summary: Value,
    /// Extra tables written next to the main report, keyed by file stem.
    pub attachments: Vec<(String, Table)>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Report { table, summary: Value::Null, attachments: Vec::new() }
    }
}

fn metadata_lines(scenario: &Scenario) -> Vec<String> {
    let mut lines = vec![
        format!("tool: memqsim {}", memqsim::VERSION),
        format!("experiment: {}", scenario.experiment),
        format!("seed: {}", scenario.seed),
        format!("prng: {PRNG_ALGORITHM}"),
        "config:".to_string(),
    ];
    lines.extend(scenario.to_toml().lines().map(|l| if l.is_empty() { String::new() } else { format!("  {l}") }));
    lines
}

fn write_metadata<W: Write>(out: &mut W, scenario: &Scenario) -> std::io::Result<()> {
    for line in metadata_lines(scenario) {
        if line.is_empty() {
            writeln!(out, "#")?;
        } else {
            writeln!(out, "# {line}")?;
        }
    }
    Ok(())
}

pub fn write_csv<W: Write>(mut out: W, scenario: &Scenario, table: &Table) -> std::io::Result<()> {
    write_metadata(&mut out, scenario)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv_text))?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata lines, then the table with every column padded to its widest
/// cell. Numbers are right-aligned, text left-aligned.
pub fn write_text<W: Write>(mut out: W, scenario: &Scenario, table: &Table) -> std::io::Result<()> {
    write_metadata(&mut out, scenario)?;
    let cells: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(Cell::csv_text).collect()).collect();
    let widths: Vec<usize> = (0..table.columns.len())
        .map(|c| cells.iter().map(|r| r[c].len()).chain([table.columns[c].len()]).max().unwrap_or(0))
        .collect();
    let header: Vec<String> = table.columns.iter().zip(&widths).map(|(h, w)| format!("{h:<w$}")).collect();
    writeln!(out, "{}", header.join("  ").trim_end())?;
    for (row, text) in table.rows.iter().zip(&cells) {
        let padded: Vec<String> = row
            .iter()
            .zip(text)
            .zip(&widths)
            .map(|((cell, t), w)| match cell {
                Cell::Text(_) => format!("{t:<w$}"),
                _ => format!("{t:>w$}"),
            })
            .collect();
        writeln!(out, "{}", padded.join("  ").trim_end())?;
    }
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, scenario: &Scenario, report: &Report) -> std::io::Result<()> {
    let attachments: serde_json::Map<String, Value> =
        report.attachments.iter().map(|(name, t)| (name.clone(), t.json())).collect();
    let doc = json!({
        "schema": JSON_SCHEMA,
        "tool": "memqsim",
        "version": memqsim::VERSION,
        "experiment": scenario.experiment.name(),
        "seed": scenario.seed,
        "prng": PRNG_ALGORITHM,
        "config": scenario,
        "table": report.table.json(),
        "summary": report.summary,
        "attachments": attachments,
    });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)
}

/// Renders the main report in the scenario's format.
pub fn render(scenario: &Scenario, report: &Report) -> Vec<u8> {
    let mut buf = Vec::new();
    match scenario.format {
        Format::Csv => write_csv(&mut buf, scenario, &report.table),
        Format::Json => write_json(&mut buf, scenario, report),
        Format::Text => write_text(&mut buf, scenario, &report.table),
    }
    .expect("writing to memory cannot fail");
    buf
}

/// Renders an attachment table as CSV.
pub fn render_attachment(scenario: &Scenario, table: &Table) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(&mut buf, scenario, table).expect("writing to memory cannot fail");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_formats() {
        assert_eq!(format_exact(&Exact::new(6, 25)), "0.24");
        assert_eq!(format_exact(&Exact::from_integer(5)), "5");
        assert_eq!(format_exact(&Exact::new(25, 6)), "25/6");
        assert_eq!(format_exact(&Exact::new(-1, 8)), "-0.125");
    }

    #[test]
    fn float_trimming() {
        assert_eq!(format_float(43.333), "43.333");
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(-0.0000001), "0");
    }
}
