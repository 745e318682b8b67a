use std::io::BufRead;
use std::path::Path;

use crate::engine::{AccessKind, Tick};
use crate::error::{ConfigError, Result, SimError};

/// One line of a replay trace: `<tick_ps> <core> <R|W> <hex-address>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub at: Tick,
    pub core: u32,
    pub kind: AccessKind,
    pub address: u64,
}

/// Parses a trace. Blank lines and lines starting with `#` are skipped;
/// ticks must be non-decreasing.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    let mut last = Tick::ZERO;
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SimError::Internal(format!("trace read failed: {e}")))?;
        let lineno = n + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let bad = |what: &str| ConfigError::Invalid(format!("trace line {lineno}: {what}: {text:?}"));
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [tick, core, kind, addr] = fields[..] else {
            return Err(bad("expected 4 fields").into());
        };
        let at = Tick(tick.parse().map_err(|_| bad("bad tick"))?);
        let core = core.parse().map_err(|_| bad("bad core"))?;
        let kind = match kind {
            "R" | "r" => AccessKind::Read,
            "W" | "w" => AccessKind::Write,
            _ => return Err(bad("kind must be R or W").into()),
        };
        let hex = addr.strip_prefix("0x").or_else(|| addr.strip_prefix("0X")).unwrap_or(addr);
        let address = u64::from_str_radix(hex, 16).map_err(|_| bad("bad hex address"))?;
        if at < last {
            return Err(bad("ticks must be non-decreasing").into());
        }
        last = at;
        out.push(TraceRecord { at, core, kind, address });
    }
    Ok(out)
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = std::fs::File::open(path).map_err(|e| SimError::io(path, e))?;
    parse_trace(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records() {
        let text = "# header\n0 0 R 0x40\n\n1000 3 W ff00\n";
        let recs = parse_trace(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1], TraceRecord { at: Tick(1000), core: 3, kind: AccessKind::Write, address: 0xff00 });
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_trace("0 0 X 0x40\n".as_bytes()).is_err());
        assert!(parse_trace("5 0 R 0x40\n4 0 R 0x80\n".as_bytes()).is_err());
        assert!(parse_trace("5 0 R\n".as_bytes()).is_err());
    }
}
