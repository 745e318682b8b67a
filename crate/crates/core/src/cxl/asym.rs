use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, RunReport, DEFAULT_WARMUP};
use crate::error::{ConfigError, Result};
use crate::system::run_open_loop;
use crate::topology::Topology;
use crate::traffic::{AddressPattern, OpenLoopSpec};

use super::config::CxlLinkConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymCompareConfig {
    /// Reads per write.
    pub read_write_ratio: f64,
    /// Read demand as a fraction of the symmetric links' aggregate RX goodput.
    pub load: f64,
    pub request_count: u64,
    pub warmup: f64,
}

impl Default for AsymCompareConfig {
    fn default() -> Self {
        AsymCompareConfig { read_write_ratio: 2.0, load: 0.85, request_count: 400_000, warmup: DEFAULT_WARMUP }
    }
}

impl AsymCompareConfig {
    pub fn read_fraction(&self) -> f64 {
        if self.read_write_ratio.is_infinite() {
            1.0
        } else {
            self.read_write_ratio / (self.read_write_ratio + 1.0)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.read_write_ratio.is_nan() || self.read_write_ratio < 0.0 {
            return Err(ConfigError::out_of_range("read_write_ratio", "must be non-negative"));
        }
        if !(self.load > 0.0 && self.load.is_finite()) {
            return Err(ConfigError::out_of_range("load", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymSide {
    pub report: RunReport,
    /// Completed read bytes per second over the run, GB/s.
    pub read_throughput_gbps: f64,
    pub tx_utilization: f64,
    pub rx_utilization: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymComparison {
    pub offered_gbps: f64,
    pub read_fraction: f64,
    pub symmetric: AsymSide,
    pub asym: AsymSide,
}

/// The asymmetric preset and the same DRAM behind symmetric x8 links.
pub fn asym_pair() -> Result<(Topology, Topology)> {
    let asym = Topology::preset("coaxial-asym")?;
    let mut sym = asym.clone();
    sym.name = "coaxial-asym-x8".into();
    for p in &mut sym.paths {
        p.link = Some(CxlLinkConfig::x8());
    }
    Ok((sym, asym))
}

fn side(topology: &Topology, spec: &OpenLoopSpec, seed: u64, warmup: f64) -> Result<AsymSide> {
    let trace = run_open_loop(topology.clone(), spec, seed)?;
    let report = analyze(&trace, topology, warmup);
    let reads: Vec<_> = trace.completed_reads().collect();
    let first = trace.requests.first().map(|r| r.timeline.inject).unwrap_or_default();
    let last = reads.iter().filter_map(|r| r.timeline.complete).max().unwrap_or_default();
    let span = last.saturating_sub(first).ps() as f64 * 1e-12;
    let read_throughput_gbps = if span > 0.0 { reads.len() as f64 * 64.0 / span / 1e9 } else { 0.0 };
    let n = report.utilization.links.len().max(1) as f64;
    let tx_utilization = report.utilization.links.iter().map(|l| l.tx).sum::<f64>() / n;
    let rx_utilization = report.utilization.links.iter().map(|l| l.rx).sum::<f64>() / n;
    Ok(AsymSide { report, read_throughput_gbps, tx_utilization, rx_utilization })
}

/// Runs identical open-loop traffic through symmetric and asymmetric links
/// fronting identical DRAM.
pub fn asym_compare(config: &AsymCompareConfig, seed: u64) -> Result<AsymComparison> {
    config.validate()?;
    let (sym, asym) = asym_pair()?;
    let rx_goodput: f64 = sym.paths.iter().filter_map(|p| p.link.as_ref()).map(|l| l.goodput_rx_gbps).sum();
    let read_fraction = config.read_fraction();
    let offered_gbps =
        if read_fraction > 0.0 { config.load * rx_goodput / read_fraction } else { config.load * rx_goodput };
    let spec = OpenLoopSpec {
        rate_bytes_per_sec: offered_gbps * 1e9,
        pattern: AddressPattern::UniformRandom,
        read_fraction,
        request_count: config.request_count,
        ..OpenLoopSpec::default()
    };
    Ok(AsymComparison {
        offered_gbps,
        read_fraction,
        symmetric: side(&sym, &spec, seed, config.warmup)?,
        asym: side(&asym, &spec, seed, config.warmup)?,
    })
}
