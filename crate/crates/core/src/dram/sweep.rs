use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, DEFAULT_WARMUP};
use crate::error::{ConfigError, Result};
use crate::system::run_open_loop;
use crate::topology::Topology;
use crate::traffic::{AddressPattern, OpenLoopSpec};

use super::timing::DramTiming;
#[cfg(test)]
use super::timing::RefreshMode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub timing: DramTiming,
    pub utilizations: Vec<f64>,
    pub request_count: u64,
    pub read_fraction: f64,
    pub warmup: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            timing: DramTiming::default(),
            utilizations: vec![0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            request_count: 200_000,
            read_fraction: 2.0 / 3.0,
            warmup: DEFAULT_WARMUP,
        }
    }
}

/// One point of a load-latency curve; latencies are read latencies in ns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoadPoint {
    pub utilization: f64,
    pub achieved_utilization: f64,
    pub avg_ns: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub mc_queue_ns: f64,
}

/// Drives one channel with uniform-random open-loop traffic at each
/// utilization of its peak bandwidth. Every point uses the same seed.
pub fn sweep_load(config: &SweepConfig, seed: u64) -> Result<Vec<LoadPoint>> {
    config.timing.validate()?;
    for &u in &config.utilizations {
        if !(u > 0.0 && u < 1.0) {
            return Err(ConfigError::out_of_range("utilizations", format!("{u} is outside (0, 1)")).into());
        }
    }
    let topology = Topology::preset_with("ddr-baseline", &config.timing)?;
    let peak = config.timing.peak_bytes_per_sec();
    config
        .utilizations
        .iter()
        .map(|&u| {
            let spec = OpenLoopSpec {
                rate_bytes_per_sec: u * peak,
                pattern: AddressPattern::UniformRandom,
                read_fraction: config.read_fraction,
                request_count: config.request_count,
                ..OpenLoopSpec::default()
            };
            let trace = run_open_loop(topology.clone(), &spec, seed)?;
            let report = analyze(&trace, &topology, config.warmup);
            Ok(LoadPoint {
                utilization: u,
                achieved_utilization: report.utilization.aggregate,
                avg_ns: report.latency.mean,
                p50: report.latency.p50,
                p90: report.latency.p90,
                p99: report.latency.p99,
                mc_queue_ns: report.breakdown.mc_queue,
            })
        })
        .collect()
}
