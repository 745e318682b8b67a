use serde::{Deserialize, Serialize};

use crate::engine::SimRng;
use crate::error::{ConfigError, Result};

use super::core_model::{run_core_model, ClosedLoopCoreSpec};
use super::synthetic::{SyntheticBackend, SyntheticLatencySpec};

/// Reference relative IPC for stdev 100/150/200 ns, averaged over a workload
/// suite. Reported next to the measured values, never asserted.
pub const REFERENCE_RELATIVE_IPC: [f64; 3] = [0.86, 0.78, 0.71];

/// Tolerance on the shared mean latency.
pub const MEAN_TOLERANCE_NS: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceConfig {
    pub core: ClosedLoopCoreSpec,
    pub distributions: Vec<SyntheticLatencySpec>,
    pub instructions: u64,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        VarianceConfig {
            core: ClosedLoopCoreSpec { cores: 1, miss_prob: 0.04, mshrs: 16, ..ClosedLoopCoreSpec::default() },
            distributions: SyntheticLatencySpec::variance_set(),
            instructions: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub label: String,
    /// Distribution parameters, e.g. `bimodal(100,350,0.8)`.
    pub distribution: String,
    pub mean_ns: f64,
    pub stdev_ns: f64,
    pub ipc: f64,
    pub relative_ipc: f64,
    /// Reference value for the same stdev, where one exists.
    pub reference: Option<f64>,
}

/// Runs the core model once per distribution and normalizes IPC to the
/// first entry. Every backend draws from the same stream so the miss pattern
/// of the core is identical across rows.
pub fn run_variance_experiment(config: &VarianceConfig, seed: u64) -> Result<Vec<VarianceRow>> {
    let Some(first) = config.distributions.first() else {
        return Err(ConfigError::Invalid("variance experiment needs at least one distribution".into()).into());
    };
    let target = first.mean_ns();
    for d in &config.distributions {
        d.validate()?;
        d.check_mean(target, MEAN_TOLERANCE_NS)?;
    }
    let base = SimRng::new(seed, 0);
    let mut rows = Vec::with_capacity(config.distributions.len());
    let mut baseline = None;
    for (i, d) in config.distributions.iter().enumerate() {
        let mut backend = SyntheticBackend::new(*d, base.split(1));
        let result = run_core_model(&config.core, &mut backend, config.instructions, &base)?;
        let base_ipc = *baseline.get_or_insert(result.ipc);
        let stdev = d.stdev_ns();
        let reference = (i > 0).then(|| REFERENCE_RELATIVE_IPC.get(i - 1).copied()).flatten();
        rows.push(VarianceRow {
            label: d.short_label(),
            distribution: d.label(),
            mean_ns: d.mean_ns(),
            stdev_ns: stdev,
            ipc: result.ipc,
            relative_ipc: result.ipc / base_ipc,
            reference,
        });
    }
    Ok(rows)
}
