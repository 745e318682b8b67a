//! System assembly: which channels exist, which links front them, and how
//! addresses spread across channels.

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, RunReport};
use crate::cxl::CxlLinkConfig;
use crate::dram::DramTiming;
use crate::error::{ConfigError, Result};
use crate::system::run_open_loop;
use crate::traffic::OpenLoopSpec;

/// One route from the cores to memory: an optional link fronting one or
/// more DDR channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryPath {
    #[serde(default)]
    pub link: Option<CxlLinkConfig>,
    pub channels: Vec<DramTiming>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub name: String,
    pub cores: u32,
    pub paths: Vec<MemoryPath>,
    #[serde(default = "default_interleave")]
    pub interleave_bytes: u64,
    /// Scales closed-loop miss probability; models a smaller LLC.
    #[serde(default = "default_miss_multiplier")]
    pub miss_prob_multiplier: f64,
}

fn default_interleave() -> u64 {
    64
}

fn default_miss_multiplier() -> f64 {
    1.0
}

/// Where an address lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    pub path: usize,
    /// Channel index within the path.
    pub channel_in_path: usize,
    /// Channel index across the whole topology.
    pub channel: usize,
    /// Address as seen by the channel.
    pub local_address: u64,
}

/// Miss-probability multiplier for presets that halve the LLC.
pub const HALVED_LLC_MISS_MULTIPLIER: f64 = 1.3;

impl Topology {
    pub const PRESETS: [&'static str; 5] = ["ddr-baseline", "coaxial-2x", "coaxial-4x", "coaxial-asym", "coaxial-5x"];

    /// Builds a named preset, scaled to a 12-core slice of the server.
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        Self::preset_with(name, &DramTiming::default())
    }

    /// Like [`Topology::preset`] with custom DRAM timing on every channel.
    pub fn preset_with(name: &str, timing: &DramTiming) -> Result<Self, ConfigError> {
        let cxl_paths = |n: usize, link: CxlLinkConfig, per_link: usize| -> Vec<MemoryPath> {
            (0..n).map(|_| MemoryPath { link: Some(link.clone()), channels: vec![timing.clone(); per_link] }).collect()
        };
        let (paths, multiplier) = match name {
            "ddr-baseline" => (vec![MemoryPath { link: None, channels: vec![timing.clone()] }], 1.0),
            "coaxial-2x" => (cxl_paths(2, CxlLinkConfig::x8(), 1), 1.0),
            "coaxial-4x" => (cxl_paths(4, CxlLinkConfig::x8(), 1), HALVED_LLC_MISS_MULTIPLIER),
            "coaxial-asym" => (cxl_paths(4, CxlLinkConfig::x8_asym(), 2), HALVED_LLC_MISS_MULTIPLIER),
            "coaxial-5x" => (cxl_paths(5, CxlLinkConfig::x8(), 1), 1.0),
            other => {
                return Err(ConfigError::Unknown {
                    what: "topology preset",
                    name: other.to_string(),
                    available: Self::PRESETS.iter().map(|s| s.to_string()).collect(),
                })
            }
        };
        Ok(Topology {
            name: name.to_string(),
            cores: 12,
            paths,
            interleave_bytes: default_interleave(),
            miss_prob_multiplier: multiplier,
        })
    }

    /// Custom topology: `links` CXL paths (or one direct path when `link`
    /// is `None`), each fronting `channels_per_path` channels.
    pub fn custom(
        name: &str,
        link: Option<CxlLinkConfig>,
        paths: usize,
        channels_per_path: usize,
        timing: DramTiming,
    ) -> Result<Self, ConfigError> {
        let t = Topology {
            name: name.to_string(),
            cores: 12,
            paths: (0..paths)
                .map(|_| MemoryPath { link: link.clone(), channels: vec![timing.clone(); channels_per_path] })
                .collect(),
            interleave_bytes: default_interleave(),
            miss_prob_multiplier: 1.0,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.paths.is_empty() || self.paths.iter().any(|p| p.channels.is_empty()) {
            return Err(ConfigError::Invalid(format!("topology `{}` needs at least one channel per path", self.name)));
        }
        if self.interleave_bytes < 64 || !self.interleave_bytes.is_power_of_two() {
            return Err(ConfigError::out_of_range(
                "interleave_bytes",
                format!("must be a power of two >= 64, got {}", self.interleave_bytes),
            ));
        }
        if !(self.miss_prob_multiplier.is_finite() && self.miss_prob_multiplier > 0.0) {
            return Err(ConfigError::out_of_range("miss_prob_multiplier", "must be positive"));
        }
        if self.cores == 0 {
            return Err(ConfigError::out_of_range("cores", "must be positive"));
        }
        for p in &self.paths {
            if let Some(l) = &p.link {
                l.validate()?;
            }
            for c in &p.channels {
                c.validate()?;
            }
        }
        Ok(())
    }

    pub fn channel_count(&self) -> usize {
        self.paths.iter().map(|p| p.channels.len()).sum()
    }

    pub fn link_count(&self) -> usize {
        self.paths.iter().filter(|p| p.link.is_some()).count()
    }

    /// All channels in global order with their path index.
    pub fn channels(&self) -> impl Iterator<Item = (usize, &DramTiming)> {
        self.paths.iter().enumerate().flat_map(|(pi, p)| p.channels.iter().map(move |c| (pi, c)))
    }

    pub fn peak_bytes_per_sec(&self) -> f64 {
        self.channels().map(|(_, c)| c.peak_bytes_per_sec()).sum()
    }

    pub fn peak_gbps(&self) -> f64 {
        self.peak_bytes_per_sec() / 1e9
    }

    /// Sets every link's uncontended read round-trip overhead.
    pub fn with_cxl_overhead(mut self, overhead_ns: f64) -> Result<Self, ConfigError> {
        for p in &mut self.paths {
            if let Some(l) = &p.link {
                p.link = Some(l.with_round_trip_overhead(overhead_ns)?);
            }
        }
        Ok(self)
    }

    /// Round-robin interleave across all channels at `interleave_bytes`.
    pub fn map_address(&self, address: u64) -> Placement {
        let g = self.interleave_bytes;
        let n = self.channel_count() as u64;
        let block = address / g;
        let channel = (block % n) as usize;
        let local_address = (block / n) * g + address % g;
        let mut remaining = channel;
        for (path, p) in self.paths.iter().enumerate() {
            if remaining < p.channels.len() {
                return Placement { path, channel_in_path: remaining, channel, local_address };
            }
            remaining -= p.channels.len();
        }
        unreachable!("channel index {channel} beyond {n} channels")
    }

    /// Byte stride that keeps an address on the same channel and bank but
    /// moves it to another row.
    pub fn same_bank_stride(&self) -> u64 {
        let first = &self.paths[0].channels[0];
        crate::dram::same_bank_row_stride(first) * self.channel_count() as u64
    }
}

/// Reports for the same open-loop traffic on two topologies.
#[derive(Clone, Debug, Serialize)]
pub struct TopologyComparison {
    pub a: RunReport,
    pub b: RunReport,
}

impl TopologyComparison {
    /// Relative reduction of `b` against `a`: 1 − b/a.
    pub fn reduction(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else {
            1.0 - b / a
        }
    }
}

/// Runs identical traffic (same spec and seed) on `a` and `b`.
pub fn compare_topologies(
    a: &Topology,
    b: &Topology,
    spec: &OpenLoopSpec,
    seed: u64,
    warmup: f64,
) -> Result<TopologyComparison> {
    let run = |t: &Topology| -> Result<RunReport> {
        let trace = run_open_loop(t.clone(), spec, seed)?;
        Ok(analyze(&trace, t, warmup))
    };
    Ok(TopologyComparison { a: run(a)?, b: run(b)? })
}
