//! Scenario files: TOML documents describing one experiment.

use std::fmt;
use std::path::{Path, PathBuf};

use memqsim::cxl::{AsymCompareConfig, CxlLinkConfig};
use memqsim::dram::DramTiming;
use memqsim::traffic::{AddressPattern, ArrivalProcess, OpenLoopSpec, VarianceConfig};
use memqsim::{ConfigError, Topology};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Run,
    SweepLoad,
    Variance,
    Compare,
    AsymCompare,
    Pins,
    Power,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::SweepLoad => "sweep-load",
            Experiment::Variance => "variance",
            Experiment::Compare => "compare",
            Experiment::AsymCompare => "asym-compare",
            Experiment::Pins => "pins",
            Experiment::Power => "power",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
    /// Aligned columns for reading in a terminal.
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "txt",
        }
    }
}

/// Largest seed a scenario file can carry (TOML integers are signed).
pub const MAX_SEED: u64 = i64::MAX as u64;

/// One experiment and everything it needs. Only `experiment` is required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub experiment: Experiment,
    #[serde(default = "default_seed", deserialize_with = "seed_in_range")]
    pub seed: u64,
    /// Leading fraction of requests excluded from statistics.
    #[serde(default = "default_warmup")]
    pub warmup: f64,
    #[serde(default)]
    pub format: Format,
    /// Report directory; reports go to stdout when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Rescale CXL port delays to this uncontended round-trip overhead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cxl_overhead_ns: Option<f64>,
    /// DRAM timing applied to every channel of every topology.
    #[serde(default)]
    pub timing: DramTiming,
    /// Open-loop traffic for `run` and `compare`.
    #[serde(default = "default_traffic", deserialize_with = "traffic_over_defaults")]
    pub traffic: OpenLoopSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_topology: Option<CustomTopology>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub variance: VarianceConfig,
    #[serde(default)]
    pub asym: AsymCompareConfig,
    #[serde(default)]
    pub pins: PinsSection,
    #[serde(default)]
    pub power: PowerSection,
}

fn default_seed() -> u64 {
    1
}

fn seed_in_range<'de, D: serde::Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
    let v = i64::deserialize(d)?;
    u64::try_from(v).map_err(|_| serde::de::Error::custom(format!("seed out of range: {v} is negative")))
}

fn default_warmup() -> f64 {
    memqsim::analysis::DEFAULT_WARMUP
}

/// Typical 2:1 read:write mix at 60% of one DDR5-4800 channel.
fn default_traffic() -> OpenLoopSpec {
    OpenLoopSpec { read_fraction: 2.0 / 3.0, request_count: 500_000, ..OpenLoopSpec::default() }
}

/// A `[traffic]` table; keys it leaves out keep the scenario defaults above
/// rather than the library's.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrafficTable {
    arrival: Option<ArrivalProcess>,
    rate_bytes_per_sec: Option<f64>,
    pattern: Option<AddressPattern>,
    read_fraction: Option<f64>,
    request_count: Option<u64>,
    address_space_bytes: Option<u64>,
}

fn traffic_over_defaults<'de, D: serde::Deserializer<'de>>(d: D) -> Result<OpenLoopSpec, D::Error> {
    let t = TrafficTable::deserialize(d)?;
    let base = default_traffic();
    Ok(OpenLoopSpec {
        arrival: t.arrival.unwrap_or(base.arrival),
        rate_bytes_per_sec: t.rate_bytes_per_sec.unwrap_or(base.rate_bytes_per_sec),
        pattern: t.pattern.unwrap_or(base.pattern),
        read_fraction: t.read_fraction.unwrap_or(base.read_fraction),
        request_count: t.request_count.unwrap_or(base.request_count),
        address_space_bytes: t.address_space_bytes.unwrap_or(base.address_space_bytes),
    })
}

/// A topology addressable by name from `run.topology` and `compare`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTopology {
    pub name: String,
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default = "one")]
    pub channels_per_path: usize,
    /// CXL link in front of each path; direct-attached when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<CxlLinkConfig>,
    /// Named link (`x8`, `x8-asym`) instead of a `link` table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_preset: Option<String>,
}

impl CustomTopology {
    pub fn link(&self) -> Result<Option<CxlLinkConfig>, ConfigError> {
        match (&self.link, &self.link_preset) {
            (Some(_), Some(_)) => {
                Err(ConfigError::Invalid("custom_topology: give either `link` or `link_preset`, not both".into()))
            }
            (_, Some(name)) => CxlLinkConfig::preset(name).map(Some),
            (link, None) => Ok(link.clone()),
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub topology: String,
    /// Offered load as a fraction of the topology's peak; overrides
    /// `traffic.rate_bytes_per_sec` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub load: Option<f64>,
    /// Replay this trace instead of generating open-loop traffic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { topology: "ddr-baseline".into(), load: None, trace: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub utilizations: Vec<f64>,
    pub request_count: u64,
    pub read_fraction: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = memqsim::dram::SweepConfig::default();
        SweepSection { utilizations: d.utilizations, request_count: d.request_count, read_fraction: d.read_fraction }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub a: String,
    pub b: String,
    /// Offered load as a fraction of topology `a`'s peak.
    pub load: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection { a: "ddr-baseline".into(), b: "coaxial-4x".into(), load: 0.6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PinDirections {
    Both,
    One,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceEntry {
    pub name: String,
    pub pins: u32,
    /// Decimal GB/s, per direction for full-duplex interfaces.
    pub bandwidth_gbps: f64,
    pub directions: PinDirections,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PinsSection {
    /// The first entry is the reference for relative columns.
    pub interfaces: Vec<InterfaceEntry>,
}

impl Default for PinsSection {
    fn default() -> Self {
        let interfaces = memqsim::ExactInterface::builtins()
            .into_iter()
            .map(|s| InterfaceEntry {
                name: s.name,
                pins: s.pins,
                bandwidth_gbps: *s.bandwidth.numer() as f64 / *s.bandwidth.denom() as f64,
                directions: match s.directions {
                    memqsim::models::Directions::Both => PinDirections::Both,
                    memqsim::models::Directions::One => PinDirections::One,
                },
            })
            .collect();
        PinsSection { interfaces }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub name: String,
    pub ddr_channels: u32,
    pub pcie_lanes: u32,
    pub dimm_power_w: f64,
    pub cpi: f64,
    /// Total power to use for EDP instead of the computed sum, e.g. a
    /// rounded total.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edp_power_w: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub package_w: f64,
    pub per_ddr_ctrl_w: f64,
    pub per_ddr_phy_w: f64,
    pub per_pcie_lane_w: f64,
    /// The first entry is the EDP reference.
    pub systems: Vec<SystemEntry>,
}

impl Default for PowerSection {
    fn default() -> Self {
        let p = memqsim::Power::default();
        let entry = |c: memqsim::Counts, table: i64| SystemEntry {
            name: c.name,
            ddr_channels: c.ddr_channels,
            pcie_lanes: c.pcie_lanes,
            dimm_power_w: c.dimm_power_w,
            cpi: c.cpi,
            edp_power_w: Some(table as f64),
        };
        let [base_w, coaxial_w] = memqsim::models::TABLE_TOTAL_POWER_W;
        PowerSection {
            package_w: p.package_w,
            per_ddr_ctrl_w: p.per_ddr_ctrl_w,
            per_ddr_phy_w: p.per_ddr_phy_w,
            per_pcie_lane_w: p.per_pcie_lane_w,
            systems: vec![entry(memqsim::Counts::baseline(), base_w), entry(memqsim::Counts::coaxial_4x(), coaxial_w)],
        }
    }
}

impl Scenario {
    /// All defaults for `experiment`.
    pub fn new(experiment: Experiment) -> Self {
        Scenario {
            experiment,
            seed: default_seed(),
            warmup: default_warmup(),
            format: Format::default(),
            out_dir: None,
            cxl_overhead_ns: None,
            timing: DramTiming::default(),
            traffic: default_traffic(),
            custom_topology: None,
            run: RunSection::default(),
            sweep: SweepSection::default(),
            compare: CompareSection::default(),
            variance: VarianceConfig::default(),
            asym: AsymCompareConfig::default(),
            pins: PinsSection::default(),
            power: PowerSection::default(),
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {}", e.to_string().trim_end())))?;
        scenario.validate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Effective configuration as TOML; [`Scenario::parse`] reads it back
    /// unchanged.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seed > MAX_SEED {
            return Err(ConfigError::out_of_range("seed", format!("must be in [0, {MAX_SEED}]")));
        }
        if !(0.0..1.0).contains(&self.warmup) {
            return Err(ConfigError::out_of_range("warmup", "must be in [0, 1)"));
        }
        if let Some(ns) = self.cxl_overhead_ns {
            if !(ns.is_finite() && ns > 0.0) {
                return Err(ConfigError::out_of_range("cxl_overhead_ns", "must be positive"));
            }
        }
        self.timing.validate()?;
        self.traffic.validate()?;
        if let Some(load) = self.run.load {
            check_load("run.load", load)?;
        }
        check_load("compare.load", self.compare.load)?;
        if self.sweep.utilizations.is_empty() {
            return Err(ConfigError::out_of_range("sweep.utilizations", "must not be empty"));
        }
        for &u in &self.sweep.utilizations {
            check_load("sweep.utilizations", u)?;
        }
        if !(0.0..=1.0).contains(&self.sweep.read_fraction) {
            return Err(ConfigError::out_of_range("sweep.read_fraction", "must be in [0, 1]"));
        }
        if self.sweep.request_count == 0 {
            return Err(ConfigError::out_of_range("sweep.request_count", "must be positive"));
        }
        self.variance.core.validate()?;
        self.asym.validate()?;
        if self.pins.interfaces.is_empty() {
            return Err(ConfigError::out_of_range("pins.interfaces", "must not be empty"));
        }
        if self.power.systems.is_empty() {
            return Err(ConfigError::out_of_range("power.systems", "must not be empty"));
        }
        if let Some(c) = &self.custom_topology {
            self.topology(&c.name)?;
        }
        Ok(())
    }

    /// Resolves a preset or the custom topology by name, with this
    /// scenario's timing and CXL overhead applied.
    pub fn topology(&self, name: &str) -> Result<Topology, ConfigError> {
        let t = match &self.custom_topology {
            Some(c) if c.name == name => {
                Topology::custom(&c.name, c.link()?, c.paths, c.channels_per_path, self.timing.clone())?
            }
            _ => Topology::preset_with(name, &self.timing)?,
        };
        match self.cxl_overhead_ns {
            Some(ns) => t.with_cxl_overhead(ns),
            None => Ok(t),
        }
    }
}

fn check_load(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ConfigError::out_of_range(field, format!("load {v} must be in (0, 1)")))
    }
}
