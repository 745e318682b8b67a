use serde::{Deserialize, Serialize};

use crate::engine::{AccessKind, Direction, Tick, LINE_BYTES};
use crate::error::ConfigError;

/// Header-only read request sent towards memory.
pub const READ_REQUEST_BYTES: u64 = 8;
/// Header that accompanies write data towards memory.
pub const WRITE_HEADER_BYTES: u64 = 8;

/// Parameters of one bidirectional CXL link.
///
/// RX is the memory-to-CPU direction, TX the CPU-to-memory direction.
/// Bandwidths are GB/s (1e9 bytes per second), delays nanoseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CxlLinkConfig {
    pub name: String,
    pub rx_pins: u32,
    pub tx_pins: u32,
    pub raw_bandwidth_rx_gbps: f64,
    pub raw_bandwidth_tx_gbps: f64,
    pub goodput_rx_gbps: f64,
    pub goodput_tx_gbps: f64,
    /// Combined host and device port cost for one crossing towards the CPU.
    pub port_delay_rx_ns: f64,
    /// Combined host and device port cost for one crossing towards memory.
    pub port_delay_tx_ns: f64,
    pub message_overhead_bytes: u64,
    /// Fixed wire time for TX messages that carry a cache line, replacing
    /// the goodput arithmetic when set.
    pub tx_data_serialization_ns: Option<f64>,
    pub fifo_capacity: usize,
    /// Serve header-only requests ahead of queued write data on TX.
    pub tx_request_priority: bool,
}

impl Default for CxlLinkConfig {
    fn default() -> Self {
        Self::x8()
    }
}

impl CxlLinkConfig {
    pub const PRESETS: [&'static str; 2] = ["x8", "x8-asym"];

    /// Symmetric x8 link: 16 RX and 16 TX pins, 32 GB/s raw each way.
    pub fn x8() -> Self {
        CxlLinkConfig {
            name: "x8".into(),
            rx_pins: 16,
            tx_pins: 16,
            raw_bandwidth_rx_gbps: 32.0,
            raw_bandwidth_tx_gbps: 32.0,
            goodput_rx_gbps: 26.0,
            goodput_tx_gbps: 13.0,
            port_delay_rx_ns: 12.0,
            port_delay_tx_ns: 12.0,
            message_overhead_bytes: 0,
            tx_data_serialization_ns: None,
            fifo_capacity: 64,
            tx_request_priority: true,
        }
    }

    /// Same 32 pins split 20 RX / 12 TX.
    pub fn x8_asym() -> Self {
        CxlLinkConfig {
            name: "x8-asym".into(),
            rx_pins: 20,
            tx_pins: 12,
            raw_bandwidth_rx_gbps: 40.0,
            raw_bandwidth_tx_gbps: 24.0,
            goodput_rx_gbps: 32.0,
            goodput_tx_gbps: 10.0,
            tx_data_serialization_ns: Some(9.0),
            ..Self::x8()
        }
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match name {
            "x8" => Ok(Self::x8()),
            "x8-asym" => Ok(Self::x8_asym()),
            other => Err(ConfigError::Unknown {
                what: "link preset",
                name: other.to_string(),
                available: Self::PRESETS.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }

    pub fn total_pins(&self) -> u32 {
        self.rx_pins + self.tx_pins
    }

    pub fn goodput(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Rx => self.goodput_rx_gbps,
            Direction::Tx => self.goodput_tx_gbps,
        }
    }

    pub fn port_delay(&self, dir: Direction) -> Tick {
        Tick::from_ns(match dir {
            Direction::Rx => self.port_delay_rx_ns,
            Direction::Tx => self.port_delay_tx_ns,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [("goodput_rx_gbps", self.goodput_rx_gbps), ("goodput_tx_gbps", self.goodput_tx_gbps)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::out_of_range(field, "goodput must be positive"));
            }
        }
        for (field, v) in [
            ("port_delay_rx_ns", self.port_delay_rx_ns),
            ("port_delay_tx_ns", self.port_delay_tx_ns),
            ("raw_bandwidth_rx_gbps", self.raw_bandwidth_rx_gbps),
            ("raw_bandwidth_tx_gbps", self.raw_bandwidth_tx_gbps),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::out_of_range(field, "must be non-negative"));
            }
        }
        if let Some(v) = self.tx_data_serialization_ns {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::out_of_range("tx_data_serialization_ns", "must be non-negative"));
            }
        }
        if self.fifo_capacity == 0 {
            return Err(ConfigError::out_of_range("fifo_capacity", "must be positive"));
        }
        Ok(())
    }

    /// Wire time of a message in `dir` that carries `payload_bytes`.
    pub fn message_time(&self, dir: Direction, payload_bytes: u64, carries_line: bool) -> Result<Tick, ConfigError> {
        if let (Direction::Tx, true, Some(ns)) = (dir, carries_line, self.tx_data_serialization_ns) {
            return Ok(Tick::from_ns(ns));
        }
        serialize(dir, payload_bytes, self)
    }

    /// Uncontended round-trip link overhead of a read: both port crossings
    /// plus request and response serialization.
    pub fn read_round_trip(&self) -> Tick {
        let req = self.message_time(Direction::Tx, READ_REQUEST_BYTES, false).expect("validated config");
        let resp = self.message_time(Direction::Rx, LINE_BYTES, true).expect("validated config");
        self.port_delay(Direction::Tx) + req + self.port_delay(Direction::Rx) + resp
    }

    /// Rescales both port delays by the same factor so the uncontended read
    /// round trip adds `target_ns`. Goodput is untouched.
    pub fn with_round_trip_overhead(&self, target_ns: f64) -> Result<Self, ConfigError> {
        let wire = self.read_round_trip().as_ns() - self.port_delay_rx_ns - self.port_delay_tx_ns;
        let ports = target_ns - wire;
        if !(ports.is_finite() && ports >= 0.0) {
            return Err(ConfigError::out_of_range(
                "cxl_overhead_ns",
                format!("must be at least the serialization time of {wire:.3} ns"),
            ));
        }
        let current = self.port_delay_rx_ns + self.port_delay_tx_ns;
        let (rx, tx) = if current > 0.0 {
            (ports * self.port_delay_rx_ns / current, ports * self.port_delay_tx_ns / current)
        } else {
            (ports / 2.0, ports / 2.0)
        };
        // Round to whole picoseconds so the scaled config is exactly representable.
        let round_ps = |ns: f64| (ns * 1e3).round() / 1e3;
        Ok(CxlLinkConfig { port_delay_rx_ns: round_ps(rx), port_delay_tx_ns: round_ps(tx), ..self.clone() })
    }
}

/// Message bytes for one direction of a request's trip.
pub fn message_bytes(kind: AccessKind, dir: Direction) -> Option<u64> {
    match (kind, dir) {
        (AccessKind::Read, Direction::Tx) => Some(READ_REQUEST_BYTES),
        (AccessKind::Read, Direction::Rx) => Some(LINE_BYTES),
        (AccessKind::Write, Direction::Tx) => Some(LINE_BYTES + WRITE_HEADER_BYTES),
        (AccessKind::Write, Direction::Rx) => None,
    }
}

/// Serialization delay: (payload + per-message overhead) / goodput,
/// rounded up to whole picoseconds.
pub fn serialize(dir: Direction, payload_bytes: u64, config: &CxlLinkConfig) -> Result<Tick, ConfigError> {
    let goodput = config.goodput(dir);
    if !(goodput.is_finite() && goodput > 0.0) {
        return Err(ConfigError::out_of_range(
            match dir {
                Direction::Rx => "goodput_rx_gbps",
                Direction::Tx => "goodput_tx_gbps",
            },
            "goodput must be positive",
        ));
    }
    let bytes = payload_bytes + config.message_overhead_bytes;
    Ok(Tick::from_ns_ceil(bytes as f64 / goodput))
}
