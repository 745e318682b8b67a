use serde::Serialize;

use super::scalar::Scalar;

/// Whether a bandwidth figure is shared by both directions or available in
/// each direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directions {
    /// Half-duplex bus: the figure covers reads and writes together.
    Both,
    /// Full-duplex serial link: the figure holds in each direction.
    One,
}

/// A processor memory interface: how many pins buy how much bandwidth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterfaceSpec<S> {
    pub name: String,
    pub pins: u32,
    /// GB/s.
    pub bandwidth: S,
    pub directions: Directions,
}

impl<S: Scalar> InterfaceSpec<S> {
    pub fn new(name: &str, pins: u32, bandwidth: S, directions: Directions) -> Self {
        InterfaceSpec { name: name.into(), pins, bandwidth, directions }
    }

    /// DDR5-4800 channel: 160 pins for 38.4 GB/s.
    pub fn ddr5_4800() -> Self {
        Self::new("DDR5-4800", 160, S::from_fraction(384, 10), Directions::Both)
    }

    /// One PCIe 5.0 lane: two pins each way, 4 GB/s per direction.
    pub fn pcie5_lane() -> Self {
        Self::new("PCIe5 x1", 4, S::from_int(4), Directions::One)
    }

    /// PCIe 5.0 x8, the link width of one CXL memory channel.
    pub fn pcie5_x8() -> Self {
        Self::new("PCIe5 x8", 32, S::from_int(32), Directions::One)
    }

    /// PCIe 5.0 x12: 48 GB/s per direction on 48 pins.
    pub fn pcie5_x12() -> Self {
        Self::new("PCIe5 x12", 48, S::from_int(48), Directions::One)
    }

    pub fn builtins() -> Vec<Self> {
        vec![Self::ddr5_4800(), Self::pcie5_lane(), Self::pcie5_x8(), Self::pcie5_x12()]
    }
}

/// GB/s per pin (per direction for full-duplex interfaces).
pub fn bandwidth_per_pin<S: Scalar>(spec: &InterfaceSpec<S>) -> S {
    assert!(spec.pins > 0, "interface {} has no pins", spec.name);
    spec.bandwidth.clone() / S::from_int(spec.pins as i64)
}

/// How many pins of `replacement` free up per pin of `original`, channel for channel.
pub fn pin_replacement_factor<S: Scalar>(original: &InterfaceSpec<S>, replacement: &InterfaceSpec<S>) -> S {
    S::from_int(original.pins as i64) / S::from_int(replacement.pins as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinRow<S> {
    pub name: String,
    pub pins: u32,
    pub bandwidth_gbps: S,
    pub directions: Directions,
    pub gbps_per_pin: S,
    /// Per-pin bandwidth relative to the first row.
    pub relative: S,
}

/// Per-pin table for `specs`, normalized to the first entry.
pub fn pin_table<S: Scalar>(specs: &[InterfaceSpec<S>]) -> Vec<PinRow<S>> {
    let Some(first) = specs.first() else { return Vec::new() };
    let base = bandwidth_per_pin(first);
    specs
        .iter()
        .map(|s| {
            let per_pin = bandwidth_per_pin(s);
            PinRow {
                name: s.name.clone(),
                pins: s.pins,
                bandwidth_gbps: s.bandwidth.clone(),
                directions: s.directions,
                relative: per_pin.clone() / base.clone(),
                gbps_per_pin: per_pin,
            }
        })
        .collect()
}
