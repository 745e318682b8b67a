use serde::{Deserialize, Serialize};

use crate::engine::{AccessKind, SimRng, Tick, LINE_BYTES};
use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalProcess {
    #[default]
    Exponential,
    Fixed,
}

/// Address stream shape. `Bursty` also gates arrivals: requests flow at
/// `on_rate_factor` times the mean rate during on-periods and stop during
/// off-periods.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AddressPattern {
    #[default]
    UniformRandom,
    SequentialStride {
        stride_bytes: u64,
    },
    Bursty {
        on_ns: f64,
        off_ns: f64,
        on_rate_factor: f64,
    },
}

impl AddressPattern {
    /// 10 us on, 10 us off, twice the mean rate while on.
    pub fn bursty_default() -> Self {
        AddressPattern::Bursty { on_ns: 10_000.0, off_ns: 10_000.0, on_rate_factor: 2.0 }
    }
}

/// Open-loop request stream: arrivals ignore completions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpenLoopSpec {
    pub arrival: ArrivalProcess,
    /// Mean injected bandwidth in bytes per second.
    pub rate_bytes_per_sec: f64,
    pub pattern: AddressPattern,
    pub read_fraction: f64,
    pub request_count: u64,
    /// Addresses are drawn from `[0, address_space_bytes)`.
    pub address_space_bytes: u64,
}

impl Default for OpenLoopSpec {
    fn default() -> Self {
        OpenLoopSpec {
            arrival: ArrivalProcess::Exponential,
            rate_bytes_per_sec: 0.6 * 38.4e9,
            pattern: AddressPattern::UniformRandom,
            read_fraction: 1.0,
            request_count: 200_000,
            address_space_bytes: 128 << 30,
        }
    }
}

impl OpenLoopSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.rate_bytes_per_sec.is_finite() && self.rate_bytes_per_sec > 0.0) {
            return Err(ConfigError::out_of_range("rate_bytes_per_sec", "mean rate must be positive"));
        }
        if !(0.0..=1.0).contains(&self.read_fraction) {
            return Err(ConfigError::out_of_range("read_fraction", "must lie in [0, 1]"));
        }
        if self.address_space_bytes < LINE_BYTES {
            return Err(ConfigError::out_of_range("address_space_bytes", "must hold at least one line"));
        }
        match self.pattern {
            AddressPattern::UniformRandom => {}
            AddressPattern::SequentialStride { stride_bytes } => {
                if stride_bytes == 0 || stride_bytes % LINE_BYTES != 0 {
                    return Err(ConfigError::out_of_range("stride_bytes", "must be a positive multiple of 64"));
                }
            }
            AddressPattern::Bursty { on_ns, off_ns, on_rate_factor } => {
                if !(on_ns > 0.0 && off_ns >= 0.0 && on_rate_factor > 0.0) {
                    return Err(ConfigError::out_of_range(
                        "pattern",
                        "bursty needs on_ns > 0, off_ns >= 0, on_rate_factor > 0",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Mean time between requests.
    pub fn mean_interarrival_ns(&self) -> f64 {
        LINE_BYTES as f64 / self.rate_bytes_per_sec * 1e9
    }

    /// Warning text when the stream is far beyond what a channel can serve.
    pub fn overload_warning(&self, channel_peak_bytes_per_sec: f64) -> Option<String> {
        (self.rate_bytes_per_sec > 10.0 * channel_peak_bytes_per_sec).then(|| {
            format!(
                "injection rate {:.1} GB/s exceeds 10x a channel peak of {:.1} GB/s; queues will saturate",
                self.rate_bytes_per_sec / 1e9,
                channel_peak_bytes_per_sec / 1e9
            )
        })
    }

    pub fn generator(&self, rng: SimRng) -> OpenLoopGenerator {
        OpenLoopGenerator::new(self.clone(), rng)
    }
}

/// One generated access.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Access {
    pub at: Tick,
    pub address: u64,
    pub kind: AccessKind,
}

/// Lazily yields the accesses of an [`OpenLoopSpec`].
#[derive(Clone, Debug)]
pub struct OpenLoopGenerator {
    spec: OpenLoopSpec,
    rng: SimRng,
    emitted: u64,
    /// Arrival clock in ns; for bursty streams this counts on-time only.
    clock_ns: f64,
    lines: u64,
}

impl OpenLoopGenerator {
    pub fn new(spec: OpenLoopSpec, rng: SimRng) -> Self {
        let lines = spec.address_space_bytes / LINE_BYTES;
        OpenLoopGenerator { spec, rng, emitted: 0, clock_ns: 0.0, lines }
    }

    pub fn spec(&self) -> &OpenLoopSpec {
        &self.spec
    }

    pub fn remaining(&self) -> u64 {
        self.spec.request_count - self.emitted
    }

    fn gap_ns(&mut self, mean: f64) -> f64 {
        match self.spec.arrival {
            ArrivalProcess::Exponential => self.rng.exponential(mean),
            ArrivalProcess::Fixed => mean,
        }
    }

    fn next_time_ns(&mut self) -> f64 {
        let mean = self.spec.mean_interarrival_ns();
        match self.spec.pattern {
            AddressPattern::Bursty { on_ns, off_ns, on_rate_factor } => {
                // Advance on-time at the boosted rate, then stretch by the
                // off-periods that elapsed before it.
                self.clock_ns += self.gap_ns(mean / on_rate_factor);
                let periods = (self.clock_ns / on_ns).floor();
                self.clock_ns + periods * off_ns
            }
            _ => {
                self.clock_ns += self.gap_ns(mean);
                self.clock_ns
            }
        }
    }

    fn next_address(&mut self) -> u64 {
        match self.spec.pattern {
            AddressPattern::SequentialStride { stride_bytes } => {
                (self.emitted.wrapping_mul(stride_bytes)) % (self.lines * LINE_BYTES)
            }
            AddressPattern::UniformRandom | AddressPattern::Bursty { .. } => self.rng.below(self.lines) * LINE_BYTES,
        }
    }
}

impl Iterator for OpenLoopGenerator {
    type Item = Access;

    fn next(&mut self) -> Option<Access> {
        if self.emitted >= self.spec.request_count {
            return None;
        }
        let at = Tick::from_ns(self.next_time_ns());
        let address = self.next_address();
        let kind = if self.spec.read_fraction >= 1.0 || self.rng.bernoulli(self.spec.read_fraction) {
            AccessKind::Read
        } else {
            AccessKind::Write
        };
        self.emitted += 1;
        Some(Access { at, address, kind })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining() as usize;
        (r, Some(r))
    }
}
