use serde::Serialize;

use crate::engine::{MemoryRequest, Tick};

/// Mean per-stage latency of completed reads, in ns.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LatencyBreakdown {
    pub count: u64,
    pub mc_queue: f64,
    pub dram_service: f64,
    pub link_port: f64,
    /// Link serialization plus link FIFO wait.
    pub link_wire_queue: f64,
    pub total: f64,
}

/// Each stage's fraction of the mean total.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BreakdownShares {
    pub mc_queue: f64,
    pub dram_service: f64,
    pub link_port: f64,
    pub link_wire_queue: f64,
}

/// Per-request stage durations; they sum to the request's latency exactly.
pub fn stages(r: &MemoryRequest) -> Option<[Tick; 4]> {
    let port = r.timeline.link_port;
    let link = r.link_time()?;
    Some([r.queue_delay()?, r.service_time()?, port, link - port])
}

/// Aggregates completed requests. Stage means are derived from exact integer
/// sums, so they add up to the mean total up to one rounding step.
pub fn breakdown<'a>(requests: impl IntoIterator<Item = &'a MemoryRequest>) -> LatencyBreakdown {
    let mut sums = [0u128; 5];
    let mut count = 0u64;
    for r in requests {
        let (Some(s), Some(total)) = (stages(r), r.latency()) else { continue };
        for (acc, t) in sums.iter_mut().zip(s) {
            *acc += t.ps() as u128;
        }
        sums[4] += total.ps() as u128;
        count += 1;
    }
    if count == 0 {
        return LatencyBreakdown::default();
    }
    let mean = |s: u128| s as f64 / count as f64 / 1e3;
    LatencyBreakdown {
        count,
        mc_queue: mean(sums[0]),
        dram_service: mean(sums[1]),
        link_port: mean(sums[2]),
        link_wire_queue: mean(sums[3]),
        total: mean(sums[4]),
    }
}

impl LatencyBreakdown {
    pub fn shares(&self) -> BreakdownShares {
        if self.total == 0.0 {
            return BreakdownShares::default();
        }
        BreakdownShares {
            mc_queue: self.mc_queue / self.total,
            dram_service: self.dram_service / self.total,
            link_port: self.link_port / self.total,
            link_wire_queue: self.link_wire_queue / self.total,
        }
    }
}
