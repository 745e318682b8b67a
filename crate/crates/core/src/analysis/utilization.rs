use serde::Serialize;

use crate::cxl::message_bytes;
use crate::engine::{AccessKind, Direction, MemoryRequest, Tick, LINE_BYTES};
use crate::topology::Topology;

/// Half-open measurement window `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: Tick,
    pub end: Tick,
}

impl Window {
    pub fn new(start: Tick, end: Tick) -> Self {
        Window { start, end: end.max(start) }
    }

    pub fn len(&self) -> Tick {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, t: Tick) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkUtilization {
    pub path: usize,
    pub rx: f64,
    pub tx: f64,
}

/// Delivered bytes over peak bytes within a window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtilizationReport {
    pub window: Window,
    pub channels: Vec<f64>,
    pub aggregate: f64,
    pub links: Vec<LinkUtilization>,
}

/// Counts a request's line against its channel when its data transfer
/// finishes inside the window, and its link messages when they depart inside
/// the window. Reads and writes both count.
pub fn utilization<'a>(
    topology: &Topology,
    requests: impl IntoIterator<Item = &'a MemoryRequest>,
    window: Window,
) -> UtilizationReport {
    let n = topology.channel_count();
    let mut bytes = vec![0u64; n];
    let mut busy = vec![[Tick::ZERO; 2]; topology.paths.len()];
    for r in requests {
        let c = r.route.channel as usize;
        if r.timeline.dram_done.is_some_and(|t| window.contains(t)) {
            bytes[c] += LINE_BYTES;
        }
        let path = r.route.path as usize;
        let Some(link) = &topology.paths[path].link else { continue };
        if r.timeline.tx_depart.is_some_and(|t| window.contains(t)) {
            let b = message_bytes(r.kind, Direction::Tx).expect("tx message");
            busy[path][1] += link.message_time(Direction::Tx, b, r.kind == AccessKind::Write).expect("validated link");
        }
        if r.timeline.rx_depart.is_some_and(|t| window.contains(t)) {
            busy[path][0] += link.message_time(Direction::Rx, LINE_BYTES, true).expect("validated link");
        }
    }
    let secs = window.len().ps() as f64 * 1e-12;
    let channels: Vec<f64> = topology
        .channels()
        .map(|(i, t)| if secs > 0.0 { (bytes[i] as f64 / (t.peak_bytes_per_sec() * secs)).min(1.0) } else { 0.0 })
        .collect();
    let total: u64 = bytes.iter().sum();
    let aggregate = if secs > 0.0 { (total as f64 / (topology.peak_bytes_per_sec() * secs)).min(1.0) } else { 0.0 };
    let frac = |t: Tick| if window.is_empty() { 0.0 } else { (t.ps() as f64 / window.len().ps() as f64).min(1.0) };
    let links = topology
        .paths
        .iter()
        .enumerate()
        .filter(|(_, p)| p.link.is_some())
        .map(|(i, _)| LinkUtilization { path: i, rx: frac(busy[i][0]), tx: frac(busy[i][1]) })
        .collect();
    UtilizationReport { window, channels, aggregate, links }
}
