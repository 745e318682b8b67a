use serde::{Deserialize, Serialize};

use super::time::Tick;

/// Every request moves one cache line.
pub const LINE_BYTES: u64 = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u64);

impl RequestId {
    /// Placeholder for events that are not tied to one request.
    pub const NONE: RequestId = RequestId(u64::MAX);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessKind {
    Read,
    Write,
}

impl AccessKind {
    pub fn is_read(self) -> bool {
        matches!(self, AccessKind::Read)
    }
}

/// Where a request was routed by the topology.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Route {
    pub path: u32,
    /// Global channel index across the whole topology.
    pub channel: u32,
}

/// Per-stage timestamps of one request.
///
/// Stages a request never visits stay `None`: baseline requests never touch a
/// link and writes never send a response.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub inject: Tick,
    pub tx_depart: Option<Tick>,
    pub mc_enqueue: Option<Tick>,
    pub dispatch: Option<Tick>,
    pub dram_done: Option<Tick>,
    pub rx_depart: Option<Tick>,
    pub complete: Option<Tick>,
    /// Fixed port delay accumulated across link crossings.
    pub link_port: Tick,
    /// Serialization time accumulated across link crossings.
    pub link_wire: Tick,
}

impl Timeline {
    /// Stamps in pipeline order, skipping stages that were not visited.
    pub fn stages(&self) -> impl Iterator<Item = Tick> + '_ {
        [
            Some(self.inject),
            self.tx_depart,
            self.mc_enqueue,
            self.dispatch,
            self.dram_done,
            self.rx_depart,
            self.complete,
        ]
        .into_iter()
        .flatten()
    }

    pub fn is_monotone(&self) -> bool {
        self.stages().zip(self.stages().skip(1)).all(|(a, b)| a <= b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryRequest {
    pub id: RequestId,
    pub source: u32,
    pub address: u64,
    pub kind: AccessKind,
    pub route: Route,
    pub timeline: Timeline,
}

impl MemoryRequest {
    pub fn new(id: RequestId, source: u32, address: u64, kind: AccessKind, inject: Tick) -> Self {
        MemoryRequest {
            id,
            source,
            address,
            kind,
            route: Route::default(),
            timeline: Timeline { inject, ..Timeline::default() },
        }
    }

    #[inline]
    pub fn size(&self) -> u64 {
        LINE_BYTES
    }

    pub fn is_complete(&self) -> bool {
        self.timeline.complete.is_some()
    }

    /// End-to-end latency, once complete.
    pub fn latency(&self) -> Option<Tick> {
        self.timeline.complete.map(|c| c - self.timeline.inject)
    }

    /// Time spent in the controller queue: dispatch minus arrival at the controller.
    pub fn queue_delay(&self) -> Option<Tick> {
        Some(self.timeline.dispatch? - self.timeline.mc_enqueue?)
    }

    /// DRAM access time proper.
    pub fn service_time(&self) -> Option<Tick> {
        Some(self.timeline.dram_done? - self.timeline.dispatch?)
    }

    /// Everything outside the memory controller: link FIFOs, wires, and ports.
    pub fn link_time(&self) -> Option<Tick> {
        let t = &self.timeline;
        Some((t.mc_enqueue? - t.inject) + (t.complete? - t.dram_done?))
    }
}
