//! Statistics over completed-request ledgers.

pub mod breakdown;
pub mod cdf;
pub mod stats;
pub mod utilization;

pub use breakdown::{breakdown, stages, BreakdownShares, LatencyBreakdown};
pub use cdf::{cdf_points, export_cdf, write_cdf};
pub use stats::{nearest_rank, summarize, summarize_ticks, StatsSummary, HISTOGRAM_CAP_NS};
pub use utilization::{utilization, LinkUtilization, UtilizationReport, Window};

use serde::Serialize;

use crate::engine::{MemoryRequest, Tick};
use crate::system::SimulationTrace;
use crate::topology::Topology;

/// Fraction of injected requests discarded before statistics begin.
pub const DEFAULT_WARMUP: f64 = 0.1;

/// Requests injected after the warmup prefix, in injection order.
pub fn after_warmup(requests: &[MemoryRequest], warmup: f64) -> &[MemoryRequest] {
    let skip = ((requests.len() as f64) * warmup.clamp(0.0, 1.0)).floor() as usize;
    &requests[skip.min(requests.len())..]
}

/// Read latencies in ns of completed post-warmup reads.
pub fn read_latencies_ns(requests: &[MemoryRequest]) -> Vec<f64> {
    requests.iter().filter(|r| r.kind.is_read()).filter_map(|r| r.latency()).map(Tick::as_ns).collect()
}

/// Standard measurements of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub topology: String,
    pub injected: u64,
    pub completed: u64,
    pub measured_reads: u64,
    pub latency: StatsSummary<f64>,
    pub breakdown: LatencyBreakdown,
    pub shares: BreakdownShares,
    pub utilization: UtilizationReport,
    pub events_dispatched: u64,
    pub final_clock_ps: u64,
}

/// Measures the post-warmup part of `trace`. Utilization is taken over the
/// injection span of the measured requests.
pub fn analyze(trace: &SimulationTrace, topology: &Topology, warmup: f64) -> RunReport {
    let measured = after_warmup(&trace.requests, warmup);
    let latencies = read_latencies_ns(measured);
    let window = match (measured.first(), measured.last()) {
        (Some(a), Some(b)) => Window::new(a.timeline.inject, b.timeline.inject),
        _ => Window::new(Tick::ZERO, Tick::ZERO),
    };
    let bd = breakdown(measured.iter().filter(|r| r.kind.is_read()));
    RunReport {
        topology: trace.topology.clone(),
        injected: trace.injected,
        completed: trace.completed,
        measured_reads: latencies.len() as u64,
        latency: summarize(&latencies),
        shares: bd.shares(),
        breakdown: bd,
        utilization: utilization(topology, measured, window),
        events_dispatched: trace.events_dispatched,
        final_clock_ps: trace.final_clock.ps(),
    }
}
