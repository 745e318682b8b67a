//! The assembled event loop: sources, links, and channels of a topology.

use serde::Serialize;

use crate::cxl::{message_bytes, DirectionStats, LinkState, MessageClass, Transmission};
use crate::dram::{ChannelStats, DramChannel};
use crate::engine::{
    AccessKind, Direction, Event, EventKind, EventQueue, MemoryRequest, RequestId, Route, SimRng, Target, Tick,
    LINE_BYTES,
};
use crate::error::{Result, SimError};
use crate::topology::Topology;
use crate::traffic::{Access, MemoryBackend, OpenLoopGenerator, OpenLoopSpec, TraceRecord};

/// Stream id of the open-loop generator's RNG.
pub const TRAFFIC_STREAM: u64 = 1;

/// Where injected requests come from.
#[derive(Clone, Debug)]
pub enum Source {
    OpenLoop(Box<OpenLoopGenerator>),
    Trace {
        records: Vec<TraceRecord>,
        next: usize,
    },
    /// Requests arrive only through [`MemoryBackend::submit`].
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunUntil {
    /// Dispatch every event due at or before this tick; the clock ends here.
    Time(Tick),
    /// Stop once this many requests have completed.
    Completed(u64),
    /// Run until no events remain.
    Drain,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkStats {
    pub path: usize,
    pub name: String,
    pub rx: DirectionStats,
    pub tx: DirectionStats,
}

/// Everything a run produced.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationTrace {
    pub topology: String,
    /// Every injected request, indexed by id.
    pub requests: Vec<MemoryRequest>,
    pub events_dispatched: u64,
    pub final_clock: Tick,
    pub injected: u64,
    pub completed: u64,
    pub channels: Vec<ChannelStats>,
    pub links: Vec<LinkStats>,
    pub warnings: Vec<String>,
}

impl SimulationTrace {
    pub fn completed_reads(&self) -> impl Iterator<Item = &MemoryRequest> {
        self.requests.iter().filter(|r| r.kind.is_read() && r.is_complete())
    }
}

#[derive(Debug)]
struct Path {
    link: Option<LinkState>,
    /// Reads dispatched on this path whose response has not yet left the
    /// RX FIFO.
    rx_credits_used: usize,
    channels: Vec<usize>,
}

/// A topology wired into a discrete-event simulation.
#[derive(Debug)]
pub struct MemorySystem {
    topology: Topology,
    events: EventQueue,
    channels: Vec<DramChannel>,
    channel_path: Vec<usize>,
    wakeups: Vec<Option<Tick>>,
    paths: Vec<Path>,
    requests: Vec<MemoryRequest>,
    source: Source,
    completed: u64,
    external_done: Vec<(RequestId, Tick)>,
    warnings: Vec<String>,
}

impl MemorySystem {
    pub fn new(topology: Topology, source: Source) -> Result<Self> {
        topology.validate()?;
        let mut channels = Vec::new();
        let mut channel_path = Vec::new();
        let mut paths = Vec::new();
        for (pi, p) in topology.paths.iter().enumerate() {
            let mut ids = Vec::new();
            for t in &p.channels {
                ids.push(channels.len());
                channels.push(DramChannel::new(t.clone()));
                channel_path.push(pi);
            }
            paths.push(Path { link: p.link.clone().map(LinkState::new), rx_credits_used: 0, channels: ids });
        }
        let mut warnings = Vec::new();
        if let Source::OpenLoop(g) = &source {
            g.spec().validate()?;
            let min_peak = topology.channels().map(|(_, c)| c.peak_bytes_per_sec()).fold(f64::INFINITY, f64::min);
            if let Some(w) = g.spec().overload_warning(min_peak) {
                log::warn!("{w}");
                warnings.push(w);
            }
        }
        let wakeups = vec![None; channels.len()];
        let mut sys = MemorySystem {
            topology,
            events: EventQueue::new(),
            channels,
            channel_path,
            wakeups,
            paths,
            requests: Vec::new(),
            source,
            completed: 0,
            external_done: Vec::new(),
            warnings,
        };
        sys.schedule_next_injection();
        Ok(sys)
    }

    /// Open-loop traffic against `topology`, seeded from `seed`.
    pub fn open_loop(topology: Topology, spec: OpenLoopSpec, seed: u64) -> Result<Self> {
        let generator = spec.generator(SimRng::new(seed, TRAFFIC_STREAM));
        MemorySystem::new(topology, Source::OpenLoop(Box::new(generator)))
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn now(&self) -> Tick {
        self.events.now()
    }

    pub fn injected(&self) -> u64 {
        self.requests.len() as u64
    }

    pub fn completed(&self) -> u64 {
        self.completed
    }

    pub fn in_flight(&self) -> u64 {
        self.injected() - self.completed
    }

    pub fn requests(&self) -> &[MemoryRequest] {
        &self.requests
    }

    fn source_pending(&self) -> bool {
        match &self.source {
            Source::OpenLoop(g) => g.remaining() > 0,
            Source::Trace { records, next } => *next < records.len(),
            Source::External => false,
        }
    }

    fn next_source_access(&mut self) -> Option<(u32, Access)> {
        match &mut self.source {
            Source::OpenLoop(g) => g.next().map(|a| (0, a)),
            Source::Trace { records, next } => {
                let r = records.get(*next)?;
                *next += 1;
                Some((r.core, Access { at: r.at, address: r.address, kind: r.kind }))
            }
            Source::External => None,
        }
    }

    /// Creates the next source request and schedules its injection.
    fn schedule_next_injection(&mut self) {
        let Some((core, access)) = self.next_source_access() else { return };
        let at = access.at.max(self.events.now());
        let id = self.create_request(core, access.address, access.kind, at);
        self.events.schedule(Event::new(at, EventKind::Inject, id, Target::Source(core)));
    }

    fn create_request(&mut self, core: u32, address: u64, kind: AccessKind, at: Tick) -> RequestId {
        let id = RequestId(self.requests.len() as u64);
        let placement = self.topology.map_address(address);
        let mut req = MemoryRequest::new(id, core, address, kind, at);
        req.route = Route { path: placement.path as u32, channel: placement.channel as u32 };
        self.requests.push(req);
        id
    }

    pub fn run_until(&mut self, limit: RunUntil) -> Result<()> {
        loop {
            if let RunUntil::Completed(n) = limit {
                if self.completed >= n {
                    return Ok(());
                }
            }
            let due = match self.events.peek_due() {
                Some(d) => d,
                None => {
                    if self.source_pending() {
                        return Err(SimError::Internal(format!(
                            "event queue empty at {} with source traffic outstanding",
                            self.events.now()
                        )));
                    }
                    match limit {
                        RunUntil::Time(t) => self.events.advance_clock(t),
                        RunUntil::Completed(n) if self.completed < n => {
                            return Err(SimError::Internal(format!(
                                "event queue empty after {} of {n} completions",
                                self.completed
                            )))
                        }
                        _ => {}
                    }
                    return Ok(());
                }
            };
            if let RunUntil::Time(t) = limit {
                if due > t {
                    self.events.advance_clock(t);
                    return Ok(());
                }
            }
            let ev = self.events.pop().expect("peeked");
            self.handle(ev);
        }
    }

    fn handle(&mut self, ev: Event) {
        let now = ev.due;
        match ev.kind {
            EventKind::Inject => {
                self.inject(ev.request, now);
                if matches!(ev.target, Target::Source(_)) && !matches!(self.source, Source::External) {
                    self.schedule_next_injection();
                }
            }
            EventKind::McEnqueue | EventKind::LinkArrive => self.enqueue(ev.request, now),
            EventKind::McDispatch => {
                let Target::Channel(c) = ev.target else { unreachable!("dispatch without channel") };
                let c = c as usize;
                if self.wakeups[c] == Some(now) {
                    self.wakeups[c] = None;
                    self.service_channel(c, now);
                }
            }
            EventKind::DramComplete => self.dram_complete(ev.request, now),
            EventKind::LinkDepart => {
                let Target::Link(p, dir) = ev.target else { unreachable!("departure without link") };
                let p = p as usize;
                let link = self.paths[p].link.as_mut().expect("linked path");
                if let Some(t) = link.start_next(dir, now) {
                    self.transmitted(p, dir, t);
                }
            }
            EventKind::Complete => self.finish(ev.request, now),
        }
    }

    fn inject(&mut self, id: RequestId, now: Tick) {
        let req = &self.requests[id.0 as usize];
        let (path, kind) = (req.route.path as usize, req.kind);
        let Some(link) = self.paths[path].link.as_mut() else {
            self.requests[id.0 as usize].timeline.tx_depart = Some(now);
            self.enqueue(id, now);
            return;
        };
        let bytes = message_bytes(kind, Direction::Tx).expect("every request crosses TX");
        let carries_line = kind == AccessKind::Write;
        let class = if carries_line { MessageClass::Data } else { MessageClass::Request };
        let wire = link.config().message_time(Direction::Tx, bytes, carries_line).expect("validated link");
        if let Some(t) = link.enqueue(Direction::Tx, class, id, bytes, wire, now) {
            self.transmitted(path, Direction::Tx, t);
        }
    }

    /// Books a message that just started serializing.
    fn transmitted(&mut self, path: usize, dir: Direction, t: Transmission) {
        let tl = &mut self.requests[t.id.0 as usize].timeline;
        tl.link_port += t.port;
        tl.link_wire += t.arrive - t.port - t.enqueued;
        let target = Target::Link(path as u32, dir);
        self.events.schedule(Event::new(t.depart + t.wire, EventKind::LinkDepart, t.id, target));
        match dir {
            Direction::Tx => {
                tl.tx_depart = Some(t.depart);
                self.events.schedule(Event::new(t.arrive, EventKind::LinkArrive, t.id, target));
            }
            Direction::Rx => {
                tl.rx_depart = Some(t.depart);
                self.events.schedule(Event::new(t.arrive, EventKind::Complete, t.id, target));
                let p = &mut self.paths[path];
                let capacity = p.link.as_ref().expect("linked path").config().fifo_capacity;
                let was_blocked = p.rx_credits_used >= capacity;
                p.rx_credits_used -= 1;
                if was_blocked {
                    for i in 0..self.paths[path].channels.len() {
                        let c = self.paths[path].channels[i];
                        self.service_channel(c, t.depart);
                    }
                }
            }
        }
    }

    fn enqueue(&mut self, id: RequestId, now: Tick) {
        let req = &mut self.requests[id.0 as usize];
        req.timeline.mc_enqueue = Some(now);
        let c = req.route.channel as usize;
        let local = self.topology.map_address(req.address).local_address;
        let kind = req.kind;
        self.channels[c].enqueue(id, kind, local, now);
        self.service_channel(c, now);
    }

    fn reads_allowed(&self, path: usize) -> bool {
        let p = &self.paths[path];
        match &p.link {
            Some(l) => p.rx_credits_used < l.config().fifo_capacity,
            None => true,
        }
    }

    /// Dispatches everything channel `c` can issue at `now`, then arms a
    /// wakeup for the next time it might.
    fn service_channel(&mut self, c: usize, now: Tick) {
        let path = self.channel_path[c];
        loop {
            let allowed = self.reads_allowed(path);
            let Some(d) = self.channels[c].try_dispatch(now, allowed) else { break };
            let tl = &mut self.requests[d.id.0 as usize].timeline;
            tl.dispatch = Some(now);
            tl.dram_done = Some(d.done);
            if d.kind.is_read() && self.paths[path].link.is_some() {
                self.paths[path].rx_credits_used += 1;
            }
            self.events.schedule(Event::new(d.done, EventKind::DramComplete, d.id, Target::Channel(c as u32)));
        }
        let allowed = self.reads_allowed(path);
        if let Some(t) = self.channels[c].next_wakeup(now, allowed) {
            let t = t.max(now + Tick(1));
            if self.wakeups[c].is_none_or(|w| t < w || w < now) {
                self.wakeups[c] = Some(t);
                self.events.schedule(Event::new(t, EventKind::McDispatch, RequestId::NONE, Target::Channel(c as u32)));
            }
        }
    }

    fn dram_complete(&mut self, id: RequestId, now: Tick) {
        let (c, path, kind) = {
            let r = &self.requests[id.0 as usize];
            (r.route.channel as usize, r.route.path as usize, r.kind)
        };
        self.channels[c].complete(id, now);
        match (&mut self.paths[path].link, kind) {
            (Some(link), AccessKind::Read) => {
                let wire = link.config().message_time(Direction::Rx, LINE_BYTES, true).expect("validated link");
                if let Some(t) = link.enqueue(Direction::Rx, MessageClass::Data, id, LINE_BYTES, wire, now) {
                    self.transmitted(path, Direction::Rx, t);
                }
            }
            _ => self.finish(id, now),
        }
        self.service_channel(c, now);
    }

    fn finish(&mut self, id: RequestId, now: Tick) {
        let req = &mut self.requests[id.0 as usize];
        debug_assert!(req.timeline.complete.is_none(), "request {id:?} completed twice");
        req.timeline.complete = Some(now);
        self.completed += 1;
        if matches!(self.source, Source::External) && req.kind.is_read() {
            self.external_done.push((id, now));
        }
    }

    pub fn finish_trace(self) -> SimulationTrace {
        let links = self
            .paths
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                p.link.as_ref().map(|l| LinkStats {
                    path: i,
                    name: l.config().name.clone(),
                    rx: l.direction(Direction::Rx).stats,
                    tx: l.direction(Direction::Tx).stats,
                })
            })
            .collect();
        SimulationTrace {
            topology: self.topology.name.clone(),
            injected: self.requests.len() as u64,
            completed: self.completed,
            events_dispatched: self.events.dispatched(),
            final_clock: self.events.now(),
            channels: self.channels.iter().map(|c| *c.stats()).collect(),
            links,
            requests: self.requests,
            warnings: self.warnings,
        }
    }

    /// Runs `limit` and returns the trace.
    pub fn run(mut self, limit: RunUntil) -> Result<SimulationTrace> {
        self.run_until(limit)?;
        Ok(self.finish_trace())
    }
}

impl MemoryBackend for MemorySystem {
    fn submit(&mut self, now: Tick, core: u32, address: u64, kind: AccessKind) -> RequestId {
        let at = now.max(self.events.now());
        let id = self.create_request(core, address, kind, at);
        self.events.schedule(Event::new(at, EventKind::Inject, id, Target::Source(core)));
        id
    }

    fn next_completion(&self) -> Option<Tick> {
        self.events.peek_due()
    }

    fn advance_to(&mut self, until: Tick, completions: &mut Vec<(RequestId, Tick)>) {
        self.run_until(RunUntil::Time(until)).expect("external source never starves");
        completions.append(&mut self.external_done);
    }
}

/// Runs open-loop traffic to completion on `topology`.
pub fn run_open_loop(topology: Topology, spec: &OpenLoopSpec, seed: u64) -> Result<SimulationTrace> {
    MemorySystem::open_loop(topology, spec.clone(), seed)?.run(RunUntil::Drain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::AddressPattern;

    fn one_read(topology: &str) -> SimulationTrace {
        let trace = vec![TraceRecord { at: Tick(1_000), core: 0, kind: AccessKind::Read, address: 0 }];
        let sys =
            MemorySystem::new(Topology::preset(topology).unwrap(), Source::Trace { records: trace, next: 0 }).unwrap();
        sys.run(RunUntil::Drain).unwrap()
    }

    #[test]
    fn empty_run_advances_clock() {
        let sys = MemorySystem::new(Topology::preset("ddr-baseline").unwrap(), Source::External).unwrap();
        let t = sys.run(RunUntil::Time(Tick(1000))).unwrap();
        assert!(t.requests.is_empty());
        assert_eq!(t.final_clock, Tick(1000));
    }

    #[test]
    fn single_read_baseline() {
        let t = one_read("ddr-baseline");
        let r = &t.requests[0];
        assert_eq!(r.latency(), Some(Tick(43_333)));
        assert_eq!(r.link_time(), Some(Tick::ZERO));
        assert_eq!(r.timeline.link_port, Tick::ZERO);
    }

    #[test]
    fn cxl_adds_round_trip_overhead() {
        let base = one_read("ddr-baseline").requests[0].latency().unwrap();
        let cxl = one_read("coaxial-4x").requests[0].latency().unwrap();
        let expected = crate::cxl::CxlLinkConfig::x8().read_round_trip();
        assert_eq!(cxl - base, expected);
        let r = &one_read("coaxial-4x").requests[0];
        assert_eq!(r.link_time().unwrap(), expected);
        assert_eq!(r.timeline.link_port, Tick(24_000));
    }

    #[test]
    fn open_loop_conserves_and_orders() {
        let spec = OpenLoopSpec {
            request_count: 20_000,
            read_fraction: 0.67,
            rate_bytes_per_sec: 0.5 * 38.4e9,
            pattern: AddressPattern::UniformRandom,
            ..OpenLoopSpec::default()
        };
        for name in ["ddr-baseline", "coaxial-4x", "coaxial-asym"] {
            let t = run_open_loop(Topology::preset(name).unwrap(), &spec, 5).unwrap();
            assert_eq!(t.injected, 20_000);
            assert_eq!(t.completed, t.injected);
            for r in &t.requests {
                assert!(r.timeline.is_monotone(), "{r:?}");
                let total = r.latency().unwrap();
                let parts = r.queue_delay().unwrap() + r.service_time().unwrap() + r.link_time().unwrap();
                assert_eq!(total, parts);
            }
        }
    }

    #[test]
    fn same_seed_same_ledger() {
        let spec = OpenLoopSpec { request_count: 5_000, ..OpenLoopSpec::default() };
        let a = run_open_loop(Topology::preset("coaxial-2x").unwrap(), &spec, 11).unwrap();
        let b = run_open_loop(Topology::preset("coaxial-2x").unwrap(), &spec, 11).unwrap();
        assert_eq!(a.requests, b.requests);
        assert_eq!(a.events_dispatched, b.events_dispatched);
    }
}
