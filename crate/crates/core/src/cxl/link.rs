use std::collections::VecDeque;

use serde::Serialize;

use crate::engine::{Direction, RequestId, Tick};

use super::config::CxlLinkConfig;

/// Occupancy counters for one direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DirectionStats {
    pub messages: u64,
    pub bytes: u64,
    /// Total serialization time.
    pub busy: Tick,
    pub max_fifo_occupancy: usize,
    /// Messages that found the FIFO full and held their sender.
    pub upstream_stalls: u64,
}

/// Message class. Requests carry only a header; data messages carry a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageClass {
    Request,
    Data,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pending {
    id: RequestId,
    bytes: u64,
    wire: Tick,
    enqueued: Tick,
}

/// One direction of a link: per-class FIFOs feeding one serializer.
#[derive(Clone, Debug, Default)]
pub struct DirectionState {
    pub busy_until: Tick,
    queues: [VecDeque<Pending>; 2],
    pub stats: DirectionStats,
}

impl DirectionState {
    /// Messages enqueued but not yet on the wire.
    pub fn fifo(&self) -> usize {
        self.queues[0].len() + self.queues[1].len()
    }
}

/// A message starting to serialize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub id: RequestId,
    pub enqueued: Tick,
    pub depart: Tick,
    pub wire: Tick,
    pub port: Tick,
    pub arrive: Tick,
}

impl Transmission {
    pub fn queue_wait(&self) -> Tick {
        self.depart - self.enqueued
    }
}

#[derive(Clone, Debug)]
pub struct LinkState {
    config: CxlLinkConfig,
    rx: DirectionState,
    tx: DirectionState,
}

impl LinkState {
    pub fn new(config: CxlLinkConfig) -> Self {
        LinkState { config, rx: DirectionState::default(), tx: DirectionState::default() }
    }

    pub fn config(&self) -> &CxlLinkConfig {
        &self.config
    }

    pub fn direction(&self, dir: Direction) -> &DirectionState {
        match dir {
            Direction::Rx => &self.rx,
            Direction::Tx => &self.tx,
        }
    }

    fn direction_mut(&mut self, dir: Direction) -> &mut DirectionState {
        match dir {
            Direction::Rx => &mut self.rx,
            Direction::Tx => &mut self.tx,
        }
    }

    /// Queues a message of known wire time. Returns the transmission if the
    /// serializer was idle and the message went straight onto the wire.
    pub fn enqueue(
        &mut self,
        dir: Direction,
        class: MessageClass,
        id: RequestId,
        bytes: u64,
        wire: Tick,
        now: Tick,
    ) -> Option<Transmission> {
        let prioritize = dir == Direction::Tx && self.config.tx_request_priority;
        let capacity = self.config.fifo_capacity;
        let d = self.direction_mut(dir);
        if d.fifo() >= capacity {
            d.stats.upstream_stalls += 1;
        }
        let lane = if prioritize && class == MessageClass::Request { 0 } else { 1 };
        d.queues[lane].push_back(Pending { id, bytes, wire, enqueued: now });
        d.stats.max_fifo_occupancy = d.stats.max_fifo_occupancy.max(d.fifo());
        if d.busy_until <= now && d.fifo() == 1 {
            self.start_next(dir, now)
        } else {
            None
        }
    }

    /// Whether the serializer in `dir` is idle at `now` with work waiting.
    pub fn can_start(&self, dir: Direction, now: Tick) -> bool {
        let d = self.direction(dir);
        d.busy_until <= now && d.fifo() > 0
    }

    /// Puts the next waiting message on the wire. Call when the serializer
    /// frees up, i.e. at `busy_until` of the previous transmission.
    pub fn start_next(&mut self, dir: Direction, now: Tick) -> Option<Transmission> {
        let port = self.config.port_delay(dir);
        let d = self.direction_mut(dir);
        if d.busy_until > now {
            return None;
        }
        let p = match d.queues[0].pop_front() {
            Some(p) => p,
            None => d.queues[1].pop_front()?,
        };
        d.busy_until = now + p.wire;
        d.stats.messages += 1;
        d.stats.bytes += p.bytes;
        d.stats.busy += p.wire;
        Some(Transmission {
            id: p.id,
            enqueued: p.enqueued,
            depart: now,
            wire: p.wire,
            port,
            arrive: now + p.wire + port,
        })
    }

    /// Fraction of `window` the serializer in `dir` was busy, clamped to 1.
    pub fn utilization(&self, dir: Direction, window: Tick) -> f64 {
        if window == Tick::ZERO {
            return 0.0;
        }
        (self.direction(dir).stats.busy.ps() as f64 / window.ps() as f64).min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxl::config::serialize;

    fn drain(link: &mut LinkState, dir: Direction, first: Option<Transmission>) -> Vec<Transmission> {
        let mut out: Vec<Transmission> = first.into_iter().collect();
        while let Some(last) = out.last().copied() {
            match link.start_next(dir, last.depart + last.wire) {
                Some(t) => out.push(t),
                None => break,
            }
        }
        out
    }

    #[test]
    fn back_to_back_messages_serialize() {
        let cfg = CxlLinkConfig::x8();
        let wire = serialize(Direction::Rx, 64, &cfg).unwrap();
        let mut link = LinkState::new(cfg);
        let a = link.enqueue(Direction::Rx, MessageClass::Data, RequestId(0), 64, wire, Tick(0));
        let b = link.enqueue(Direction::Rx, MessageClass::Data, RequestId(1), 64, wire, Tick(0));
        assert!(b.is_none());
        assert_eq!(link.direction(Direction::Rx).fifo(), 1);
        let sent = drain(&mut link, Direction::Rx, a);
        assert_eq!(sent[0].arrive, Tick(12_000 + 2_462));
        assert_eq!(sent[1].depart, sent[0].depart + wire);
        assert!(sent[1].arrive - sent[0].arrive >= wire);
        assert_eq!(link.direction(Direction::Rx).fifo(), 0);
    }

    #[test]
    fn directions_are_independent() {
        let mut link = LinkState::new(CxlLinkConfig::x8());
        let a = link.enqueue(Direction::Rx, MessageClass::Data, RequestId(0), 64, Tick(2_462), Tick(0));
        let b = link.enqueue(Direction::Tx, MessageClass::Request, RequestId(1), 8, Tick(616), Tick(0));
        assert_eq!(a.unwrap().depart, Tick(0));
        assert_eq!(b.unwrap().depart, Tick(0));
    }

    #[test]
    fn requests_overtake_queued_write_data() {
        let mut link = LinkState::new(CxlLinkConfig::x8_asym());
        let w0 = link.enqueue(Direction::Tx, MessageClass::Data, RequestId(0), 72, Tick(9_000), Tick(0));
        link.enqueue(Direction::Tx, MessageClass::Data, RequestId(1), 72, Tick(9_000), Tick(0));
        link.enqueue(Direction::Tx, MessageClass::Request, RequestId(2), 8, Tick(800), Tick(1));
        let order: Vec<u64> = drain(&mut link, Direction::Tx, w0).iter().map(|t| t.id.0).collect();
        assert_eq!(order, vec![0, 2, 1]);

        let mut fifo = LinkState::new(CxlLinkConfig { tx_request_priority: false, ..CxlLinkConfig::x8_asym() });
        let w0 = fifo.enqueue(Direction::Tx, MessageClass::Data, RequestId(0), 72, Tick(9_000), Tick(0));
        fifo.enqueue(Direction::Tx, MessageClass::Data, RequestId(1), 72, Tick(9_000), Tick(0));
        fifo.enqueue(Direction::Tx, MessageClass::Request, RequestId(2), 8, Tick(800), Tick(1));
        let order: Vec<u64> = drain(&mut fifo, Direction::Tx, w0).iter().map(|t| t.id.0).collect();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn overload_grows_queue_and_clamps_utilization() {
        // 30 GB/s of 64-byte responses into 26 GB/s of goodput.
        let cfg = CxlLinkConfig::x8();
        let wire = serialize(Direction::Rx, 64, &cfg).unwrap();
        let mut link = LinkState::new(cfg);
        let gap = Tick((64.0 / 30.0 * 1e3) as u64);
        let mut waits = Vec::new();
        let mut now = Tick(0);
        let mut next_free = Tick(0);
        for i in 0..10_000u64 {
            // Release the serializer for every slot that ended before `now`.
            while next_free <= now {
                match link.start_next(Direction::Rx, next_free) {
                    Some(t) => {
                        waits.push(t.queue_wait());
                        next_free = t.depart + t.wire;
                    }
                    None => break,
                }
            }
            if let Some(t) = link.enqueue(Direction::Rx, MessageClass::Data, RequestId(i), 64, wire, now) {
                waits.push(t.queue_wait());
                next_free = t.depart + t.wire;
            }
            now += gap;
        }
        assert!(waits[8_000] > waits[4_000] && waits[4_000] > waits[1_000]);
        assert!(link.direction(Direction::Rx).fifo() > 500);
        assert!(link.utilization(Direction::Rx, now) > 0.999);
        assert_eq!(link.utilization(Direction::Rx, Tick(now.ps() / 2)), 1.0);
    }
}
