use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::request::RequestId;
use super::time::Tick;

/// Event kinds in tie-break order: at equal due time, kinds listed first
/// dispatch first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Inject,
    McEnqueue,
    McDispatch,
    DramComplete,
    LinkDepart,
    LinkArrive,
    Complete,
}

/// Link direction. `Rx` carries data towards the CPU, `Tx` carries requests
/// and write data towards memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Rx,
    Tx,
}

/// Which component an event is addressed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    None,
    Source(u32),
    Channel(u32),
    Link(u32, Direction),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Event {
    pub due: Tick,
    pub kind: EventKind,
    pub request: RequestId,
    pub target: Target,
}

impl Event {
    pub fn new(due: Tick, kind: EventKind, request: RequestId, target: Target) -> Self {
        Event { due, kind, request, target }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Entry {
    event: Event,
    seq: u64,
}

impl Entry {
    fn key(&self) -> (Tick, EventKind, RequestId, Target, u64) {
        (self.event.due, self.event.kind, self.event.request, self.event.target, self.seq)
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Future event set with a monotone clock.
///
/// Ordering is `(due, kind, request id, target, insertion sequence)`, so the
/// dispatch order is a pure function of the scheduled events.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    now: Tick,
    seq: u64,
    dispatched: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Number of events popped so far.
    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    /// Stores an event.
    ///
    /// # Panics
    ///
    /// Scheduling before the current clock is a programming error.
    pub fn schedule(&mut self, event: Event) {
        assert!(
            event.due >= self.now,
            "event scheduled in the past: {:?} due {} but clock is {}",
            event.kind,
            event.due,
            self.now
        );
        self.heap.push(Reverse(Entry { event, seq: self.seq }));
        self.seq += 1;
    }

    pub fn peek_due(&self) -> Option<Tick> {
        self.heap.peek().map(|Reverse(e)| e.event.due)
    }

    /// Removes the next event and advances the clock to its due time.
    pub fn pop(&mut self) -> Option<Event> {
        let Reverse(entry) = self.heap.pop()?;
        debug_assert!(entry.event.due >= self.now);
        self.now = entry.event.due;
        self.dispatched += 1;
        Some(entry.event)
    }

    /// Moves the clock forward without dispatching anything.
    pub fn advance_clock(&mut self, to: Tick) {
        assert!(to >= self.now, "clock cannot move backwards");
        debug_assert!(self.peek_due().is_none_or(|d| d >= to));
        self.now = to;
    }
}
