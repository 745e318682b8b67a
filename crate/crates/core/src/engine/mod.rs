//! Discrete-event kernel: integer picosecond clock, deterministic event
//! ordering, seeded random streams, and the per-request stage ledger.

pub mod event;
pub mod request;
pub mod rng;
pub mod time;

pub use event::{Direction, Event, EventKind, EventQueue, Target};
pub use request::{AccessKind, MemoryRequest, RequestId, Route, Timeline, LINE_BYTES};
pub use rng::{SimRng, PRNG_ALGORITHM};
pub use time::Tick;
