//! DDR channel model: controller queue, FR-FCFS scheduling, bank timing,
//! and read/write bus turnaround.

pub mod address;
pub mod bank;
pub mod channel;
pub mod queue;
pub mod sweep;
pub mod timing;

pub use address::{decode, same_bank_row_stride, DramAddress};
pub use bank::{BankState, RowState};
pub use channel::{ChannelStats, Dispatched, DramChannel};
pub use queue::{schedule_next, BusState, ControllerQueue, Device, Pick, QueuedRequest};
pub use sweep::{sweep_load, LoadPoint, SweepConfig};
pub use timing::{DramTiming, PagePolicy, RefreshMode, SchedulerKind};

use crate::engine::Tick;

/// Service time for an access that finds its bank in `state`.
pub fn service_time(state: RowState, timing: &DramTiming) -> Tick {
    bank::service_time(state, &timing.to_ps())
}
