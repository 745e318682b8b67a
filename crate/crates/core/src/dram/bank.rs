use crate::engine::{AccessKind, Tick};

use super::timing::TimingPs;

/// Row-buffer outcome of an access.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowState {
    Hit,
    Closed,
    Conflict,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BankState {
    pub open_row: Option<u64>,
    /// The bank accepts no new command before this time.
    pub busy_until: Tick,
    pub last_op: Option<AccessKind>,
    /// When the open row was activated; bounds the earliest precharge.
    pub activated_at: Tick,
    /// An issued access whose completion the controller has not yet seen.
    pub awaiting_completion: bool,
    /// Write recovery ends here; no precharge before it.
    pub write_recovery_until: Tick,
}

impl BankState {
    pub fn row_state(&self, row: u64) -> RowState {
        match self.open_row {
            Some(open) if open == row => RowState::Hit,
            Some(_) => RowState::Conflict,
            None => RowState::Closed,
        }
    }

    /// Earliest time a precharge may start, honouring tRAS and tWR.
    pub(crate) fn precharge_ready(&self, t: &TimingPs) -> Tick {
        (self.activated_at + t.ras).max(self.write_recovery_until)
    }

    /// Closes the open row no earlier than `now`.
    pub(crate) fn precharge(&mut self, now: Tick, t: &TimingPs) {
        if self.open_row.is_none() {
            return;
        }
        let start = now.max(self.precharge_ready(t)).max(self.busy_until);
        self.busy_until = start + t.rp;
        self.open_row = None;
    }
}

/// DRAM service time for an access that finds its bank in `state`.
///
/// Row hit: tCL + tBurst. Closed: tRCD + tCL + tBurst. Conflict:
/// tRP + tRCD + tCL + tBurst. The controller pipeline is added once.
pub(crate) fn service_time(state: RowState, t: &TimingPs) -> Tick {
    let array = match state {
        RowState::Hit => t.cl,
        RowState::Closed => t.rcd + t.cl,
        RowState::Conflict => t.rp + t.rcd + t.cl,
    };
    t.pipeline + array + t.burst
}
