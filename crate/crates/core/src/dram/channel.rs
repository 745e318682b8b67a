use std::collections::VecDeque;

use serde::Serialize;

use crate::engine::{AccessKind, RequestId, Tick};

use super::address::decode;
use super::bank::RowState;
use super::queue::{next_ready_time, schedule_next, ControllerQueue, Device, QueuedRequest};
use super::timing::{DramTiming, PagePolicy};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChannelStats {
    pub reads: u64,
    pub writes: u64,
    pub row_hits: u64,
    pub row_closed: u64,
    pub row_conflicts: u64,
    pub max_queue_occupancy: usize,
    /// Arrivals that found their queue full and waited upstream.
    pub ingress_stalls: u64,
}

/// A request leaving the controller queue for the DRAM array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dispatched {
    pub id: RequestId,
    pub kind: AccessKind,
    pub row_state: RowState,
    pub service: Tick,
    pub done: Tick,
}

/// One DDR channel: controller queue, scheduler, banks, and data buses.
#[derive(Clone, Debug)]
pub struct DramChannel {
    timing: DramTiming,
    queue: ControllerQueue,
    device: Device,
    /// Arrivals waiting for a free queue slot, in arrival order.
    ingress: VecDeque<QueuedRequest>,
    in_service: Vec<(RequestId, usize)>,
    stats: ChannelStats,
}

impl DramChannel {
    pub fn new(timing: DramTiming) -> Self {
        DramChannel {
            queue: ControllerQueue::from_timing(&timing),
            device: Device::new(&timing),
            ingress: VecDeque::new(),
            in_service: Vec::new(),
            stats: ChannelStats::default(),
            timing,
        }
    }

    pub fn timing(&self) -> &DramTiming {
        &self.timing
    }

    pub fn stats(&self) -> &ChannelStats {
        &self.stats
    }

    pub fn queue(&self) -> &ControllerQueue {
        &self.queue
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    /// Requests inside the controller, queued or waiting to be admitted.
    pub fn pending(&self) -> usize {
        self.queue.len() + self.ingress.len()
    }

    pub fn in_service(&self) -> usize {
        self.in_service.len()
    }

    /// Accepts a request addressed by its channel-local byte address.
    pub fn enqueue(&mut self, id: RequestId, kind: AccessKind, local_address: u64, now: Tick) {
        let addr = decode(local_address, &self.timing);
        let req = QueuedRequest { id, kind, addr, flat_bank: addr.flat_bank(&self.timing), arrival: now, bypassed: 0 };
        if self.ingress.is_empty() && self.queue.has_room(kind) {
            self.queue.push(req);
            self.stats.max_queue_occupancy = self.stats.max_queue_occupancy.max(self.queue.len());
        } else {
            self.stats.ingress_stalls += 1;
            self.ingress.push_back(req);
        }
    }

    fn admit(&mut self) {
        while let Some(front) = self.ingress.front() {
            if !self.queue.has_room(front.kind) {
                break;
            }
            let req = self.ingress.pop_front().expect("front exists");
            self.queue.push(req);
        }
        self.stats.max_queue_occupancy = self.stats.max_queue_occupancy.max(self.queue.len());
    }

    /// Dispatches at most one request at `now`.
    ///
    /// `reads_allowed` is false while the response path has no credit left.
    pub fn try_dispatch(&mut self, now: Tick, reads_allowed: bool) -> Option<Dispatched> {
        self.device.sync_refresh(now);
        let pick = schedule_next(&self.queue, &self.device, now, reads_allowed, self.timing.scheduler)?;
        let device = &self.device;
        let req = self.queue.take(pick.kind, pick.index, |r| device.earliest_dispatch(r, now) <= now);
        let issue = self.device.issue(&req, now);
        match issue.row_state {
            RowState::Hit => self.stats.row_hits += 1,
            RowState::Closed => self.stats.row_closed += 1,
            RowState::Conflict => self.stats.row_conflicts += 1,
        }
        match req.kind {
            AccessKind::Read => self.stats.reads += 1,
            AccessKind::Write => self.stats.writes += 1,
        }
        self.in_service.push((req.id, req.flat_bank));
        self.admit();
        Some(Dispatched {
            id: req.id,
            kind: req.kind,
            row_state: issue.row_state,
            service: issue.service,
            done: issue.done,
        })
    }

    /// When the scheduler should next be consulted, absent new arrivals.
    pub fn next_wakeup(&self, now: Tick, reads_allowed: bool) -> Option<Tick> {
        next_ready_time(&self.queue, &self.device, now, reads_allowed, self.timing.scheduler)
    }

    /// Retires a finished access and applies the page policy to its bank.
    pub fn complete(&mut self, id: RequestId, now: Tick) {
        let pos = self
            .in_service
            .iter()
            .position(|(r, _)| *r == id)
            .unwrap_or_else(|| panic!("request {id:?} is not in service"));
        let (_, flat_bank) = self.in_service.swap_remove(pos);
        let t = self.device.timing;
        let bank = &mut self.device.banks[flat_bank];
        bank.awaiting_completion = false;
        let close = match self.timing.page_policy {
            PagePolicy::Open => false,
            PagePolicy::Closed => true,
            PagePolicy::OpenAdaptive => match bank.open_row {
                Some(row) => !self.queue.has_pending_hit(flat_bank, row),
                None => false,
            },
        };
        if close {
            self.device.banks[flat_bank].precharge(now, &t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dram::RefreshMode;

    fn drive(ch: &mut DramChannel, now: Tick) -> Vec<Dispatched> {
        let mut out = Vec::new();
        while let Some(d) = ch.try_dispatch(now, true) {
            out.push(d);
        }
        out
    }

    #[test]
    fn single_read_on_idle_channel() {
        let mut ch = DramChannel::new(DramTiming::default());
        ch.enqueue(RequestId(0), AccessKind::Read, 0, Tick(0));
        let d = drive(&mut ch, Tick(0));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].row_state, RowState::Closed);
        // 8 + 16 + 16 + 3.333
        assert_eq!(d[0].service, Tick(43_333));
        ch.complete(RequestId(0), d[0].done);
        // Adaptive policy closed the idle row.
        assert_eq!(ch.device().banks[0].open_row, None);
    }

    #[test]
    fn same_subchannel_bursts_do_not_overlap() {
        let mut ch = DramChannel::new(DramTiming::default());
        // Lines 0 and 2 share subchannel 0 but use different banks.
        ch.enqueue(RequestId(0), AccessKind::Read, 0, Tick(0));
        ch.enqueue(RequestId(1), AccessKind::Read, 128, Tick(0));
        let first = ch.try_dispatch(Tick(0), true).unwrap();
        assert!(ch.try_dispatch(Tick(0), true).is_none());
        let wake = ch.next_wakeup(Tick(0), true).unwrap();
        assert_eq!(wake, Tick(3_333));
        let second = ch.try_dispatch(wake, true).unwrap();
        assert!(second.done - first.done >= Tick(3_333));
    }

    #[test]
    fn same_group_bursts_use_long_spacing() {
        let mut ch = DramChannel::new(DramTiming::default());
        // Lines 0 and 16 land in banks 0 and 8 of subchannel 0: same group.
        ch.enqueue(RequestId(0), AccessKind::Read, 0, Tick(0));
        ch.enqueue(RequestId(1), AccessKind::Read, 16 * 64, Tick(0));
        let first = ch.try_dispatch(Tick(0), true).unwrap();
        let wake = ch.next_wakeup(Tick(0), true).unwrap();
        assert_eq!(wake, Tick(5_000));
        let second = ch.try_dispatch(wake, true).unwrap();
        assert_eq!(second.done - first.done, Tick(5_000));
    }

    fn refresh_timing(mode: RefreshMode) -> DramTiming {
        DramTiming { refresh: mode, t_refi_ns: 1_000.0, t_rfc_ns: 100.0, t_rfc_sb_ns: 50.0, ..DramTiming::default() }
    }

    #[test]
    fn all_bank_refresh_blocks_overlapping_access() {
        // Subchannel 0 refreshes over [500, 600) ns.
        let mut ch = DramChannel::new(refresh_timing(RefreshMode::AllBank));
        ch.enqueue(RequestId(0), AccessKind::Read, 0, Tick::from_ns(480.0));
        assert!(ch.try_dispatch(Tick::from_ns(480.0), true).is_none());
        assert_eq!(ch.next_wakeup(Tick::from_ns(480.0), true), Some(Tick::from_ns(600.0)));
        let d = ch.try_dispatch(Tick::from_ns(600.0), true).unwrap();
        assert_eq!(d.row_state, RowState::Closed);
    }

    #[test]
    fn same_bank_refresh_blocks_only_its_banks() {
        // Four slots of 250 ns; the first covers banks 0..8 of subchannel 0
        // over [125, 175) ns.
        let mut ch = DramChannel::new(refresh_timing(RefreshMode::SameBank));
        let at = Tick::from_ns(110.0);
        ch.enqueue(RequestId(0), AccessKind::Read, 0, at);
        ch.enqueue(RequestId(1), AccessKind::Read, 16 * 64, at);
        let first = ch.try_dispatch(at, true).unwrap();
        assert_eq!(first.id, RequestId(1));
        assert!(ch.try_dispatch(at, true).is_none());
        assert_eq!(ch.next_wakeup(at, true), Some(Tick::from_ns(175.0)));
    }

    #[test]
    fn ingress_holds_overflow_in_order() {
        let t =
            DramTiming { queue_capacity: 2, write_high_watermark: 2, write_low_watermark: 1, ..DramTiming::default() };
        let mut ch = DramChannel::new(t);
        for i in 0..4 {
            ch.enqueue(RequestId(i), AccessKind::Read, 64 * i * 2, Tick(0));
        }
        assert_eq!(ch.queue().len(), 2);
        assert_eq!(ch.pending(), 4);
        assert_eq!(ch.stats().ingress_stalls, 2);
        let d = ch.try_dispatch(Tick(0), true).unwrap();
        assert_eq!(d.id, RequestId(0));
        assert_eq!(ch.queue().len(), 2);
        assert_eq!(ch.pending(), 3);
    }

    #[test]
    fn reads_blocked_without_credit() {
        let mut ch = DramChannel::new(DramTiming::default());
        ch.enqueue(RequestId(0), AccessKind::Read, 0, Tick(0));
        assert!(ch.try_dispatch(Tick(0), false).is_none());
        assert!(ch.try_dispatch(Tick(0), true).is_some());
    }
}
