use std::collections::VecDeque;

use crate::engine::{AccessKind, RequestId, Tick};

use super::address::DramAddress;
use super::bank::{service_time, BankState, RowState};
use super::timing::{DramTiming, SchedulerKind, TimingPs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueuedRequest {
    pub id: RequestId,
    pub kind: AccessKind,
    pub addr: DramAddress,
    pub flat_bank: usize,
    /// Arrival at the controller.
    pub arrival: Tick,
    /// Younger requests dispatched ahead of this one.
    pub bypassed: u32,
}

/// Read and write queues with write-drain hysteresis.
#[derive(Clone, Debug)]
pub struct ControllerQueue {
    pub reads: VecDeque<QueuedRequest>,
    pub writes: VecDeque<QueuedRequest>,
    capacity: usize,
    high_watermark: usize,
    low_watermark: usize,
    starvation_cap: u32,
    draining: bool,
}

impl ControllerQueue {
    pub fn new(capacity: usize, high_watermark: usize, low_watermark: usize, starvation_cap: u32) -> Self {
        ControllerQueue {
            reads: VecDeque::with_capacity(capacity),
            writes: VecDeque::with_capacity(capacity),
            capacity,
            high_watermark,
            low_watermark,
            starvation_cap,
            draining: false,
        }
    }

    pub fn from_timing(t: &DramTiming) -> Self {
        Self::new(t.queue_capacity, t.write_high_watermark, t.write_low_watermark, t.starvation_cap)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_draining(&self) -> bool {
        self.draining
    }

    pub fn len(&self) -> usize {
        self.reads.len() + self.writes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty() && self.writes.is_empty()
    }

    fn queue(&self, kind: AccessKind) -> &VecDeque<QueuedRequest> {
        match kind {
            AccessKind::Read => &self.reads,
            AccessKind::Write => &self.writes,
        }
    }

    fn queue_mut(&mut self, kind: AccessKind) -> &mut VecDeque<QueuedRequest> {
        match kind {
            AccessKind::Read => &mut self.reads,
            AccessKind::Write => &mut self.writes,
        }
    }

    pub fn has_room(&self, kind: AccessKind) -> bool {
        self.queue(kind).len() < self.capacity
    }

    pub fn push(&mut self, req: QueuedRequest) {
        assert!(self.has_room(req.kind), "controller queue over capacity");
        self.queue_mut(req.kind).push_back(req);
        self.update_mode();
    }

    /// Removes the request at `index`, charging a bypass to every older one
    /// that `was_ready` says could have gone instead.
    pub fn take(
        &mut self,
        kind: AccessKind,
        index: usize,
        was_ready: impl Fn(&QueuedRequest) -> bool,
    ) -> QueuedRequest {
        let q = self.queue_mut(kind);
        for older in q.iter_mut().take(index) {
            if was_ready(older) {
                older.bypassed += 1;
            }
        }
        let req = q.remove(index).expect("index in range");
        self.update_mode();
        req
    }

    fn update_mode(&mut self) {
        if self.writes.len() >= self.high_watermark {
            self.draining = true;
        } else if self.draining && self.writes.len() <= self.low_watermark {
            self.draining = false;
        }
    }

    /// Whether any queued request targets `row` in `flat_bank`.
    pub fn has_pending_hit(&self, flat_bank: usize, row: u64) -> bool {
        self.reads.iter().chain(self.writes.iter()).any(|q| q.flat_bank == flat_bank && q.addr.row == row)
    }

    /// Which queue the scheduler serves next. Reads win unless the write
    /// queue is draining or there are no eligible reads.
    fn serving(&self, reads_allowed: bool) -> Option<AccessKind> {
        let reads_eligible = reads_allowed && !self.reads.is_empty();
        if self.draining && !self.writes.is_empty() {
            Some(AccessKind::Write)
        } else if reads_eligible {
            Some(AccessKind::Read)
        } else if !self.writes.is_empty() {
            Some(AccessKind::Write)
        } else {
            None
        }
    }

    /// A request that has hit the starvation cap and must go next.
    fn forced(&self, kind: AccessKind) -> Option<usize> {
        self.queue(kind).iter().position(|q| q.bypassed >= self.starvation_cap)
    }
}

/// Per-subchannel data bus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BusState {
    pub free_at: Tick,
    pub last_dir: Option<AccessKind>,
}

/// Bank and bus state of one channel.
#[derive(Clone, Debug)]
pub struct Device {
    pub(crate) timing: TimingPs,
    pub banks: Vec<BankState>,
    pub buses: Vec<BusState>,
    banks_per_subchannel: usize,
    /// Latest four activate times per subchannel, ascending.
    activates: Vec<[Option<Tick>; 4]>,
    /// Start and bank set of the next refresh per subchannel.
    next_refresh: Vec<(Tick, u32)>,
    bank_groups: usize,
    banks_per_rank: usize,
    groups: Vec<GroupState>,
}

/// Last activate and burst seen by one bank group.
#[derive(Clone, Copy, Debug, Default)]
struct GroupState {
    last_activate: Option<Tick>,
    last_burst: Option<(Tick, AccessKind)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Issue {
    pub row_state: RowState,
    pub service: Tick,
    pub done: Tick,
}

impl Device {
    pub fn new(t: &DramTiming) -> Self {
        let timing = t.to_ps();
        let n = t.subchannels as u64;
        let next_refresh = (0..n)
            .map(|s| match timing.refresh {
                // Stagger subchannels across the interval.
                Some(r) => (Tick(r.interval.ps() * (s + 1) / n), 0),
                None => (Tick::MAX, 0),
            })
            .collect();
        Device {
            timing,
            banks: vec![BankState::default(); t.total_banks() as usize],
            buses: vec![BusState::default(); t.subchannels as usize],
            banks_per_subchannel: t.banks_per_subchannel() as usize,
            activates: vec![[None; 4]; t.subchannels as usize],
            next_refresh,
            bank_groups: t.bank_groups as usize,
            banks_per_rank: t.banks_per_rank as usize,
            groups: vec![GroupState::default(); (t.subchannels * t.groups_per_subchannel()) as usize],
        }
    }

    fn group_index(&self, flat_bank: usize) -> usize {
        let rank = flat_bank / self.banks_per_rank;
        rank * self.bank_groups + (flat_bank % self.banks_per_rank) % self.bank_groups
    }

    /// Applies every refresh window that has started by `now`: rows close
    /// and banks stay busy until the window ends.
    pub fn sync_refresh(&mut self, now: Tick) {
        let Some(r) = self.timing.refresh else { return };
        for sub in 0..self.next_refresh.len() {
            while self.next_refresh[sub].0 <= now {
                let (start, slot) = self.next_refresh[sub];
                let end = start + r.duration;
                let first = sub * self.banks_per_subchannel;
                for b in first..first + self.banks_per_subchannel {
                    if self.refreshes(b, slot) {
                        let bank = &mut self.banks[b];
                        bank.open_row = None;
                        bank.busy_until = bank.busy_until.max(end);
                    }
                }
                self.next_refresh[sub] = (start + r.interval, (slot + 1) % r.slots);
            }
        }
    }

    /// Whether refresh slot `slot` covers `flat_bank`.
    fn refreshes(&self, flat_bank: usize, slot: u32) -> bool {
        match self.timing.refresh {
            Some(r) if r.slots > 1 => (flat_bank % self.banks_per_rank) / self.bank_groups == slot as usize,
            Some(_) => true,
            None => false,
        }
    }

    /// Delay from dispatch to the activate an access issues, if any.
    fn activate_lead(&self, state: RowState) -> Option<Tick> {
        match state {
            RowState::Hit => None,
            RowState::Closed => Some(self.timing.pipeline),
            RowState::Conflict => Some(self.timing.pipeline + self.timing.rp),
        }
    }

    fn turnaround(&self, last: Option<AccessKind>, next: AccessKind) -> Tick {
        match (last, next) {
            (Some(AccessKind::Read), AccessKind::Write) => self.timing.rw_turnaround,
            (Some(AccessKind::Write), AccessKind::Read) => self.timing.wr_turnaround,
            _ => Tick::ZERO,
        }
    }

    /// Earliest dispatch time for `q` given current bank and bus state.
    ///
    /// The bank must be idle, with its previous access retired, and for a
    /// conflict past tRAS. The data burst,
    /// which ends exactly `service` after dispatch, must start after the
    /// subchannel bus frees up plus any read/write turnaround.
    pub fn earliest_dispatch(&self, q: &QueuedRequest, now: Tick) -> Tick {
        let bank = &self.banks[q.flat_bank];
        if bank.awaiting_completion {
            return Tick::MAX;
        }
        let state = bank.row_state(q.addr.row);
        let service = service_time(state, &self.timing);
        let mut t = bank.busy_until;
        if state == RowState::Conflict {
            t = t.max(bank.precharge_ready(&self.timing).saturating_sub(self.timing.pipeline));
        }
        let bus = &self.buses[q.addr.subchannel as usize];
        let group = &self.groups[self.group_index(q.flat_bank)];
        let mut burst_start = bus.free_at + self.turnaround(bus.last_dir, q.kind);
        if let Some((at, kind)) = group.last_burst {
            let gap = match (kind, q.kind) {
                (AccessKind::Write, AccessKind::Write) => self.timing.ccd_l_wr,
                _ => self.timing.ccd_l,
            };
            burst_start = burst_start.max(at + gap);
        }
        let lead = service - self.timing.burst;
        t = t.max(burst_start.saturating_sub(lead));
        let sub = q.addr.subchannel as usize;
        if let Some(act_lead) = self.activate_lead(state) {
            let acts = &self.activates[sub];
            let rrd = acts[3].map_or(Tick::ZERO, |a| a + self.timing.rrd);
            let faw = acts[0].map_or(Tick::ZERO, |a| a + self.timing.faw);
            let rrd_l = group.last_activate.map_or(Tick::ZERO, |a| a + self.timing.rrd_l);
            let act_ready = rrd.max(faw).max(rrd_l);
            t = t.max(act_ready.saturating_sub(act_lead));
        }
        if let Some(r) = self.timing.refresh {
            t = t.max(now);
            let (start, slot) = self.next_refresh[sub];
            if t + service > start && self.refreshes(q.flat_bank, slot) {
                t = t.max(start + r.duration);
            }
        }
        t
    }

    pub fn row_state(&self, q: &QueuedRequest) -> RowState {
        self.banks[q.flat_bank].row_state(q.addr.row)
    }

    /// Commits an access at `now`. The caller guarantees readiness.
    pub fn issue(&mut self, q: &QueuedRequest, now: Tick) -> Issue {
        debug_assert!(self.earliest_dispatch(q, now) <= now);
        let t = self.timing;
        let bank = &mut self.banks[q.flat_bank];
        let row_state = bank.row_state(q.addr.row);
        let service = service_time(row_state, &t);
        let done = now + service;
        match row_state {
            RowState::Hit => {}
            RowState::Closed => bank.activated_at = now + t.pipeline,
            RowState::Conflict => bank.activated_at = now + t.pipeline + t.rp,
        }
        bank.open_row = Some(q.addr.row);
        bank.busy_until = done;
        bank.last_op = Some(q.kind);
        bank.awaiting_completion = true;
        if q.kind == AccessKind::Write {
            bank.write_recovery_until = done + t.wr;
        }
        let gi = self.group_index(q.flat_bank);
        self.groups[gi].last_burst = Some((done - t.burst, q.kind));
        if let Some(lead) = self.activate_lead(row_state) {
            let act = now + lead;
            self.groups[gi].last_activate = Some(act);
            let acts = &mut self.activates[q.addr.subchannel as usize];
            if Some(act) > acts[0] {
                acts[0] = Some(act);
                acts.sort_unstable();
            }
        }
        let bus = &mut self.buses[q.addr.subchannel as usize];
        bus.free_at = done;
        bus.last_dir = Some(q.kind);
        Issue { row_state, service, done }
    }
}

/// Choice made by the scheduler.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pick {
    pub kind: AccessKind,
    pub index: usize,
}

/// FR-FCFS (or plain FCFS) selection at `now`.
///
/// Among requests whose bank and bus are ready, the oldest row hit wins,
/// otherwise the oldest ready request. A request bypassed `starvation_cap`
/// times blocks everything behind it until it can go.
pub fn schedule_next(
    queue: &ControllerQueue,
    device: &Device,
    now: Tick,
    reads_allowed: bool,
    policy: SchedulerKind,
) -> Option<Pick> {
    let kind = queue.serving(reads_allowed)?;
    let q = queue.queue(kind);
    let ready = |i: usize| device.earliest_dispatch(&q[i], now) <= now;
    if let Some(i) = queue.forced(kind) {
        return ready(i).then_some(Pick { kind, index: i });
    }
    match policy {
        SchedulerKind::Fcfs => ready(0).then_some(Pick { kind, index: 0 }),
        SchedulerKind::FrFcfs => {
            let mut first_ready = None;
            for (i, r) in q.iter().enumerate() {
                if device.earliest_dispatch(r, now) > now {
                    continue;
                }
                if device.row_state(r) == RowState::Hit {
                    return Some(Pick { kind, index: i });
                }
                first_ready.get_or_insert(i);
            }
            first_ready.map(|index| Pick { kind, index })
        }
    }
}

/// Next time `schedule_next` could return something, assuming no arrivals.
pub fn next_ready_time(
    queue: &ControllerQueue,
    device: &Device,
    now: Tick,
    reads_allowed: bool,
    policy: SchedulerKind,
) -> Option<Tick> {
    let kind = queue.serving(reads_allowed)?;
    let q = queue.queue(kind);
    let t = if let Some(i) = queue.forced(kind) {
        Some(device.earliest_dispatch(&q[i], now))
    } else {
        match policy {
            SchedulerKind::Fcfs => q.front().map(|r| device.earliest_dispatch(r, now)),
            SchedulerKind::FrFcfs => q.iter().map(|r| device.earliest_dispatch(r, now)).min(),
        }
    };
    // Banks still awaiting a completion wake the channel themselves.
    t.filter(|&t| t != Tick::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dram::address::decode;

    fn queued(id: u64, kind: AccessKind, addr: u64, t: &DramTiming) -> QueuedRequest {
        let a = decode(addr, t);
        QueuedRequest { id: RequestId(id), kind, addr: a, flat_bank: a.flat_bank(t), arrival: Tick(id), bypassed: 0 }
    }

    #[test]
    fn row_hit_overtakes_older_conflict() {
        let t = DramTiming::default();
        let stride = crate::dram::address::same_bank_row_stride(&t);
        let mut dev = Device::new(&t);
        // Bank 0 has row 0 open; bank 1 has row 0 open.
        dev.banks[0].open_row = Some(0);
        dev.banks[1].open_row = Some(0);
        let mut q = ControllerQueue::from_timing(&t);
        // Older: conflict in bank 0 (row 1). Younger: hit in bank 1 row 0.
        q.push(queued(1, AccessKind::Read, stride, &t));
        q.push(queued(2, AccessKind::Read, 128, &t));
        let now = Tick(1_000_000);
        let pick = schedule_next(&q, &dev, now, true, SchedulerKind::FrFcfs).unwrap();
        assert_eq!(q.reads[pick.index].id, RequestId(2));
        let fcfs = schedule_next(&q, &dev, now, true, SchedulerKind::Fcfs).unwrap();
        assert_eq!(q.reads[fcfs.index].id, RequestId(1));
    }

    #[test]
    fn write_drain_between_watermarks() {
        let t = DramTiming::default();
        let dev = Device::new(&t);
        let mut q = ControllerQueue::from_timing(&t);
        q.push(queued(0, AccessKind::Read, 0, &t));
        for i in 0..47 {
            q.push(queued(1 + i, AccessKind::Write, 64 * (i + 1), &t));
        }
        assert!(!q.is_draining());
        let now = Tick(1_000_000);
        assert_eq!(schedule_next(&q, &dev, now, true, SchedulerKind::FrFcfs).unwrap().kind, AccessKind::Read);
        q.push(queued(100, AccessKind::Write, 64 * 100, &t));
        assert!(q.is_draining());
        // Writes go until the low watermark is reached.
        let mut served = 0;
        while q.is_draining() {
            let p = schedule_next(&q, &dev, now, true, SchedulerKind::FrFcfs).unwrap();
            assert_eq!(p.kind, AccessKind::Write);
            q.take(p.kind, p.index, |_| true);
            served += 1;
        }
        assert_eq!(served, 48 - 16);
        assert_eq!(q.writes.len(), 16);
        assert_eq!(schedule_next(&q, &dev, now, true, SchedulerKind::FrFcfs).unwrap().kind, AccessKind::Read);
    }

    #[test]
    fn starved_request_is_forced() {
        let t = DramTiming { starvation_cap: 2, ..DramTiming::default() };
        let stride = crate::dram::address::same_bank_row_stride(&t);
        let mut dev = Device::new(&t);
        dev.banks[0].open_row = Some(0);
        let mut q = ControllerQueue::from_timing(&t);
        q.push(queued(1, AccessKind::Read, stride, &t)); // conflict, oldest
        for i in 0..3 {
            q.push(queued(2 + i, AccessKind::Read, 128 * (i + 1), &t)); // row hits
            dev.banks[1 + i as usize].open_row = Some(0);
        }
        let now = Tick(1_000_000);
        // Two bypasses allowed, then the conflict request is forced.
        for _ in 0..2 {
            let p = schedule_next(&q, &dev, now, true, SchedulerKind::FrFcfs).unwrap();
            assert_ne!(q.reads[p.index].id, RequestId(1));
            q.take(p.kind, p.index, |_| true);
        }
        let p = schedule_next(&q, &dev, now, true, SchedulerKind::FrFcfs).unwrap();
        assert_eq!(q.reads[p.index].id, RequestId(1));
    }

    #[test]
    fn bus_turnaround_delays_direction_switch() {
        let t = DramTiming::default();
        let mut dev = Device::new(&t);
        let w = queued(0, AccessKind::Write, 0, &t);
        let issued = dev.issue(&w, Tick(0));
        let r = queued(1, AccessKind::Read, 128, &t); // same subchannel, other bank
        let svc = service_time(RowState::Closed, &dev.timing);
        let expected = issued.done + dev.timing.wr_turnaround - (svc - dev.timing.burst);
        assert_eq!(dev.earliest_dispatch(&r, Tick(0)), expected);
    }
}
