use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::engine::{AccessKind, RequestId, SimRng, Tick, LINE_BYTES};
use crate::error::{ConfigError, Result, SimError};

/// Anything that can answer memory requests with completion times.
pub trait MemoryBackend {
    /// Issues a request at `now` and returns its id.
    fn submit(&mut self, now: Tick, core: u32, address: u64, kind: AccessKind) -> RequestId;

    /// Earliest time at which the backend's state may change, if any work is
    /// outstanding.
    fn next_completion(&self) -> Option<Tick>;

    /// Processes everything up to and including `until`, appending
    /// `(request, completion time)` for each finished request.
    fn advance_to(&mut self, until: Tick, completions: &mut Vec<(RequestId, Tick)>);
}

/// Parametric out-of-order core that turns instructions into LLC misses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedLoopCoreSpec {
    pub cores: u32,
    pub issue_width: u32,
    pub rob_entries: u32,
    /// Outstanding read misses per core.
    pub mshrs: u32,
    pub clock_hz: f64,
    /// Probability that an instruction misses the LLC.
    pub miss_prob: f64,
    /// Probability that a miss is a write.
    pub write_prob: f64,
    /// Probability that a read miss waits for the youngest older miss.
    pub dependency_prob: f64,
    pub address_space_bytes: u64,
    /// Stride that keeps an address in the same bank; used for dependent misses.
    pub same_bank_stride: u64,
}

impl Default for ClosedLoopCoreSpec {
    fn default() -> Self {
        ClosedLoopCoreSpec {
            cores: 12,
            issue_width: 4,
            rob_entries: 256,
            mshrs: 16,
            clock_hz: 2e9,
            miss_prob: 0.04,
            write_prob: 0.0,
            dependency_prob: 0.0,
            address_space_bytes: 128 << 30,
            same_bank_stride: 1 << 20,
        }
    }
}

impl ClosedLoopCoreSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mshrs == 0 {
            return Err(ConfigError::out_of_range("mshrs", "a core needs at least one MSHR"));
        }
        if self.mshrs > self.rob_entries {
            return Err(ConfigError::out_of_range("mshrs", "cannot exceed rob_entries"));
        }
        if self.cores == 0 || self.issue_width == 0 || self.rob_entries == 0 {
            return Err(ConfigError::out_of_range("cores", "cores, issue_width and rob_entries must be positive"));
        }
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(ConfigError::out_of_range("clock_hz", "must be positive"));
        }
        for (field, p) in
            [("miss_prob", self.miss_prob), ("write_prob", self.write_prob), ("dependency_prob", self.dependency_prob)]
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::out_of_range(field, "probability must lie in [0, 1]"));
            }
        }
        if self.address_space_bytes < LINE_BYTES {
            return Err(ConfigError::out_of_range("address_space_bytes", "must hold at least one line"));
        }
        Ok(())
    }

    pub fn cycle(&self) -> Tick {
        Tick::from_ns(1e9 / self.clock_hz)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreModelResult {
    pub instructions_per_core: u64,
    /// Cycle at which each core retired its last instruction.
    pub cycles: Vec<u64>,
    pub ipc_per_core: Vec<f64>,
    /// Mean of the per-core IPCs.
    pub ipc: f64,
    pub read_misses: u64,
    pub writes: u64,
    /// Issue-to-data latency of each read miss, in ns.
    pub miss_latencies_ns: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Entry {
    Plain { ready_cycle: u64 },
    Miss { done: bool },
}

#[derive(Clone, Copy, Debug)]
struct PendingMiss {
    seq: u64,
    address: u64,
    depends_on: Option<u64>,
}

struct Core {
    index: u32,
    rng: SimRng,
    rob: VecDeque<Entry>,
    head_seq: u64,
    pending: VecDeque<PendingMiss>,
    mshrs_used: u32,
    youngest_miss: Option<(u64, u64)>,
    dispatched: u64,
    retired: u64,
    finished_at: Option<u64>,
}

impl Core {
    fn entry_mut(&mut self, seq: u64) -> Option<&mut Entry> {
        seq.checked_sub(self.head_seq).and_then(|i| self.rob.get_mut(i as usize))
    }

    fn miss_done(&self, seq: u64) -> bool {
        match seq.checked_sub(self.head_seq) {
            None => true,
            Some(i) => matches!(self.rob.get(i as usize), Some(Entry::Miss { done: true }) | None),
        }
    }
}

/// Drives `spec.cores` cores against `backend` until each has retired
/// `instructions` instructions.
///
/// In-order retire: up to `issue_width` instructions enter the ROB per
/// cycle, a plain instruction retires one cycle after entering, and a read
/// miss blocks the head until its data returns. Read misses issue in program
/// order as MSHRs free up; writes are posted and never block.
pub fn run_core_model<B: MemoryBackend>(
    spec: &ClosedLoopCoreSpec,
    backend: &mut B,
    instructions: u64,
    rng: &SimRng,
) -> Result<CoreModelResult> {
    spec.validate()?;
    let cycle_ps = spec.cycle();
    let lines = spec.address_space_bytes / LINE_BYTES;
    let mut cores: Vec<Core> = (0..spec.cores)
        .map(|i| Core {
            index: i,
            rng: rng.split(0x1000 + i as u64),
            rob: VecDeque::with_capacity(spec.rob_entries as usize),
            head_seq: 0,
            pending: VecDeque::new(),
            mshrs_used: 0,
            youngest_miss: None,
            dispatched: 0,
            retired: 0,
            finished_at: (instructions == 0).then_some(0),
        })
        .collect();

    let mut outstanding: HashMap<RequestId, (usize, u64, Tick)> = HashMap::new();
    let mut completions = Vec::new();
    let mut latencies = Vec::new();
    let mut read_misses = 0u64;
    let mut writes = 0u64;
    let mut cycle = 0u64;

    while cores.iter().any(|c| c.finished_at.is_none()) {
        let now = Tick(cycle * cycle_ps.ps());
        completions.clear();
        backend.advance_to(now, &mut completions);
        for &(id, t) in &completions {
            let Some((ci, seq, issued)) = outstanding.remove(&id) else { continue };
            latencies.push((t - issued).as_ns());
            let core = &mut cores[ci];
            core.mshrs_used -= 1;
            if let Some(Entry::Miss { done }) = core.entry_mut(seq) {
                *done = true;
            }
        }

        let mut progress = false;
        for (ci, core) in cores.iter_mut().enumerate() {
            if core.finished_at.is_some() {
                continue;
            }
            // Retire.
            let mut n = 0;
            while n < spec.issue_width {
                let ready = match core.rob.front() {
                    Some(Entry::Plain { ready_cycle }) => *ready_cycle <= cycle,
                    Some(Entry::Miss { done }) => *done,
                    None => false,
                };
                if !ready {
                    break;
                }
                core.rob.pop_front();
                core.head_seq += 1;
                core.retired += 1;
                n += 1;
            }
            progress |= n > 0;
            if core.retired == instructions {
                core.finished_at = Some(cycle);
                continue;
            }

            // Dispatch.
            let mut d = 0;
            while d < spec.issue_width && core.rob.len() < spec.rob_entries as usize && core.dispatched < instructions {
                let seq = core.head_seq + core.rob.len() as u64;
                let miss = spec.miss_prob > 0.0 && core.rng.bernoulli(spec.miss_prob);
                let entry = if !miss {
                    Entry::Plain { ready_cycle: cycle + 1 }
                } else if spec.write_prob > 0.0 && core.rng.bernoulli(spec.write_prob) {
                    let address = core.rng.below(lines) * LINE_BYTES;
                    backend.submit(now, core.index, address, AccessKind::Write);
                    writes += 1;
                    Entry::Plain { ready_cycle: cycle + 1 }
                } else {
                    let dependent = spec.dependency_prob > 0.0 && core.rng.bernoulli(spec.dependency_prob);
                    let (address, depends_on) = match (dependent, core.youngest_miss) {
                        (true, Some((prev_seq, prev_addr))) if !core.miss_done(prev_seq) => {
                            ((prev_addr + spec.same_bank_stride) % (lines * LINE_BYTES), Some(prev_seq))
                        }
                        _ => (core.rng.below(lines) * LINE_BYTES, None),
                    };
                    core.pending.push_back(PendingMiss { seq, address, depends_on });
                    core.youngest_miss = Some((seq, address));
                    Entry::Miss { done: false }
                };
                core.rob.push_back(entry);
                core.dispatched += 1;
                d += 1;
            }
            progress |= d > 0;

            // Issue read misses in program order.
            while core.mshrs_used < spec.mshrs {
                let Some(&p) = core.pending.front() else { break };
                if let Some(dep) = p.depends_on {
                    if !core.miss_done(dep) {
                        break;
                    }
                }
                core.pending.pop_front();
                let id = backend.submit(now, core.index, p.address, AccessKind::Read);
                outstanding.insert(id, (ci, p.seq, now));
                core.mshrs_used += 1;
                read_misses += 1;
                progress = true;
            }
        }

        if progress {
            cycle += 1;
            continue;
        }
        match backend.next_completion() {
            Some(t) => {
                let target = t.ps().div_ceil(cycle_ps.ps());
                cycle = target.max(cycle + 1);
            }
            None => {
                return Err(SimError::Internal(format!(
                    "core model stalled at cycle {cycle} with no outstanding memory work"
                )))
            }
        }
    }

    let cycles: Vec<u64> = cores.iter().map(|c| c.finished_at.unwrap_or(0)).collect();
    let ipc_per_core: Vec<f64> =
        cycles.iter().map(|&c| if c == 0 { 0.0 } else { instructions as f64 / c as f64 }).collect();
    let ipc = ipc_per_core.iter().sum::<f64>() / ipc_per_core.len() as f64;
    Ok(CoreModelResult {
        instructions_per_core: instructions,
        cycles,
        ipc_per_core,
        ipc,
        read_misses,
        writes,
        miss_latencies_ns: latencies,
    })
}
