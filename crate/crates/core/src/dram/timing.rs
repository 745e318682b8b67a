use serde::{Deserialize, Serialize};

use crate::engine::{Tick, LINE_BYTES};
use crate::error::ConfigError;

/// Row-buffer management after a column access completes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PagePolicy {
    /// Rows stay open until a conflicting access closes them.
    Open,
    /// Rows stay open while queued requests still hit them; otherwise the
    /// bank precharges as soon as the access finishes.
    #[default]
    OpenAdaptive,
    /// Every access auto-precharges.
    Closed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefreshMode {
    #[default]
    Off,
    /// Every `t_refi_ns` the whole subchannel is unavailable for `t_rfc_ns`.
    AllBank,
    /// Banks with the same index in every group refresh together for
    /// `t_rfc_sb_ns`; the indices take turns so each bank refreshes once
    /// per `t_refi_ns`.
    SameBank,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    #[default]
    FrFcfs,
    Fcfs,
}

/// DDR device and controller parameters. Durations are in nanoseconds.
///
/// Defaults describe one DDR5-4800 channel: two 32-bit subchannels, one rank
/// each, 32 banks per rank, for 38.4 GB/s of peak data bandwidth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DramTiming {
    pub data_rate_mts: u32,
    pub subchannels: u32,
    pub ranks_per_subchannel: u32,
    pub banks_per_rank: u32,
    /// Cache lines per row in one bank.
    pub columns_per_row: u32,
    pub t_rcd_ns: f64,
    pub t_cl_ns: f64,
    pub t_rp_ns: f64,
    pub t_ras_ns: f64,
    /// Write recovery: last write data to precharge.
    pub t_wr_ns: f64,
    /// Banks of a rank are split into this many groups; bank `b` sits in
    /// group `b % bank_groups`.
    pub bank_groups: u32,
    /// Minimum spacing of two activates in one subchannel.
    pub t_rrd_ns: f64,
    /// Activate spacing within one bank group.
    pub t_rrd_l_ns: f64,
    /// Burst spacing within one bank group.
    pub t_ccd_l_ns: f64,
    /// Burst spacing of two writes within one bank group.
    pub t_ccd_l_wr_ns: f64,
    /// Window that may hold at most four activates in one subchannel.
    pub t_faw_ns: f64,
    pub refresh: RefreshMode,
    pub t_refi_ns: f64,
    /// All-bank refresh duration.
    pub t_rfc_ns: f64,
    /// Same-bank refresh duration.
    pub t_rfc_sb_ns: f64,
    pub burst_length: u32,
    pub bus_width_bits: u32,
    /// Minimum data-bus gap when a write burst follows a read burst.
    pub read_write_turnaround_ns: f64,
    /// Minimum data-bus gap when a read burst follows a write burst.
    pub write_read_turnaround_ns: f64,
    pub controller_pipeline_ns: f64,
    pub page_policy: PagePolicy,
    pub scheduler: SchedulerKind,
    pub queue_capacity: usize,
    pub write_high_watermark: usize,
    pub write_low_watermark: usize,
    /// Times a request may be bypassed by younger ones before it is forced.
    pub starvation_cap: u32,
}

impl Default for DramTiming {
    fn default() -> Self {
        DramTiming {
            data_rate_mts: 4800,
            subchannels: 2,
            ranks_per_subchannel: 1,
            banks_per_rank: 32,
            columns_per_row: 128,
            t_rcd_ns: 16.0,
            t_cl_ns: 16.0,
            t_rp_ns: 16.0,
            t_ras_ns: 32.0,
            t_wr_ns: 30.0,
            bank_groups: 8,
            t_rrd_ns: 3.333,
            t_rrd_l_ns: 5.0,
            t_ccd_l_ns: 5.0,
            t_ccd_l_wr_ns: 13.333,
            t_faw_ns: 13.333,
            refresh: RefreshMode::Off,
            t_refi_ns: 3_900.0,
            t_rfc_ns: 295.0,
            t_rfc_sb_ns: 115.0,
            burst_length: 16,
            bus_width_bits: 32,
            read_write_turnaround_ns: 5.0,
            write_read_turnaround_ns: 20.0,
            controller_pipeline_ns: 8.0,
            page_policy: PagePolicy::default(),
            scheduler: SchedulerKind::default(),
            queue_capacity: 64,
            write_high_watermark: 48,
            write_low_watermark: 16,
            starvation_cap: 16,
        }
    }
}

impl DramTiming {
    /// Bytes moved by one burst on one subchannel.
    pub fn burst_bytes(&self) -> u64 {
        self.burst_length as u64 * self.bus_width_bits as u64 / 8
    }

    /// Peak data bandwidth of the whole channel in bytes per second.
    pub fn peak_bytes_per_sec(&self) -> f64 {
        self.data_rate_mts as f64 * 1e6 * (self.bus_width_bits as f64 / 8.0) * self.subchannels as f64
    }

    pub fn peak_gbps(&self) -> f64 {
        self.peak_bytes_per_sec() / 1e9
    }

    pub fn banks_per_subchannel(&self) -> u32 {
        self.ranks_per_subchannel * self.banks_per_rank
    }

    /// Bank groups across all ranks of one subchannel.
    pub fn groups_per_subchannel(&self) -> u32 {
        self.ranks_per_subchannel * self.bank_groups
    }

    pub fn total_banks(&self) -> u32 {
        self.subchannels * self.banks_per_subchannel()
    }

    /// Burst duration: burst length over transfer rate.
    pub fn t_burst(&self) -> Tick {
        Tick::from_ns(self.burst_length as f64 * 1e3 / self.data_rate_mts as f64)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("data_rate_mts", self.data_rate_mts),
            ("subchannels", self.subchannels),
            ("ranks_per_subchannel", self.ranks_per_subchannel),
            ("banks_per_rank", self.banks_per_rank),
            ("bank_groups", self.bank_groups),
            ("columns_per_row", self.columns_per_row),
            ("burst_length", self.burst_length),
            ("bus_width_bits", self.bus_width_bits),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(ConfigError::out_of_range(field, "must be positive"));
            }
        }
        for (field, v) in [
            ("t_rcd_ns", self.t_rcd_ns),
            ("t_cl_ns", self.t_cl_ns),
            ("t_rp_ns", self.t_rp_ns),
            ("t_ras_ns", self.t_ras_ns),
            ("t_wr_ns", self.t_wr_ns),
            ("t_rrd_ns", self.t_rrd_ns),
            ("t_rrd_l_ns", self.t_rrd_l_ns),
            ("t_ccd_l_ns", self.t_ccd_l_ns),
            ("t_ccd_l_wr_ns", self.t_ccd_l_wr_ns),
            ("t_faw_ns", self.t_faw_ns),
            ("t_rfc_ns", self.t_rfc_ns),
            ("t_rfc_sb_ns", self.t_rfc_sb_ns),
            ("read_write_turnaround_ns", self.read_write_turnaround_ns),
            ("write_read_turnaround_ns", self.write_read_turnaround_ns),
            ("controller_pipeline_ns", self.controller_pipeline_ns),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::out_of_range(field, "must be a non-negative number of ns"));
            }
        }
        if self.burst_bytes() != LINE_BYTES {
            return Err(ConfigError::out_of_range(
                "burst_length",
                format!("burst_length x bus_width_bits must move one 64-byte line, got {} bytes", self.burst_bytes()),
            ));
        }
        if !self.banks_per_rank.is_multiple_of(self.bank_groups) {
            return Err(ConfigError::out_of_range("bank_groups", "must divide banks_per_rank"));
        }
        if let Some(r) = self.refresh_ps() {
            if r.interval <= r.duration {
                return Err(ConfigError::out_of_range(
                    "t_refi_ns",
                    "refresh commands would overlap: interval per command must exceed its duration",
                ));
            }
        }
        if self.queue_capacity == 0 {
            return Err(ConfigError::out_of_range("queue_capacity", "must be positive"));
        }
        if self.write_low_watermark >= self.write_high_watermark || self.write_high_watermark > self.queue_capacity {
            return Err(ConfigError::out_of_range(
                "write_high_watermark",
                "watermarks must satisfy low < high <= queue_capacity",
            ));
        }
        Ok(())
    }

    fn refresh_ps(&self) -> Option<RefreshPs> {
        let refi = Tick::from_ns(self.t_refi_ns);
        match self.refresh {
            RefreshMode::Off => None,
            RefreshMode::AllBank => {
                Some(RefreshPs { interval: refi, duration: Tick::from_ns(self.t_rfc_ns), slots: 1 })
            }
            RefreshMode::SameBank => {
                let slots = (self.banks_per_rank / self.bank_groups.max(1)).max(1);
                Some(RefreshPs {
                    interval: Tick(refi.ps() / slots as u64),
                    duration: Tick::from_ns(self.t_rfc_sb_ns),
                    slots,
                })
            }
        }
    }

    pub(crate) fn to_ps(&self) -> TimingPs {
        TimingPs {
            rcd: Tick::from_ns(self.t_rcd_ns),
            cl: Tick::from_ns(self.t_cl_ns),
            rp: Tick::from_ns(self.t_rp_ns),
            ras: Tick::from_ns(self.t_ras_ns),
            wr: Tick::from_ns(self.t_wr_ns),
            rrd: Tick::from_ns(self.t_rrd_ns),
            rrd_l: Tick::from_ns(self.t_rrd_l_ns),
            ccd_l: Tick::from_ns(self.t_ccd_l_ns),
            ccd_l_wr: Tick::from_ns(self.t_ccd_l_wr_ns),
            faw: Tick::from_ns(self.t_faw_ns),
            refresh: self.refresh_ps(),
            burst: self.t_burst(),
            rw_turnaround: Tick::from_ns(self.read_write_turnaround_ns),
            wr_turnaround: Tick::from_ns(self.write_read_turnaround_ns),
            pipeline: Tick::from_ns(self.controller_pipeline_ns),
        }
    }
}

/// Refresh cadence: one command every `interval`, each blocking its banks
/// for `duration`. Commands rotate over `slots` bank sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct RefreshPs {
    pub interval: Tick,
    pub duration: Tick,
    pub slots: u32,
}

/// Timing parameters pre-converted to picoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct TimingPs {
    pub rcd: Tick,
    pub cl: Tick,
    pub rp: Tick,
    pub ras: Tick,
    pub wr: Tick,
    pub rrd: Tick,
    pub rrd_l: Tick,
    pub ccd_l: Tick,
    pub ccd_l_wr: Tick,
    pub faw: Tick,
    pub refresh: Option<RefreshPs>,
    pub burst: Tick,
    pub rw_turnaround: Tick,
    pub wr_turnaround: Tick,
    pub pipeline: Tick,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_ddr5_4800_peak() {
        let t = DramTiming::default();
        assert_eq!(t.peak_bytes_per_sec(), 38.4e9);
        assert_eq!(t.burst_bytes(), 64);
        assert_eq!(t.t_burst(), Tick(3_333));
        assert_eq!(t.total_banks(), 64);
        t.validate().unwrap();
    }

    #[test]
    fn rejects_bursts_that_are_not_one_line() {
        let t = DramTiming { burst_length: 8, ..DramTiming::default() };
        assert!(t.validate().is_err());
    }

    #[test]
    fn rejects_inverted_watermarks() {
        let t = DramTiming { write_low_watermark: 50, ..DramTiming::default() };
        assert!(t.validate().is_err());
    }
}
