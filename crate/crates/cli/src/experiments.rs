//! One function per experiment kind, each turning a scenario into a report.

use memqsim::analysis::{after_warmup, analyze, cdf_points, read_latencies_ns, RunReport};
use memqsim::cxl::asym_compare;
use memqsim::dram::{sweep_load, SweepConfig};
use memqsim::models::{decimal, edp, pin_table, system_power, Directions, InterfaceSpec, PowerConfig, SystemCounts};
use memqsim::system::{MemorySystem, RunUntil, SimulationTrace, Source};
use memqsim::traffic::{load_trace, run_variance_experiment, OpenLoopSpec};
use memqsim::{run_open_loop, ConfigError, Exact, Topology, TopologyComparison};
use serde_json::json;

use crate::report::{Cell, Report, Table};
use crate::scenario::{Experiment, PinDirections, Scenario};
use crate::CliError;

pub const SWEEP_COLUMNS: [&str; 5] = ["util", "avg_ns", "p50", "p90", "p99"];

pub const RUN_COLUMNS: [&str; 13] = [
    "topology",
    "injected",
    "measured_reads",
    "utilization",
    "avg_ns",
    "p50",
    "p90",
    "p99",
    "stdev_ns",
    "mc_queue_ns",
    "dram_service_ns",
    "link_port_ns",
    "link_wire_queue_ns",
];

pub fn execute(scenario: &Scenario) -> Result<Report, CliError> {
    match scenario.experiment {
        Experiment::Run => run(scenario),
        Experiment::SweepLoad => sweep(scenario),
        Experiment::Variance => variance(scenario),
        Experiment::Compare => compare(scenario),
        Experiment::AsymCompare => asym(scenario),
        Experiment::Pins => pins(scenario),
        Experiment::Power => power(scenario),
    }
}

fn run_row(r: &RunReport) -> Vec<Cell> {
    vec![
        r.topology.as_str().into(),
        r.injected.into(),
        r.measured_reads.into(),
        r.utilization.aggregate.into(),
        r.latency.mean.into(),
        r.latency.p50.into(),
        r.latency.p90.into(),
        r.latency.p99.into(),
        r.latency.stdev.into(),
        r.breakdown.mc_queue.into(),
        r.breakdown.dram_service.into(),
        r.breakdown.link_port.into(),
        r.breakdown.link_wire_queue.into(),
    ]
}

fn cdf_table(trace: &SimulationTrace, warmup: f64) -> Table {
    let samples = read_latencies_ns(after_warmup(&trace.requests, warmup));
    let mut t = Table::new(&["latency_ns", "cumulative_fraction"]);
    for (x, f) in cdf_points(&samples) {
        t.push(vec![x.into(), f.into()]);
    }
    t
}

fn traffic_at(spec: &OpenLoopSpec, load: Option<f64>, topology: &Topology) -> OpenLoopSpec {
    let mut spec = spec.clone();
    if let Some(load) = load {
        spec.rate_bytes_per_sec = load * topology.peak_bytes_per_sec();
    }
    spec
}

fn warnings_json(trace: &SimulationTrace) -> serde_json::Value {
    json!(trace.warnings)
}

fn run(s: &Scenario) -> Result<Report, CliError> {
    let topology = s.topology(&s.run.topology)?;
    let trace = match &s.run.trace {
        Some(path) => {
            let records = load_trace(path)?;
            MemorySystem::new(topology.clone(), Source::Trace { records, next: 0 })?.run(RunUntil::Drain)?
        }
        None => run_open_loop(topology.clone(), &traffic_at(&s.traffic, s.run.load, &topology), s.seed)?,
    };
    let r = analyze(&trace, &topology, s.warmup);
    let mut table = Table::new(&RUN_COLUMNS);
    table.push(run_row(&r));
    let mut report = Report::new(table);
    report.summary = json!({
        "report": r,
        "warnings": warnings_json(&trace),
    });
    report.attachments.push((format!("cdf-{}", r.topology), cdf_table(&trace, s.warmup)));
    Ok(report)
}

fn sweep(s: &Scenario) -> Result<Report, CliError> {
    let cfg = SweepConfig {
        timing: s.timing.clone(),
        utilizations: s.sweep.utilizations.clone(),
        request_count: s.sweep.request_count,
        read_fraction: s.sweep.read_fraction,
        warmup: s.warmup,
    };
    let points = sweep_load(&cfg, s.seed)?;
    let mut table = Table::new(&SWEEP_COLUMNS);
    for p in &points {
        table.push(vec![p.utilization.into(), p.avg_ns.into(), p.p50.into(), p.p90.into(), p.p99.into()]);
    }
    let mut report = Report::new(table);
    report.summary = json!({ "points": points });
    Ok(report)
}

fn compare(s: &Scenario) -> Result<Report, CliError> {
    let a = s.topology(&s.compare.a)?;
    let b = s.topology(&s.compare.b)?;
    let spec = traffic_at(&s.traffic, Some(s.compare.load), &a);
    let mut table = Table::new(&RUN_COLUMNS);
    let mut reports = Vec::new();
    let mut attachments = Vec::new();
    for t in [&a, &b] {
        let trace = run_open_loop(t.clone(), &spec, s.seed)?;
        let r = analyze(&trace, t, s.warmup);
        table.push(run_row(&r));
        attachments.push((format!("cdf-{}", t.name), cdf_table(&trace, s.warmup)));
        reports.push(r);
    }
    let (ra, rb) = (&reports[0], &reports[1]);
    let mut report = Report::new(table);
    report.summary = json!({
        "offered_gbps": spec.rate_bytes_per_sec / 1e9,
        "avg_reduction": TopologyComparison::reduction(ra.latency.mean, rb.latency.mean),
        "p90_reduction": TopologyComparison::reduction(ra.latency.p90, rb.latency.p90),
        "a": ra,
        "b": rb,
    });
    report.attachments = attachments;
    Ok(report)
}

fn variance(s: &Scenario) -> Result<Report, CliError> {
    let rows = run_variance_experiment(&s.variance, s.seed)?;
    let mut table =
        Table::new(&["label", "distribution", "mean_ns", "stdev_ns", "ipc", "relative_ipc", "reference_relative_ipc"]);
    for r in &rows {
        table.push(vec![
            r.label.as_str().into(),
            r.distribution.as_str().into(),
            r.mean_ns.into(),
            r.stdev_ns.into(),
            r.ipc.into(),
            r.relative_ipc.into(),
            r.reference.map_or(Cell::Text(String::new()), Cell::Float),
        ]);
    }
    Ok(Report::new(table))
}

fn asym(s: &Scenario) -> Result<Report, CliError> {
    let cmp = asym_compare(&s.asym, s.seed)?;
    let mut table = Table::new(&[
        "topology",
        "avg_ns",
        "p50",
        "p90",
        "p99",
        "read_throughput_gbps",
        "tx_utilization",
        "rx_utilization",
    ]);
    for side in [&cmp.symmetric, &cmp.asym] {
        let l = &side.report.latency;
        table.push(vec![
            side.report.topology.as_str().into(),
            l.mean.into(),
            l.p50.into(),
            l.p90.into(),
            l.p99.into(),
            side.read_throughput_gbps.into(),
            side.tx_utilization.into(),
            side.rx_utilization.into(),
        ]);
    }
    let mut report = Report::new(table);
    report.summary = json!({
        "offered_gbps": cmp.offered_gbps,
        "read_fraction": cmp.read_fraction,
        "symmetric": cmp.symmetric,
        "asym": cmp.asym,
    });
    Ok(report)
}

/// Exact value of a decimal scenario number, via its shortest round-trip
/// text.
fn exact(field: &str, v: f64) -> Result<Exact, ConfigError> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(ConfigError::out_of_range(field, "must be a non-negative number"));
    }
    decimal::<Exact>(&v.to_string())
        .ok_or_else(|| ConfigError::out_of_range(field, format!("{v} has too many digits for exact arithmetic")))
}

fn exact_to_f64(q: Exact) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn pins(s: &Scenario) -> Result<Report, CliError> {
    let mut specs = Vec::new();
    for e in &s.pins.interfaces {
        if e.pins == 0 {
            return Err(ConfigError::out_of_range("pins.interfaces.pins", "must be positive").into());
        }
        let dirs = match e.directions {
            PinDirections::Both => Directions::Both,
            PinDirections::One => Directions::One,
        };
        specs.push(InterfaceSpec::new(
            &e.name,
            e.pins,
            exact("pins.interfaces.bandwidth_gbps", e.bandwidth_gbps)?,
            dirs,
        ));
    }
    let reference_pins = Exact::from_integer(specs[0].pins as i64);
    let mut table = Table::new(&[
        "interface",
        "pins",
        "bandwidth_gbps",
        "directions",
        "gbps_per_pin",
        "relative_per_pin",
        "pin_reduction",
    ]);
    for row in pin_table(&specs) {
        table.push(vec![
            row.name.into(),
            row.pins.into(),
            row.bandwidth_gbps.into(),
            match row.directions {
                Directions::Both => "both",
                Directions::One => "one",
            }
            .into(),
            row.gbps_per_pin.into(),
            row.relative.into(),
            (reference_pins / Exact::from_integer(row.pins as i64)).into(),
        ]);
    }
    Ok(Report::new(table))
}

fn power(s: &Scenario) -> Result<Report, CliError> {
    let p = &s.power;
    let cfg = PowerConfig {
        package_w: exact("power.package_w", p.package_w)?,
        per_ddr_ctrl_w: exact("power.per_ddr_ctrl_w", p.per_ddr_ctrl_w)?,
        per_ddr_phy_w: exact("power.per_ddr_phy_w", p.per_ddr_phy_w)?,
        per_pcie_lane_w: exact("power.per_pcie_lane_w", p.per_pcie_lane_w)?,
    };
    let mut table = Table::new(&[
        "system",
        "ddr_channels",
        "pcie_lanes",
        "package_w",
        "ddr_ctrl_w",
        "ddr_phy_w",
        "pcie_w",
        "dimm_w",
        "total_w",
        "edp_power_w",
        "cpi",
        "edp",
        "edp_ratio",
        "edp_ratio_approx",
    ]);
    let mut reference: Option<Exact> = None;
    for e in &p.systems {
        let counts = SystemCounts {
            name: e.name.clone(),
            ddr_channels: e.ddr_channels,
            pcie_lanes: e.pcie_lanes,
            dimm_power_w: exact("power.systems.dimm_power_w", e.dimm_power_w)?,
            cpi: exact("power.systems.cpi", e.cpi)?,
        };
        let b = system_power(&counts, &cfg);
        let edp_power = match e.edp_power_w {
            Some(w) => exact("power.systems.edp_power_w", w)?,
            None => b.total_w,
        };
        let result = edp(edp_power, counts.cpi);
        let base = *reference.get_or_insert(result.edp);
        table.push(vec![
            counts.name.into(),
            counts.ddr_channels.into(),
            counts.pcie_lanes.into(),
            b.package_w.into(),
            b.ddr_ctrl_w.into(),
            b.ddr_phy_w.into(),
            b.pcie_w.into(),
            b.dimm_w.into(),
            b.total_w.into(),
            result.total_power_w.into(),
            result.cpi.into(),
            result.edp.into(),
            (result.edp / base).into(),
            exact_to_f64(result.edp / base).into(),
        ]);
    }
    Ok(Report::new(table))
}
