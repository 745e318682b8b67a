//! End-to-end acceptance checks. Each test prints one PASS/FAIL line with
//! the measured values, then asserts.
//!
//! Reference values are computed here from first principles (queueing
//! formulas, hand arithmetic on the stated inputs), not taken from the
//! library.

use memqsim::analysis::analyze;
use memqsim::cxl::{asym_compare, AsymCompareConfig};
use memqsim::dram::{sweep_load, DramTiming, PagePolicy, RefreshMode, SchedulerKind, SweepConfig};
use memqsim::models::{bandwidth_per_pin, edp, pin_replacement_factor, system_power, TABLE_TOTAL_POWER_W};
use memqsim::traffic::{run_variance_experiment, OpenLoopSpec, VarianceConfig};
use memqsim::{compare_topologies, run_open_loop, Exact, ExactCounts, ExactInterface, ExactPower, Topology};

fn verdict(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("memqsim").chain(args.iter().copied());
    let code = memqsim_cli::main_with(argv, &mut out, &mut err);
    assert!(code == 0, "memqsim {args:?} exited {code}: {}", String::from_utf8_lossy(&err));
    (code, out)
}

/// Single bank, FCFS, no precharge or activation limits: every read costs the
/// same fixed service time, so the controller is an M/D/1 queue.
fn md1_timing() -> DramTiming {
    DramTiming {
        subchannels: 1,
        banks_per_rank: 1,
        bank_groups: 1,
        t_rp_ns: 0.0,
        t_ras_ns: 0.0,
        t_wr_ns: 0.0,
        t_rrd_ns: 0.0,
        t_rrd_l_ns: 0.0,
        t_ccd_l_ns: 0.0,
        t_ccd_l_wr_ns: 0.0,
        t_faw_ns: 0.0,
        refresh: RefreshMode::Off,
        page_policy: PagePolicy::Closed,
        scheduler: SchedulerKind::Fcfs,
        queue_capacity: 4096,
        write_high_watermark: 4000,
        write_low_watermark: 1,
        ..DramTiming::default()
    }
}

#[test]
fn md1_queue_delay_matches_oracle() {
    let timing = md1_timing();
    // Closed-row read: activate, column access, burst, controller pipeline.
    let service_ns = timing.t_rcd_ns + timing.t_cl_ns + 16.0 * 1e3 / 4800.0 + timing.controller_pipeline_ns;
    let topology = Topology::custom("md1", None, 1, 1, timing).unwrap();
    let mut all = true;
    let mut detail = Vec::new();
    for rho in [0.3, 0.5, 0.7] {
        let start = std::time::Instant::now();
        let spec = OpenLoopSpec {
            rate_bytes_per_sec: rho * 64.0 / (service_ns * 1e-9),
            read_fraction: 1.0,
            request_count: 1_000_000,
            ..OpenLoopSpec::default()
        };
        let trace = run_open_loop(topology.clone(), &spec, 7).unwrap();
        let report = analyze(&trace, &topology, 0.1);
        let oracle = rho * service_ns / (2.0 * (1.0 - rho));
        let err = (report.breakdown.mc_queue - oracle).abs() / oracle;
        let secs = start.elapsed().as_secs_f64();
        let ok = err <= 0.05 && secs <= 30.0;
        all &= ok;
        detail.push(format!(
            "rho={rho} wq={:.3}ns oracle={oracle:.3}ns err={:.2}% {secs:.1}s",
            report.breakdown.mc_queue,
            err * 100.0
        ));
    }
    verdict("md1 oracle", all, detail.join("; "));
    assert!(all);
}

#[test]
fn load_latency_curve_shape() {
    let start = std::time::Instant::now();
    let cfg = SweepConfig { utilizations: vec![0.01, 0.5, 0.6], ..SweepConfig::default() };
    let pts = sweep_load(&cfg, 1).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (idle, half, sixty) = (&pts[0], &pts[1], &pts[2]);
    let avg50 = half.avg_ns / idle.avg_ns;
    let avg60 = sixty.avg_ns / idle.avg_ns;
    let p90_60 = sixty.p90 / idle.p90;
    let ok = avg50 >= 2.5 && avg60 >= 3.0 && p90_60 > avg60 && (35.0..=55.0).contains(&idle.avg_ns) && secs <= 120.0;
    verdict(
        "load-latency curve",
        ok,
        format!(
            "unloaded avg={:.1}ns avg ratio 50%={avg50:.2} (>=2.5) 60%={avg60:.2} (>=3.0) p90 ratio 60%={p90_60:.2} (>avg) {secs:.1}s",
            idle.avg_ns
        ),
    );
    assert!(ok);
}

fn single_read_latency_ns(trace: &std::path::Path, topology: &str, overhead: Option<&str>) -> f64 {
    let t = trace.to_str().unwrap();
    let mut args = vec!["run", "--topology", topology, "--trace", t, "--format", "json"];
    if let Some(o) = overhead {
        args.extend(["--cxl-overhead-ns", o]);
    }
    let (_, out) = cli(&args);
    let doc: serde_json::Value = serde_json::from_slice(&out).unwrap();
    doc["summary"]["report"]["latency"]["mean"].as_f64().unwrap()
}

#[test]
fn cxl_round_trip_overhead() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("one.trace");
    std::fs::write(&trace, "0 0 R 0x0\n").unwrap();
    let base = single_read_latency_ns(&trace, "ddr-baseline", None);
    let x8 = single_read_latency_ns(&trace, "coaxial-4x", None) - base;
    let x8_50 = single_read_latency_ns(&trace, "coaxial-4x", Some("50")) - base;
    let ok = (x8 - 30.0).abs() <= 3.0 && (x8_50 - 50.0).abs() <= 3.0;
    verdict(
        "cxl overhead",
        ok,
        format!("bare={base:.3}ns added={x8:.3}ns (30+-3) with 50ns knob added={x8_50:.3}ns (50+-3)"),
    );
    assert!(ok);
}

#[test]
fn topology_comparison_at_sixty_percent() {
    let start = std::time::Instant::now();
    let a = Topology::preset("ddr-baseline").unwrap();
    let b = Topology::preset("coaxial-4x").unwrap();
    let spec = OpenLoopSpec {
        rate_bytes_per_sec: 0.6 * a.peak_bytes_per_sec(),
        read_fraction: 2.0 / 3.0,
        request_count: 500_000,
        ..OpenLoopSpec::default()
    };
    let c = compare_topologies(&a, &b, &spec, 1, 0.1).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let util = c.b.utilization.aggregate;
    let avg_red = 1.0 - c.b.latency.mean / c.a.latency.mean;
    let p90_red = 1.0 - c.b.latency.p90 / c.a.latency.p90;
    let ok = (util - 0.15).abs() <= 0.02 && avg_red >= 0.40 && p90_red >= 0.55 && secs <= 300.0;
    verdict(
        "topology comparison",
        ok,
        format!(
            "coaxial-4x util={util:.3} (0.15+-0.02) avg {:.1}->{:.1}ns reduction={:.1}% (>=40%) p90 {:.1}->{:.1}ns reduction={:.1}% (>=55%) {secs:.1}s",
            c.a.latency.mean,
            c.b.latency.mean,
            avg_red * 100.0,
            c.a.latency.p90,
            c.b.latency.p90,
            p90_red * 100.0
        ),
    );
    assert!(ok);
}

#[test]
fn latency_variance_costs_ipc() {
    let loaded = run_variance_experiment(&VarianceConfig::default(), 1).unwrap();
    let means_ok = loaded.iter().all(|r| (r.mean_ns - 150.0).abs() <= 0.5);
    let monotone = loaded.windows(2).all(|w| w[1].relative_ipc < w[0].relative_ipc);
    let mut serial = VarianceConfig { instructions: 200_000, ..VarianceConfig::default() };
    serial.core.mshrs = 1;
    serial.core.miss_prob = 1.0;
    let serial_rows = run_variance_experiment(&serial, 1).unwrap();
    let ipcs: Vec<f64> = serial_rows.iter().map(|r| r.ipc).collect();
    let (lo, hi) = ipcs.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
    let flat = (hi - lo) / lo <= 0.01;
    let ok = means_ok && monotone && flat;
    let rel: Vec<String> = loaded
        .iter()
        .map(|r| match r.reference {
            Some(p) => format!("{:.3} (reference {p:.2})", r.relative_ipc),
            None => format!("{:.3}", r.relative_ipc),
        })
        .collect();
    verdict(
        "latency variance",
        ok,
        format!("relative IPC [{}]; serialized spread={:.3}%", rel.join(", "), (hi - lo) / lo * 100.0),
    );
    assert!(ok);
}

#[test]
fn asymmetric_links_favor_reads() {
    let c = asym_compare(&AsymCompareConfig::default(), 1).unwrap();
    let (s, a) = (&c.symmetric, &c.asym);
    let faster = a.report.latency.mean < s.report.latency.mean;
    let throughput = a.read_throughput_gbps >= s.read_throughput_gbps;
    let ok = faster && throughput;
    verdict(
        "asymmetric links",
        ok,
        format!(
            "offered {:.1}GB/s avg read sym={:.1}ns asym={:.1}ns read throughput sym={:.3} asym={:.3}GB/s",
            c.offered_gbps,
            s.report.latency.mean,
            a.report.latency.mean,
            s.read_throughput_gbps,
            a.read_throughput_gbps
        ),
    );
    assert!(ok);
}

#[test]
fn pin_efficiency_exact() {
    let ddr = ExactInterface::ddr5_4800();
    let x8 = ExactInterface::pcie5_x8();
    // 38.4 GB/s over 160 pins; 32 GB/s per direction over 32 pins.
    let ddr_pp = bandwidth_per_pin(&ddr);
    let x8_pp = bandwidth_per_pin(&x8);
    let ratio = x8_pp / ddr_pp;
    let factor = pin_replacement_factor(&ddr, &x8);
    let ok = ddr_pp == Exact::new(24, 100)
        && x8_pp == Exact::from_integer(1)
        && ratio >= Exact::from_integer(4)
        && factor == Exact::from_integer(5);
    verdict("pin calculator", ok, format!("ddr5={ddr_pp} x8={x8_pp} GB/s/pin ratio={ratio} replacement={factor}"));
    assert!(ok);
}

#[test]
fn power_and_edp_exact() {
    let cfg = ExactPower::default();
    let base = system_power(&ExactCounts::baseline(), &cfg).total_w;
    let coax = system_power(&ExactCounts::coaxial_4x(), &cfg).total_w;
    // 500 + 12*(0.5+0.6) + 200 and 500 + 48*(0.5+0.6) + 384*0.2 + 551.
    let base_oracle = Exact::from_integer(500) + Exact::new(12 * 11, 10) + Exact::from_integer(200);
    let coax_oracle =
        Exact::from_integer(500) + Exact::new(48 * 11, 10) + Exact::new(384 * 2, 10) + Exact::from_integer(551);
    let dist = |a: Exact, b: Exact| if a > b { a - b } else { b - a };
    let within = |x: Exact, target: i64, tol: Exact| dist(x, Exact::from_integer(target)) <= tol;
    let one = Exact::from_integer(1);
    let e_base = edp(Exact::from_integer(TABLE_TOTAL_POWER_W[0]), Exact::new(202, 100)).edp;
    let e_coax = edp(Exact::from_integer(TABLE_TOTAL_POWER_W[1]), Exact::new(133, 100)).edp;
    let ratio = e_coax / e_base;
    let ok = base == base_oracle
        && coax == coax_oracle
        && within(base, 713, one)
        && within(coax, 1180, one)
        && within(e_base, 2909, one)
        && within(e_coax, 2087, one)
        && dist(ratio, Exact::new(72, 100)) <= Exact::new(5, 1000);
    let f = |q: Exact| *q.numer() as f64 / *q.denom() as f64;
    verdict(
        "power and edp",
        ok,
        format!("totals {:.1}W {:.1}W edp {:.3} {:.3} ratio={:.4}", f(base), f(coax), f(e_base), f(e_coax), f(ratio)),
    );
    assert!(ok);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let scenarios: [&[&str]; 6] = [
        &["sweep-load", "--utilizations", "0.1,0.5", "--requests", "20000"],
        &["compare", "ddr-baseline", "coaxial-4x", "--requests", "20000"],
        &["run", "--topology", "coaxial-asym", "--load", "0.3", "--requests", "20000"],
        &["variance"],
        &["pins"],
        &["power"],
    ];
    let mut all = true;
    let mut checked = 0;
    for args in scenarios {
        for format in ["csv", "json"] {
            let mut full = args.to_vec();
            full.extend(["--format", format, "--seed", "11"]);
            let (_, first) = cli(&full);
            let (_, second) = cli(&full);
            all &= first == second && !first.is_empty();
            checked += 1;
        }
    }
    // Files written through --out-dir, attachments included. The directory
    // is part of the echoed config, so both runs use the same one.
    let dir = tempfile::tempdir().unwrap();
    let snapshot = || {
        cli(&["compare", "--requests", "20000", "--out-dir", dir.path().to_str().unwrap()]);
        let mut files: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let first = snapshot();
    let names = first.clone();
    all &= first == snapshot();
    verdict("determinism", all, format!("{checked} reports and {} files identical across two runs", names.len()));
    assert!(all);
}
