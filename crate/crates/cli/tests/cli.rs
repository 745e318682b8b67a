use memqsim_cli::{main_with, Experiment, Scenario};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("memqsim").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// CSV body without the `#` metadata lines.
fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("report is valid JSON")
}

fn scenario_file(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep-load"));
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn unknown_flag_is_a_config_error() {
    let (code, _, err) = run(&["pins", "--bogus"]);
    assert_eq!(code, 2);
    assert!(err.contains("--bogus"));
}

#[test]
fn no_experiment_is_a_config_error() {
    let (code, _, err) = run(&[]);
    assert_eq!(code, 2);
    assert!(err.contains("no experiment"));
}

#[test]
fn sweep_load_rows_and_columns() {
    let (code, out, err) = run(&["sweep-load", "--utilizations", "0.1,0.3,0.5,0.6", "--requests", "20000"]);
    assert_eq!(code, 0, "{err}");
    let lines = body(&out);
    assert_eq!(lines[0], "util,avg_ns,p50,p90,p99");
    assert_eq!(lines.len(), 5);
    let utils: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(utils, ["0.1", "0.3", "0.5", "0.6"]);
    for l in &lines[1..] {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[2] <= v[3] && v[3] <= v[4], "percentiles out of order: {l}");
    }
}

#[test]
fn csv_header_carries_seed_and_config() {
    let (_, out, _) = run(&["pins", "--seed", "9"]);
    let meta: Vec<&str> = out.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(meta[0].starts_with("# tool: memqsim "));
    assert!(meta.contains(&"# experiment: pins"));
    assert!(meta.contains(&"# seed: 9"));
    assert!(meta.iter().any(|l| l.starts_with("# prng: ChaCha8")));
    assert!(meta.iter().any(|l| l.trim() == "#   seed = 9"));
}

#[test]
fn empty_scenario_needs_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(&dir, "");
    let (code, _, err) = run(&["--scenario", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("missing field `experiment`"), "{err}");
}

#[test]
fn negative_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(&dir, "experiment = \"pins\"\nseed = -1\n");
    let (code, _, err) = run(&["--scenario", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("seed out of range"), "{err}");
    let (code, _, err) = run(&["pins", "--seed", "-1"]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn unknown_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(&dir, "experiment = \"sweep-load\"\n\n[sweep]\nutilisations = [0.1]\n");
    let (code, _, err) = run(&["--scenario", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("unknown field `utilisations`"), "{err}");
}

#[test]
fn out_of_range_values_are_config_errors() {
    for args in [
        vec!["sweep-load", "--utilizations", "1.5"],
        vec!["compare", "--load", "-0.2"],
        vec!["run", "--topology", "no-such-topology"],
        vec!["pins", "--cxl-overhead-ns", "-5"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
}

#[test]
fn missing_scenario_file() {
    let (code, _, err) = run(&["--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot read scenario"));
}

#[test]
fn missing_trace_is_a_runtime_error() {
    let (code, _, _) = run(&["run", "--trace", "/nonexistent/trace.txt"]);
    assert_eq!(code, 1);
}

#[test]
fn subcommand_must_match_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(&dir, "experiment = \"pins\"\n");
    let (code, _, err) = run(&["--scenario", &path, "power"]);
    assert_eq!(code, 2);
    assert!(err.contains("does not match"));
}

#[test]
fn scenario_round_trips() {
    for e in [
        Experiment::Run,
        Experiment::SweepLoad,
        Experiment::Variance,
        Experiment::Compare,
        Experiment::AsymCompare,
        Experiment::Pins,
        Experiment::Power,
    ] {
        let s = Scenario::new(e);
        let back = Scenario::parse(&s.to_toml(), "round-trip").unwrap();
        assert_eq!(back, s);
    }
}

#[test]
fn printed_config_reloads() {
    let (code, out, _) = run(&["compare", "--load", "0.4", "--seed", "5", "--print-config"]);
    assert_eq!(code, 0);
    let s = Scenario::parse(&out, "printed").unwrap();
    assert_eq!(s.seed, 5);
    assert_eq!(s.compare.load, 0.4);
    assert_eq!(s.experiment, Experiment::Compare);
}

#[test]
fn scenario_flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(
        &dir,
        "experiment = \"sweep-load\"\nseed = 3\n[sweep]\nutilizations = [0.2]\nrequest_count = 5000\n",
    );
    let (_, out, _) = run(&["--scenario", &path, "--seed", "4", "--print-config"]);
    let s = Scenario::parse(&out, "printed").unwrap();
    assert_eq!(s.seed, 4);
    assert_eq!(s.sweep.utilizations, vec![0.2]);
}

#[test]
fn variance_reports_four_backends() {
    let (code, out, err) = run(&["variance", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    let rows = v["table"]["rows"].as_array().unwrap();
    let labels: Vec<&str> = rows.iter().map(|r| r[0].as_str().unwrap()).collect();
    assert_eq!(labels, ["fixed", "stdev100", "stdev150", "stdev200"]);
    assert_eq!(rows[0][5].as_f64().unwrap(), 1.0);
}

#[test]
fn compare_shrinks_utilization() {
    let (code, out, err) = run(&["compare", "--requests", "50000", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["schema"], "memqsim-report/1");
    let rows = v["table"]["rows"].as_array().unwrap();
    assert_eq!(rows[0][0], "ddr-baseline");
    assert_eq!(rows[1][0], "coaxial-4x");
    let util_a = rows[0][3].as_f64().unwrap();
    let util_b = rows[1][3].as_f64().unwrap();
    assert!((util_a - 0.6).abs() < 0.02, "{util_a}");
    assert!((util_b - 0.15).abs() < 0.02, "{util_b}");
    assert!(v["summary"]["avg_reduction"].as_f64().unwrap() > 0.0);
}

#[test]
fn out_dir_receives_report_and_cdfs() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("reports");
    let target_s = target.display().to_string();
    let (code, out, err) = run(&["compare", "--requests", "5000", "--out-dir", &target_s]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 3);
    for name in ["compare.csv", "compare-cdf-ddr-baseline.csv", "compare-cdf-coaxial-4x.csv"] {
        let text = std::fs::read_to_string(target.join(name)).unwrap();
        assert!(text.starts_with("# tool: memqsim"), "{name}");
    }
    let cdf = std::fs::read_to_string(target.join("compare-cdf-coaxial-4x.csv")).unwrap();
    let rows = body(&cdf);
    assert_eq!(rows[0], "latency_ns,cumulative_fraction");
    assert!(rows.last().unwrap().ends_with(",1"));
}

#[test]
fn trace_replay_through_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.trace");
    std::fs::write(&trace, "# tick core kind address\n0 0 R 0x0\n100 0 W 0x40\n200 0 R 0x80\n").unwrap();
    let (code, out, err) = run(&["run", "--trace", &trace.display().to_string(), "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["summary"]["report"]["injected"], 3);
}

#[test]
fn pins_and_power_tables() {
    let (_, out, _) = run(&["pins"]);
    let lines = body(&out);
    assert!(lines[1].starts_with("DDR5-4800,160,38.4,both,0.24,1,1"), "{}", lines[1]);
    let (_, out, _) = run(&["power"]);
    let lines = body(&out);
    assert_eq!(lines.len(), 3);
    assert!(lines[2].contains(",5218255/7273313,0.717452"), "{}", lines[2]);
}

#[test]
fn text_format_aligns_columns() {
    let (code, out, _) = run(&["pins", "--format", "text"]);
    assert_eq!(code, 0);
    let lines = body(&out);
    assert!(lines[0].starts_with("interface  pins"));
    let widths: Vec<usize> = lines.iter().map(|l| l.len()).collect();
    assert!(widths.windows(2).all(|w| w[0] == w[1]), "{lines:#?}");
}

#[test]
fn partial_traffic_table_keeps_scenario_defaults() {
    let s = Scenario::parse("experiment = \"run\"\n[traffic]\nrequest_count = 10\n", "partial").unwrap();
    let full = Scenario::new(Experiment::Run);
    assert_eq!(s.traffic.request_count, 10);
    assert_eq!(s.traffic.read_fraction, full.traffic.read_fraction);
    let err = Scenario::parse("experiment = \"run\"\n[traffic]\nread_fracton = 0.5\n", "typo").unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn shipped_scenarios_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn custom_topology_link_preset() {
    let base = "experiment = \"run\"\n[custom_topology]\nname = \"two-asym\"\npaths = 2\nchannels_per_path = 2\n";
    let s = Scenario::parse(&format!("{base}link_preset = \"x8-asym\"\n"), "preset").unwrap();
    let t = s.topology("two-asym").unwrap();
    assert_eq!((t.link_count(), t.channel_count()), (2, 4));
    assert_eq!(t.paths[0].link.as_ref().unwrap().tx_pins, 12);
    let both = format!("{base}link_preset = \"x8\"\n[custom_topology.link]\nname = \"mine\"\n");
    assert!(Scenario::parse(&both, "both").is_err());
    assert!(Scenario::parse(&format!("{base}link_preset = \"x9\"\n"), "unknown").is_err());
}
