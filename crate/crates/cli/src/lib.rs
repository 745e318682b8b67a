//! Command-line front end: scenario files, flag overrides, report files.
//!
//! Exit status is 0 on success, 2 for configuration errors (bad flags,
//! malformed scenarios, out-of-range values) and 1 for runtime failures.

pub mod experiments;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use memqsim::{ConfigError, SimError};
use thiserror::Error;

pub use report::{render, Report};
pub use scenario::{Experiment, Format, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => c.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "memqsim", version, about = "Memory-system queuing simulator")]
pub struct Cli {
    /// Scenario file (TOML). Flags override its values.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub seed: Option<i64>,
    /// Write reports here instead of stdout.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Uncontended round-trip overhead of every CXL link, in ns.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub cxl_overhead_ns: Option<f64>,
    /// Print the effective scenario as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Open-loop traffic or trace replay on one topology.
    Run(RunArgs),
    /// Load-latency curve of one DDR channel.
    SweepLoad(SweepArgs),
    /// Closed-loop core against same-mean latency distributions.
    Variance,
    /// Identical traffic on two topologies.
    Compare(CompareArgs),
    /// Asymmetric versus symmetric CXL links under read-heavy traffic.
    AsymCompare(AsymArgs),
    /// Bandwidth per pin of memory interfaces.
    Pins,
    /// System power and energy-delay product.
    Power,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub topology: Option<String>,
    /// Offered load as a fraction of the topology's peak bandwidth.
    #[arg(long)]
    pub load: Option<f64>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub requests: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated utilizations in (0, 1).
    #[arg(long, value_delimiter = ',')]
    pub utilizations: Option<Vec<f64>>,
    #[arg(long)]
    pub requests: Option<u64>,
    #[arg(long)]
    pub read_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: Option<String>,
    pub b: Option<String>,
    /// Offered load as a fraction of the first topology's peak.
    #[arg(long)]
    pub load: Option<f64>,
    #[arg(long)]
    pub requests: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AsymArgs {
    /// Read demand relative to the symmetric links' read goodput.
    #[arg(long)]
    pub load: Option<f64>,
    #[arg(long)]
    pub requests: Option<u64>,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Run(_) => Experiment::Run,
            Command::SweepLoad(_) => Experiment::SweepLoad,
            Command::Variance => Experiment::Variance,
            Command::Compare(_) => Experiment::Compare,
            Command::AsymCompare(_) => Experiment::AsymCompare,
            Command::Pins => Experiment::Pins,
            Command::Power => Experiment::Power,
        }
    }

    fn apply(&self, s: &mut Scenario) {
        match self {
            Command::Run(a) => {
                if let Some(t) = &a.topology {
                    s.run.topology = t.clone();
                }
                if a.load.is_some() {
                    s.run.load = a.load;
                }
                if a.trace.is_some() {
                    s.run.trace = a.trace.clone();
                }
                if let Some(n) = a.requests {
                    s.traffic.request_count = n;
                }
            }
            Command::SweepLoad(a) => {
                if let Some(u) = &a.utilizations {
                    s.sweep.utilizations = u.clone();
                }
                if let Some(n) = a.requests {
                    s.sweep.request_count = n;
                }
                if let Some(r) = a.read_fraction {
                    s.sweep.read_fraction = r;
                }
            }
            Command::Compare(a) => {
                if let Some(x) = &a.a {
                    s.compare.a = x.clone();
                }
                if let Some(x) = &a.b {
                    s.compare.b = x.clone();
                }
                if let Some(l) = a.load {
                    s.compare.load = l;
                }
                if let Some(n) = a.requests {
                    s.traffic.request_count = n;
                }
            }
            Command::AsymCompare(a) => {
                if let Some(l) = a.load {
                    s.asym.load = l;
                }
                if let Some(n) = a.requests {
                    s.asym.request_count = n;
                }
            }
            Command::Variance | Command::Pins | Command::Power => {}
        }
    }
}

/// Builds the effective scenario from the file (if any) and the flags.
pub fn effective_scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let mut s = match (&cli.scenario, &cli.command) {
        (Some(path), cmd) => {
            let s = Scenario::load(path)?;
            if let Some(cmd) = cmd {
                if cmd.experiment() != s.experiment {
                    return Err(CliError::Config(format!(
                        "subcommand `{}` does not match the scenario's experiment `{}`",
                        cmd.experiment(),
                        s.experiment
                    )));
                }
            }
            s
        }
        (None, Some(cmd)) => Scenario::new(cmd.experiment()),
        (None, None) => return Err(CliError::Config("no experiment given: pass a subcommand or --scenario".into())),
    };
    if let Some(cmd) = &cli.command {
        cmd.apply(&mut s);
    }
    if let Some(seed) = cli.seed {
        if seed < 0 {
            return Err(ConfigError::out_of_range("seed", format!("{seed} is negative")).into());
        }
        s.seed = seed as u64;
    }
    if cli.out_dir.is_some() {
        s.out_dir = cli.out_dir.clone();
    }
    if let Some(f) = cli.format {
        s.format = f;
    }
    if cli.cxl_overhead_ns.is_some() {
        s.cxl_overhead_ns = cli.cxl_overhead_ns;
    }
    s.validate()?;
    Ok(s)
}

/// Writes the report and its attachments under `dir`; returns the paths.
pub fn write_reports(dir: &Path, scenario: &Scenario, report: &Report) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Runtime(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let name = scenario.experiment.name();
    let main = dir.join(format!("{name}.{}", scenario.format.extension()));
    std::fs::write(&main, render(scenario, report)).map_err(|e| io(&main, e))?;
    let mut written = vec![main];
    for (stem, table) in &report.attachments {
        let path = dir.join(format!("{name}-{stem}.csv"));
        std::fs::write(&path, report::render_attachment(scenario, table)).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = effective_scenario(cli)?;
    let io = |e: std::io::Error| CliError::Runtime(format!("stdout: {e}"));
    if cli.print_config {
        return out.write_all(scenario.to_toml().as_bytes()).map_err(io);
    }
    let report = experiments::execute(&scenario)?;
    match &scenario.out_dir {
        Some(dir) => {
            for path in write_reports(dir, &scenario, &report)? {
                writeln!(out, "{}", path.display()).map_err(io)?;
            }
            Ok(())
        }
        None => out.write_all(&render(&scenario, &report)).map_err(io),
    }
}

/// Runs the command line and returns the process exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
