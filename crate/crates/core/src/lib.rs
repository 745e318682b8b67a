//! Discrete-event simulator of server memory systems: DDR channels with
//! controller queuing, CXL-attached memory paths, and the closed-form pin and
//! power models that go with them.
//!
//! Simulated time is integer picoseconds ([`Tick`]). Statistics and the side
//! models are generic over their number type; the aliases below fix the
//! common choices.

pub mod analysis;
pub mod cxl;
pub mod dram;
pub mod engine;
pub mod error;
pub mod models;
pub mod system;
pub mod topology;
pub mod traffic;

pub use engine::{AccessKind, Direction, Event, EventKind, EventQueue, MemoryRequest, RequestId, SimRng, Tick};
pub use error::{ConfigError, Result, SimError};
pub use system::{run_open_loop, MemorySystem, RunUntil, SimulationTrace, Source};
pub use topology::{compare_topologies, MemoryPath, Topology, TopologyComparison};

/// Exact rational used by the closed-form models.
pub type Exact = num_rational::Ratio<i64>;

pub type Summary = analysis::StatsSummary<f64>;
pub type Summary32 = analysis::StatsSummary<f32>;
pub type Interface = models::InterfaceSpec<f64>;
pub type ExactInterface = models::InterfaceSpec<Exact>;
pub type Power = models::PowerConfig<f64>;
pub type ExactPower = models::PowerConfig<Exact>;
pub type Counts = models::SystemCounts<f64>;
pub type ExactCounts = models::SystemCounts<Exact>;

/// Crate version, echoed into report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
