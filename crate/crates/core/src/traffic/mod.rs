//! Request streams: open-loop generators, trace replay, and a closed-loop
//! core model with a synthetic latency backend.

pub mod core_model;
pub mod open_loop;
pub mod synthetic;
pub mod trace;
pub mod variance;

pub use core_model::{run_core_model, ClosedLoopCoreSpec, CoreModelResult, MemoryBackend};
pub use open_loop::{Access, AddressPattern, ArrivalProcess, OpenLoopGenerator, OpenLoopSpec};
pub use synthetic::{synthetic_latency, SyntheticBackend, SyntheticLatencySpec};
pub use trace::{load_trace, parse_trace, TraceRecord};
pub use variance::{run_variance_experiment, VarianceConfig, VarianceRow, REFERENCE_RELATIVE_IPC};
