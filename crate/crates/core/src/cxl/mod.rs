//! CXL link model: port delays, per-direction serialization, and FIFOs.

pub mod asym;
pub mod config;
pub mod link;

pub use asym::{asym_compare, asym_pair, AsymCompareConfig, AsymComparison, AsymSide};
pub use config::{message_bytes, serialize, CxlLinkConfig, READ_REQUEST_BYTES, WRITE_HEADER_BYTES};
pub use link::{DirectionState, DirectionStats, LinkState, MessageClass, Transmission};
