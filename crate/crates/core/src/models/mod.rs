//! Closed-form side models: bandwidth per pin, system power, and EDP.

pub mod pins;
pub mod power;
pub mod scalar;

pub use pins::{bandwidth_per_pin, pin_replacement_factor, pin_table, Directions, InterfaceSpec, PinRow};
pub use power::{edp, system_power, EdpResult, PowerBreakdown, PowerConfig, SystemCounts};
pub use scalar::{decimal, Scalar};

/// Rounded system power totals used for the EDP comparison, in watts.
pub const TABLE_TOTAL_POWER_W: [i64; 2] = [713, 1180];
