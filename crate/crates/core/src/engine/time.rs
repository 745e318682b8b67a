use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Simulation time in integer picoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tick(pub u64);

impl Tick {
    pub const ZERO: Tick = Tick(0);
    pub const MAX: Tick = Tick(u64::MAX);

    pub const PS_PER_NS: u64 = 1_000;

    #[inline]
    pub const fn from_ps(ps: u64) -> Self {
        Tick(ps)
    }

    /// Converts a nanosecond value to the nearest picosecond.
    ///
    /// Values with at most three fractional digits convert exactly.
    #[inline]
    pub fn from_ns(ns: f64) -> Self {
        debug_assert!(ns >= 0.0 && ns.is_finite(), "negative or non-finite time {ns}");
        Tick((ns * Self::PS_PER_NS as f64).round() as u64)
    }

    /// Rounds up to the next whole picosecond.
    #[inline]
    pub fn from_ns_ceil(ns: f64) -> Self {
        debug_assert!(ns >= 0.0 && ns.is_finite(), "negative or non-finite time {ns}");
        // Guard against representation noise such as 2000.0000000002.
        let ps = ns * Self::PS_PER_NS as f64;
        let rounded = ps.round();
        if (ps - rounded).abs() < 1e-6 {
            Tick(rounded as u64)
        } else {
            Tick(ps.ceil() as u64)
        }
    }

    #[inline]
    pub const fn ps(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn as_ns(self) -> f64 {
        self.0 as f64 / Self::PS_PER_NS as f64
    }

    #[inline]
    pub fn saturating_sub(self, rhs: Tick) -> Tick {
        Tick(self.0.saturating_sub(rhs.0))
    }
}

impl Add for Tick {
    type Output = Tick;
    #[inline]
    fn add(self, rhs: Tick) -> Tick {
        Tick(self.0 + rhs.0)
    }
}

impl AddAssign for Tick {
    #[inline]
    fn add_assign(&mut self, rhs: Tick) {
        self.0 += rhs.0;
    }
}

impl Sub for Tick {
    type Output = Tick;
    #[inline]
    fn sub(self, rhs: Tick) -> Tick {
        Tick(self.0.checked_sub(rhs.0).unwrap_or_else(|| panic!("tick underflow: {} - {}", self.0, rhs.0)))
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ps", self.0)
    }
}
