use num_traits::Float;
use serde::Serialize;

use crate::engine::Tick;

/// Upper edge of the last regular histogram bin, in ns.
pub const HISTOGRAM_CAP_NS: usize = 2_000;

/// Distribution summary of a latency sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsSummary<T> {
    pub count: u64,
    pub mean: T,
    pub p50: T,
    pub p90: T,
    pub p99: T,
    /// Population standard deviation.
    pub stdev: T,
    pub min: T,
    pub max: T,
    /// Counts per 1 ns bin `[i, i+1)`; the final entry collects everything at
    /// or beyond [`HISTOGRAM_CAP_NS`].
    #[serde(skip)]
    pub histogram: Vec<u64>,
}

impl<T: Float> StatsSummary<T> {
    /// The summary of no samples: zero count and zero moments.
    pub fn empty() -> Self {
        let z = T::zero();
        StatsSummary { count: 0, mean: z, p50: z, p90: z, p99: z, stdev: z, min: z, max: z, histogram: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn variance(&self) -> T {
        self.stdev * self.stdev
    }
}

/// Nearest-rank percentile of an ascending slice; `per_mille` in 1..=1000.
pub fn nearest_rank<T: Copy>(sorted: &[T], per_mille: u64) -> T {
    let n = sorted.len() as u64;
    let rank = (per_mille * n).div_ceil(1000).max(1);
    sorted[(rank - 1) as usize]
}

/// Summarizes latencies given in ns. Moments are accumulated in sorted
/// order so the result does not depend on sample order.
pub fn summarize<T: Float>(samples: &[T]) -> StatsSummary<T> {
    if samples.is_empty() {
        return StatsSummary::empty();
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("latency samples are never NaN"));
    let n = T::from(sorted.len()).expect("count fits the scalar");
    let mean = sorted.iter().fold(T::zero(), |acc, &x| acc + x) / n;
    let var = sorted.iter().fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean)) / n;
    let mut histogram = vec![0u64; HISTOGRAM_CAP_NS + 1];
    for &x in &sorted {
        let bin = x.to_usize().unwrap_or(0).min(HISTOGRAM_CAP_NS);
        histogram[bin] += 1;
    }
    StatsSummary {
        count: sorted.len() as u64,
        mean,
        p50: nearest_rank(&sorted, 500),
        p90: nearest_rank(&sorted, 900),
        p99: nearest_rank(&sorted, 990),
        stdev: var.sqrt(),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        histogram,
    }
}

/// Summarizes tick latencies, converting to ns.
pub fn summarize_ticks(samples: &[Tick]) -> StatsSummary<f64> {
    let ns: Vec<f64> = samples.iter().map(|t| t.as_ns()).collect();
    summarize(&ns)
}
