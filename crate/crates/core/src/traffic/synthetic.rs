use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::engine::{AccessKind, RequestId, SimRng, Tick};
use crate::error::ConfigError;

use super::core_model::MemoryBackend;

/// Latency distribution of the toy memory used for variance experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SyntheticLatencySpec {
    Fixed {
        latency_ns: f64,
    },
    /// `low_ns` with probability `p_low`, else `high_ns`.
    Bimodal {
        low_ns: f64,
        high_ns: f64,
        p_low: f64,
    },
}

impl SyntheticLatencySpec {
    pub fn fixed(latency_ns: f64) -> Self {
        SyntheticLatencySpec::Fixed { latency_ns }
    }

    pub fn bimodal(low_ns: f64, high_ns: f64, p_low: f64) -> Self {
        SyntheticLatencySpec::Bimodal { low_ns, high_ns, p_low }
    }

    /// The fixed 150 ns baseline and three 80/20 bimodal distributions with
    /// the same mean and growing spread.
    pub fn variance_set() -> Vec<SyntheticLatencySpec> {
        vec![
            Self::fixed(150.0),
            Self::bimodal(100.0, 350.0, 0.8),
            Self::bimodal(75.0, 450.0, 0.8),
            Self::bimodal(50.0, 550.0, 0.8),
        ]
    }

    pub fn mean_ns(&self) -> f64 {
        match *self {
            SyntheticLatencySpec::Fixed { latency_ns } => latency_ns,
            SyntheticLatencySpec::Bimodal { low_ns, high_ns, p_low } => p_low * low_ns + (1.0 - p_low) * high_ns,
        }
    }

    /// Population standard deviation.
    pub fn stdev_ns(&self) -> f64 {
        match *self {
            SyntheticLatencySpec::Fixed { .. } => 0.0,
            SyntheticLatencySpec::Bimodal { low_ns, high_ns, p_low } => {
                (high_ns - low_ns).abs() * (p_low * (1.0 - p_low)).sqrt()
            }
        }
    }

    /// Short row name: `fixed`, or `stdev<N>` for a bimodal spread.
    pub fn short_label(&self) -> String {
        match self {
            SyntheticLatencySpec::Fixed { .. } => "fixed".to_string(),
            SyntheticLatencySpec::Bimodal { .. } => format!("stdev{}", self.stdev_ns().round()),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SyntheticLatencySpec::Fixed { latency_ns } => format!("fixed({latency_ns})"),
            SyntheticLatencySpec::Bimodal { low_ns, high_ns, p_low } => {
                format!("bimodal({low_ns},{high_ns},{p_low})")
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            SyntheticLatencySpec::Fixed { latency_ns } if latency_ns >= 0.0 && latency_ns.is_finite() => Ok(()),
            SyntheticLatencySpec::Bimodal { low_ns, high_ns, p_low }
                if low_ns >= 0.0 && high_ns >= 0.0 && (0.0..=1.0).contains(&p_low) =>
            {
                Ok(())
            }
            _ => Err(ConfigError::out_of_range("latency", format!("invalid distribution {}", self.label()))),
        }
    }

    /// Checks the analytic mean against a declared target.
    pub fn check_mean(&self, target_ns: f64, tolerance_ns: f64) -> Result<(), ConfigError> {
        let mean = self.mean_ns();
        if (mean - target_ns).abs() > tolerance_ns {
            return Err(ConfigError::Invalid(format!("{} has mean {mean} ns, expected {target_ns} ns", self.label())));
        }
        Ok(())
    }
}

/// Draws one latency.
pub fn synthetic_latency(spec: &SyntheticLatencySpec, rng: &mut SimRng) -> Tick {
    match *spec {
        SyntheticLatencySpec::Fixed { latency_ns } => Tick::from_ns(latency_ns),
        SyntheticLatencySpec::Bimodal { low_ns, high_ns, p_low } => {
            Tick::from_ns(if rng.bernoulli(p_low) { low_ns } else { high_ns })
        }
    }
}

/// Memory that answers every request after an independent draw from a
/// [`SyntheticLatencySpec`], with unlimited concurrency.
#[derive(Debug)]
pub struct SyntheticBackend {
    spec: SyntheticLatencySpec,
    rng: SimRng,
    pending: BinaryHeap<Reverse<(Tick, RequestId)>>,
    next_id: u64,
    samples: Vec<Tick>,
}

impl SyntheticBackend {
    pub fn new(spec: SyntheticLatencySpec, rng: SimRng) -> Self {
        SyntheticBackend { spec, rng, pending: BinaryHeap::new(), next_id: 0, samples: Vec::new() }
    }

    /// Latency of every submitted read, in submission order.
    pub fn samples(&self) -> &[Tick] {
        &self.samples
    }
}

impl MemoryBackend for SyntheticBackend {
    fn submit(&mut self, now: Tick, _core: u32, _address: u64, kind: AccessKind) -> RequestId {
        let id = RequestId(self.next_id);
        self.next_id += 1;
        let latency = synthetic_latency(&self.spec, &mut self.rng);
        if kind.is_read() {
            self.samples.push(latency);
        }
        self.pending.push(Reverse((now + latency, id)));
        id
    }

    fn next_completion(&self) -> Option<Tick> {
        self.pending.peek().map(|Reverse((t, _))| *t)
    }

    fn advance_to(&mut self, until: Tick, completions: &mut Vec<(RequestId, Tick)>) {
        while let Some(&Reverse((t, id))) = self.pending.peek() {
            if t > until {
                break;
            }
            self.pending.pop();
            completions.push((id, t));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_set_moments() {
        let set = SyntheticLatencySpec::variance_set();
        let stdevs: Vec<f64> = set.iter().map(|s| s.stdev_ns()).collect();
        for (got, want) in stdevs.iter().zip([0.0, 100.0, 150.0, 200.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        for s in &set {
            s.check_mean(150.0, 1e-9).unwrap();
        }
    }

    #[test]
    fn fixed_draws_are_constant() {
        let mut rng = SimRng::new(0, 0);
        let spec = SyntheticLatencySpec::fixed(150.0);
        assert!((0..1000).all(|_| synthetic_latency(&spec, &mut rng) == Tick(150_000)));
    }

    #[test]
    fn bimodal_empirical_moments() {
        let mut rng = SimRng::new(11, 0);
        let spec = SyntheticLatencySpec::bimodal(100.0, 350.0, 0.8);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| synthetic_latency(&spec, &mut rng).as_ns()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 150.0).abs() <= 0.5, "mean {mean}");
        assert!((var.sqrt() - 100.0).abs() <= 1.0, "stdev {}", var.sqrt());
    }

    #[test]
    fn unequal_mean_is_rejected() {
        assert!(SyntheticLatencySpec::bimodal(100.0, 400.0, 0.8).check_mean(150.0, 0.5).is_err());
    }

    #[test]
    fn backend_completes_in_time_order() {
        let mut b = SyntheticBackend::new(SyntheticLatencySpec::fixed(10.0), SimRng::new(0, 0));
        let a = b.submit(Tick(5_000), 0, 0, AccessKind::Read);
        let c = b.submit(Tick(1_000), 0, 64, AccessKind::Read);
        let mut done = Vec::new();
        b.advance_to(Tick(11_000), &mut done);
        assert_eq!(done, vec![(c, Tick(11_000))]);
        assert_eq!(b.next_completion(), Some(Tick(15_000)));
        b.advance_to(Tick(20_000), &mut done);
        assert_eq!(done[1], (a, Tick(15_000)));
    }
}
