//! Non-overlapping batch means.

use serde::Serialize;

pub const BATCHES: usize = 20;

/// Two-sided 95% Student-t quantile with `BATCHES - 1` degrees of freedom.
const T_975_DF19: f64 = 2.093_024_054_408_263;

/// A sample mean with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn covers(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width
    }

    pub fn relative_error(&self, value: f64) -> f64 {
        (self.mean - value).abs() / value.abs()
    }

    /// Sum of two independent estimates.
    pub fn plus(&self, other: &Estimate) -> Estimate {
        Estimate {
            mean: self.mean + other.mean,
            half_width: self.half_width.hypot(other.half_width),
            samples: self.samples.min(other.samples),
        }
    }
}

/// Accumulates samples into `BATCHES` consecutive batches of a fixed size,
/// addressed by the sample's ordinal. Samples may arrive out of order; the
/// final batch absorbs the remainder.
#[derive(Debug, Clone)]
pub struct BatchAccumulator {
    batch_size: u64,
    sums: [f64; BATCHES],
    counts: [u64; BATCHES],
}

impl BatchAccumulator {
    /// `expected` is the total number of samples that will be added.
    pub fn new(expected: u64) -> Self {
        Self {
            batch_size: (expected / BATCHES as u64).max(1),
            sums: [0.0; BATCHES],
            counts: [0; BATCHES],
        }
    }

    pub fn add(&mut self, ordinal: u64, value: f64) {
        let b = ((ordinal / self.batch_size) as usize).min(BATCHES - 1);
        self.sums[b] += value;
        self.counts[b] += 1;
    }

    pub fn count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `None` until every batch holds at least one sample.
    pub fn estimate(&self) -> Option<Estimate> {
        if self.counts.contains(&0) {
            return None;
        }
        let samples = self.count();
        let mean = self.sums.iter().sum::<f64>() / samples as f64;
        let batch_means = self
            .sums
            .iter()
            .zip(&self.counts)
            .map(|(s, &c)| s / c as f64);
        let grand = batch_means.clone().sum::<f64>() / BATCHES as f64;
        let var = batch_means.map(|m| (m - grand).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        Some(Estimate {
            mean,
            half_width: T_975_DF19 * (var / BATCHES as f64).sqrt(),
            samples,
        })
    }
}

/// Batch-means estimate of an ordered sample sequence.
pub fn batch_means(samples: &[f64]) -> Option<Estimate> {
    let mut acc = BatchAccumulator::new(samples.len() as u64);
    for (i, &x) in samples.iter().enumerate() {
        acc.add(i as u64, x);
    }
    acc.estimate()
}
