//! Running sums for sample means and standard errors.

use serde::Serialize;

/// Sum and sum of squares of a real sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Accumulator {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Folds per-chunk accumulators in order.
pub fn merge_all<'a>(parts: impl IntoIterator<Item = &'a Accumulator>) -> Accumulator {
    let mut acc = Accumulator::default();
    for p in parts {
        acc.merge(p);
    }
    acc
}
