use crate::error::{Error, Result};

/// Streaming mean and variance over SNR samples.
///
/// Holds the count `i`, the mean `M_i` and the running sum of squared
/// deviations `S_i`:
///
/// ```text
/// M_i = (i-1)/i * M_{i-1} + x_i / i
/// S_i = S_{i-1} + (x_i - M_i)(x_i - M_{i-1})
/// V   = S_i / (i - 1)
/// ```
///
/// The mean update is evaluated as `M_{i-1} + (x_i - M_{i-1}) / i`, the same
/// quantity rearranged so a constant stream keeps an exactly constant mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    sum_sq: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Result<Self> {
        let mut stats = Self::new();
        for v in values {
            stats.update(v)?;
        }
        Ok(stats)
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::RejectedInput(format!("non-finite sample {x}")));
        }
        self.count += 1;
        if self.count == 1 {
            self.mean = x;
            self.sum_sq = 0.0;
            return Ok(());
        }
        let previous_mean = self.mean;
        self.mean = previous_mean + (x - previous_mean) / self.count as f64;
        self.sum_sq += (x - self.mean) * (x - previous_mean);
        // Rounding can push a zero sum a hair negative.
        if self.sum_sq < 0.0 {
            self.sum_sq = 0.0;
        }
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    /// Sample variance `S_i / (i - 1)`.
    pub fn variance(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::UndefinedVariance { count: self.count });
        }
        Ok(self.sum_sq / (self.count - 1) as f64)
    }
}

/// The MEAN baseline: predicts the next sample as the running mean.
pub fn mean_predict(stats: &RunningStats) -> Result<f64> {
    stats
        .mean()
        .ok_or_else(|| Error::Prediction("mean of an empty history".into()))
}
