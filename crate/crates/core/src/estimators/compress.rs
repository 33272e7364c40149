use super::series::{SnrSample, SnrSeries};
use crate::error::{Error, Result};

/// When and how much of an SNR history to fold into a single summary sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionPolicy {
    /// Storage limit `L`; reaching it triggers compression.
    pub storage_limit: usize,
    /// Optional time trigger in seconds: compress once the stored history
    /// spans at least this long.
    pub period: Option<f64>,
    /// Fraction of `L` folded into the summary, in `[0, 0.5]`.
    pub fraction: f64,
    /// Negative exponent applied to the temporal distance from the newest
    /// sample.
    pub idw_exponent: i32,
}

impl Default for CompressionPolicy {
    fn default() -> Self {
        CompressionPolicy {
            storage_limit: 10_000,
            period: None,
            fraction: 0.2,
            idw_exponent: -2,
        }
    }
}

impl CompressionPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.storage_limit < 2 {
            return Err(Error::Config(format!(
                "storage limit must be at least 2, got {}",
                self.storage_limit
            )));
        }
        if !(0.0..=0.5).contains(&self.fraction) {
            return Err(Error::Config(format!(
                "compression fraction must lie in [0, 0.5], got {}",
                self.fraction
            )));
        }
        if self.idw_exponent > -1 {
            return Err(Error::Config(format!(
                "compression exponent must be negative, got {}",
                self.idw_exponent
            )));
        }
        if let Some(p) = self.period {
            if !(p > 0.0) {
                return Err(Error::Config(format!("compression period must be positive, got {p}")));
            }
        }
        Ok(())
    }

    /// `floor(fraction * L)`, tolerant of representation error in the product.
    pub fn prefix_len(&self) -> usize {
        (self.fraction * self.storage_limit as f64 + 1e-9).floor() as usize
    }

    pub fn is_triggered(&self, series: &SnrSeries) -> bool {
        if series.len() >= self.storage_limit {
            return true;
        }
        match (self.period, series.get(0), series.last()) {
            (Some(period), Some(first), Some(last)) => last.time - first.time >= period,
            _ => false,
        }
    }
}

/// Returns `series` with its oldest `fraction * L` samples replaced by one
/// time-inverse-distance-weighted summary, or an unchanged copy when the
/// policy is not triggered.
pub fn compress(series: &SnrSeries, policy: &CompressionPolicy) -> Result<SnrSeries> {
    let mut out = series.clone();
    compress_in_place(&mut out, policy)?;
    Ok(out)
}

/// In-place variant of [`compress`]. Returns whether anything changed.
pub fn compress_in_place(series: &mut SnrSeries, policy: &CompressionPolicy) -> Result<bool> {
    policy.validate()?;
    if !policy.is_triggered(series) {
        return Ok(false);
    }
    // The newest sample anchors the temporal distances and is never folded.
    let count = policy.prefix_len().min(series.len().saturating_sub(1));
    if count < 2 {
        return Ok(false);
    }
    let newest = series.last().expect("non-empty").time;

    // Weighted mean, accumulated incrementally so equal inputs stay exact.
    let mut summary = 0.0;
    let mut total_weight = 0.0;
    for i in 0..count {
        let s = series.get(i).expect("in range");
        let weight = (newest - s.time).powi(policy.idw_exponent);
        total_weight += weight;
        summary += (weight / total_weight) * (s.snr_db - summary);
    }
    let stamp = series.get(count - 1).expect("in range").time;
    series.replace_head(count, SnrSample::new(stamp, summary));
    Ok(true)
}
