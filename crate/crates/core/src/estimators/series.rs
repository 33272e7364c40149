use crate::error::{Error, Result};

/// One SNR observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSample {
    /// Seconds.
    pub time: f64,
    /// Decibels.
    pub snr_db: f64,
}

impl SnrSample {
    pub fn new(time: f64, snr_db: f64) -> Self {
        SnrSample { time, snr_db }
    }
}

/// A time-ordered SNR trace.
///
/// Values and timestamps are stored column-wise so the estimators can borrow
/// the values as a plain slice. When the series has been compressed, the
/// first stored sample is the summary of the discarded history; it takes part
/// in window construction like any other sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SnrSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    has_prefix: bool,
}

impl SnrSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        SnrSeries {
            times: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
            has_prefix: false,
        }
    }

    /// Builds a series with timestamps 0, 1, 2, ... seconds.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mut series = Self::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            series.push(SnrSample::new(i as f64, v))?;
        }
        Ok(series)
    }

    pub fn from_samples<I>(samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = SnrSample>,
    {
        let mut series = Self::new();
        for s in samples {
            series.push(s)?;
        }
        Ok(series)
    }

    /// Appends a sample, enforcing finiteness and strictly increasing time.
    pub fn push(&mut self, sample: SnrSample) -> Result<()> {
        if !sample.snr_db.is_finite() {
            return Err(Error::RejectedInput(format!(
                "non-finite SNR value {}",
                sample.snr_db
            )));
        }
        if !sample.time.is_finite() || sample.time < 0.0 {
            return Err(Error::RejectedInput(format!(
                "invalid timestamp {}",
                sample.time
            )));
        }
        if let Some(&last) = self.times.last() {
            if sample.time <= last {
                return Err(Error::Ordering {
                    index: self.times.len(),
                    time: sample.time,
                    previous: last,
                });
            }
        }
        self.times.push(sample.time);
        self.values.push(sample.snr_db);
        Ok(())
    }

    /// Total number of stored samples, including a compressed summary.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of stored samples that were observed directly.
    pub fn raw_len(&self) -> usize {
        self.values.len() - usize::from(self.has_prefix)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn get(&self, index: usize) -> Option<SnrSample> {
        Some(SnrSample::new(*self.times.get(index)?, self.values[index]))
    }

    pub fn last(&self) -> Option<SnrSample> {
        self.len().checked_sub(1).and_then(|i| self.get(i))
    }

    pub fn compressed_prefix(&self) -> Option<SnrSample> {
        if self.has_prefix {
            self.get(0)
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = SnrSample> + '_ {
        self.times
            .iter()
            .zip(&self.values)
            .map(|(&time, &snr_db)| SnrSample { time, snr_db })
    }

    /// Replaces the first `count` stored samples with `summary`.
    pub(crate) fn replace_head(&mut self, count: usize, summary: SnrSample) {
        debug_assert!(count >= 1 && count < self.len());
        debug_assert!(summary.time < self.times[count]);
        self.times.splice(0..count, std::iter::once(summary.time));
        self.values.splice(0..count, std::iter::once(summary.snr_db));
        self.has_prefix = true;
    }
}

/// Arithmetic mean computed incrementally; exact when every value is equal.
pub(crate) fn incremental_mean<I: IntoIterator<Item = f64>>(values: I) -> Option<f64> {
    let mut mean = 0.0;
    let mut count = 0u64;
    for v in values {
        count += 1;
        mean += (v - mean) / count as f64;
    }
    (count > 0).then_some(mean)
}
