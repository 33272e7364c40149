use super::compress::{compress_in_place, CompressionPolicy};
use super::index::{QuantizedIndex, DEFAULT_SCALE};
use super::nnr::{nnr_search, nnr_search_indexed, NnrConfig, NnrOutcome};
use super::series::{SnrSample, SnrSeries};
use crate::error::Result;

/// Online NNR estimator: an SNR history, its quantized index, and an optional
/// compression policy applied after every append.
#[derive(Debug, Clone)]
pub struct NnrPredictor {
    cfg: NnrConfig,
    series: SnrSeries,
    index: QuantizedIndex,
    policy: Option<CompressionPolicy>,
    compressions: u64,
}

impl NnrPredictor {
    pub fn new(cfg: NnrConfig) -> Result<Self> {
        Self::with_scale(cfg, DEFAULT_SCALE)
    }

    pub fn with_scale(cfg: NnrConfig, scale: u32) -> Result<Self> {
        cfg.validate()?;
        Ok(NnrPredictor {
            cfg,
            series: SnrSeries::new(),
            index: QuantizedIndex::new(scale)?,
            policy: None,
            compressions: 0,
        })
    }

    pub fn with_compression(mut self, policy: CompressionPolicy) -> Result<Self> {
        policy.validate()?;
        self.policy = Some(policy);
        Ok(self)
    }

    pub fn config(&self) -> &NnrConfig {
        &self.cfg
    }

    pub fn series(&self) -> &SnrSeries {
        &self.series
    }

    pub fn index(&self) -> &QuantizedIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// How many times the history has been compressed.
    pub fn compressions(&self) -> u64 {
        self.compressions
    }

    pub fn can_predict(&self) -> bool {
        self.series.len() >= self.cfg.min_history()
    }

    pub fn push(&mut self, sample: SnrSample) -> Result<()> {
        self.series.push(sample)?;
        self.index.insert(sample.snr_db, self.series.len() - 1)?;
        if let Some(policy) = &self.policy {
            if compress_in_place(&mut self.series, policy)? {
                self.index = QuantizedIndex::from_values(self.series.values(), self.index.scale())?;
                self.compressions += 1;
            }
        }
        Ok(())
    }

    pub fn search(&self) -> Result<NnrOutcome> {
        nnr_search_indexed(&self.index, self.series.values(), &self.cfg)
    }

    pub fn predict(&self) -> Result<f64> {
        self.search().map(|o| o.value)
    }

    /// Exhaustive search over the same history, without the index.
    pub fn search_naive(&self) -> Result<NnrOutcome> {
        nnr_search(self.series.values(), &self.cfg)
    }
}
