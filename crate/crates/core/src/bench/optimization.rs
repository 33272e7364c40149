use std::io::Write;
use std::time::Instant;

use crate::channel::{gen_trace, TraceSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    nnr_search, CompressionPolicy, NnrConfig, NnrPredictor, QuantizedIndex, SnrSeries, DEFAULT_SCALE,
};

pub const OPTIMIZATION_HEADER: [&str; 6] = [
    "n",
    "variant",
    "wall_ns",
    "comparisons",
    "stored_samples",
    "error_delta_pct",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Naive,
    Indexed,
    Compressed,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Naive => "naive",
            Variant::Indexed => "indexed",
            Variant::Compressed => "compressed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationRow {
    pub n: usize,
    pub variant: Variant,
    /// Wall time of one prediction over the full history.
    pub wall_ns: u128,
    /// Window distances evaluated by that prediction.
    pub comparisons: u64,
    pub stored_samples: usize,
    /// Relative change in mean absolute one-step error against the naive
    /// search, in percent.
    pub error_delta_pct: f64,
}

/// One-step absolute errors of an online NNR predictor, for the samples at
/// positions `from..series.len()`.
pub fn nnr_abs_errors(
    series: &SnrSeries,
    cfg: &NnrConfig,
    policy: Option<&CompressionPolicy>,
    from: usize,
) -> Result<Vec<f64>> {
    let mut predictor = NnrPredictor::new(*cfg)?;
    if let Some(policy) = policy {
        predictor = predictor.with_compression(*policy)?;
    }
    let start = from.max(cfg.min_history());
    let mut errors = Vec::with_capacity(series.len().saturating_sub(start));
    for (t, sample) in series.iter().enumerate() {
        if t >= start {
            errors.push((predictor.predict()? - sample.snr_db).abs());
        }
        predictor.push(sample)?;
    }
    Ok(errors)
}

/// Relative difference `(candidate - reference) / reference` in percent;
/// zero when both are zero.
pub fn relative_delta_pct(candidate: f64, reference: f64) -> f64 {
    if candidate == reference {
        0.0
    } else {
        100.0 * (candidate - reference) / reference
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Compares naive, indexed and compressed NNR on traces of each length.
///
/// Timing and comparison counts come from a single prediction over the full
/// trace. Error deltas use the last `eval_steps` one-step predictions.
pub fn measure_optimization(
    n_values: &[usize],
    cfg: &NnrConfig,
    policy: &CompressionPolicy,
    trace: &TraceSpec,
    eval_steps: usize,
) -> Result<Vec<OptimizationRow>> {
    cfg.validate()?;
    policy.validate()?;
    if eval_steps == 0 {
        return Err(Error::Config("eval_steps must be positive".into()));
    }
    let mut rows = Vec::with_capacity(3 * n_values.len());
    for &n in n_values {
        if n <= cfg.min_history() {
            return Err(Error::Config(format!(
                "n = {n} is too short for NNR window {}",
                cfg.window_m
            )));
        }
        let series = gen_trace(&TraceSpec { length: n, ..*trace })?;
        let values = series.values();
        let from = n.saturating_sub(eval_steps);

        let start = Instant::now();
        let naive = nnr_search(values, cfg)?;
        let naive_ns = start.elapsed().as_nanos();

        let index = QuantizedIndex::from_values(values, DEFAULT_SCALE)?;
        let start = Instant::now();
        let indexed = crate::estimators::nnr_search_indexed(&index, values, cfg)?;
        let indexed_ns = start.elapsed().as_nanos();

        let eval_from = from.max(cfg.min_history());
        let naive_errors: Vec<f64> = (eval_from..n)
            .map(|t| nnr_search(&values[..t], cfg).map(|o| (o.value - values[t]).abs()))
            .collect::<Result<_>>()?;
        let indexed_errors = nnr_abs_errors(&series, cfg, None, from)?;
        let reference = mean(&naive_errors);

        let mut compressed = NnrPredictor::new(*cfg)?.with_compression(*policy)?;
        let mut compressed_errors = Vec::with_capacity(n - eval_from);
        for (t, sample) in series.iter().enumerate() {
            if t >= eval_from {
                compressed_errors.push((compressed.predict()? - sample.snr_db).abs());
            }
            compressed.push(sample)?;
        }
        let start = Instant::now();
        let compressed_outcome = compressed.search()?;
        let compressed_ns = start.elapsed().as_nanos();

        rows.push(OptimizationRow {
            n,
            variant: Variant::Naive,
            wall_ns: naive_ns,
            comparisons: naive.comparisons,
            stored_samples: n,
            error_delta_pct: 0.0,
        });
        rows.push(OptimizationRow {
            n,
            variant: Variant::Indexed,
            wall_ns: indexed_ns,
            comparisons: indexed.comparisons,
            stored_samples: n,
            error_delta_pct: relative_delta_pct(mean(&indexed_errors), reference),
        });
        rows.push(OptimizationRow {
            n,
            variant: Variant::Compressed,
            wall_ns: compressed_ns,
            comparisons: compressed_outcome.comparisons,
            stored_samples: compressed.len(),
            error_delta_pct: relative_delta_pct(mean(&compressed_errors), reference),
        });
    }
    Ok(rows)
}

pub fn write_optimization_csv<W: Write>(writer: W, rows: &[OptimizationRow]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(OPTIMIZATION_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.n.to_string(),
            r.variant.name().to_string(),
            r.wall_ns.to_string(),
            r.comparisons.to_string(),
            r.stored_samples.to_string(),
            r.error_delta_pct.to_string(),
        ])?;
    }
    wtr.flush()
}
