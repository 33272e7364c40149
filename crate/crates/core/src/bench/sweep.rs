use std::io::Write;

use rayon::prelude::*;

use super::eval::{evaluate, Estimator, EvalConfig, EvalResult};
use crate::channel::{gen_trace, TraceSpec};
use crate::error::Result;
use crate::estimators::SnrSeries;

pub const BENCH_HEADER: [&str; 5] = ["dataset", "size", "estimator", "best_rate", "avg_abs_error"];

/// One evaluated (dataset, size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub dataset: String,
    pub size: usize,
    pub result: EvalResult,
}

/// Label used for a generated trace in result tables.
pub fn dataset_label(spec: &TraceSpec) -> String {
    format!("{}-seed{}", spec.kind, spec.seed)
}

/// Evaluates every (spec, size) pair. Cells run in parallel on the current
/// rayon pool; rows come back ordered by spec, then size.
pub fn sweep(
    sizes: &[usize],
    specs: &[TraceSpec],
    estimators: &[Estimator],
    cfg: &EvalConfig,
) -> Result<Vec<SweepRow>> {
    let cells: Vec<(&TraceSpec, usize)> = specs
        .iter()
        .flat_map(|spec| sizes.iter().map(move |&n| (spec, n)))
        .collect();
    cells
        .into_par_iter()
        .map(|(spec, size)| {
            let series = gen_trace(&TraceSpec {
                length: size,
                ..*spec
            })?;
            Ok(SweepRow {
                dataset: dataset_label(spec),
                size,
                result: evaluate(&series, estimators, cfg)?,
            })
        })
        .collect()
}

/// Evaluates named, already loaded series.
pub fn evaluate_datasets(
    datasets: &[(String, SnrSeries)],
    estimators: &[Estimator],
    cfg: &EvalConfig,
) -> Result<Vec<SweepRow>> {
    datasets
        .par_iter()
        .map(|(name, series)| {
            Ok(SweepRow {
                dataset: name.clone(),
                size: series.len(),
                result: evaluate(series, estimators, cfg)?,
            })
        })
        .collect()
}

/// Writes one line per (cell, estimator).
pub fn write_bench_csv<W: Write>(writer: W, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(BENCH_HEADER)?;
    for row in rows {
        for score in &row.result.scores {
            wtr.write_record([
                row.dataset.clone(),
                row.size.to_string(),
                score.estimator.to_string(),
                score.best_rate.to_string(),
                score.avg_abs_error.to_string(),
            ])?;
        }
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::TraceKind;

    #[test]
    fn single_cell() {
        let spec = TraceSpec::preset(TraceKind::PeriodWithNoise, 0, 4);
        let rows = sweep(&[300], &[spec], &Estimator::STANDARD, &EvalConfig::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].size, 300);
        assert_eq!(rows[0].dataset, "noisy-seed4");
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("dataset,size,estimator,best_rate,avg_abs_error\n"));
    }

    #[test]
    fn deterministic_and_ordered() {
        let specs = [
            TraceSpec::preset(TraceKind::RandomPeriodWithNoise, 0, 1),
            TraceSpec::preset(TraceKind::IdealPeriod, 0, 0),
        ];
        let sizes = [200, 100];
        let a = sweep(&sizes, &specs, &[Estimator::Ema, Estimator::Nnr], &EvalConfig::default()).unwrap();
        let b = sweep(&sizes, &specs, &[Estimator::Ema, Estimator::Nnr], &EvalConfig::default()).unwrap();
        assert_eq!(a, b);
        let order: Vec<_> = a.iter().map(|r| (r.dataset.as_str(), r.size)).collect();
        assert_eq!(
            order,
            [("random-seed1", 200), ("random-seed1", 100), ("ideal-seed0", 200), ("ideal-seed0", 100)]
        );
    }
}
