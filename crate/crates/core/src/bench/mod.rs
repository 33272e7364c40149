//! Estimator benchmarks: trace files, best-estimation scoring, size sweeps
//! and the naive/indexed/compressed NNR comparison.

mod eval;
mod optimization;
mod sweep;
mod trace_csv;

pub use eval::{evaluate, Estimator, EstimatorScore, EvalConfig, EvalResult};
pub use optimization::{
    measure_optimization, nnr_abs_errors, relative_delta_pct, write_optimization_csv,
    OptimizationRow, Variant, OPTIMIZATION_HEADER,
};
pub use sweep::{dataset_label, evaluate_datasets, sweep, write_bench_csv, SweepRow, BENCH_HEADER};
pub use trace_csv::{load_csv, read_csv, write_csv, write_series, TRACE_HEADER};
