//! Command-line front end: trace generation, one-shot estimation, estimator
//! benchmarks and simulation grids. Every file-producing run also writes a
//! key=value manifest that `replay` turns back into the same output.

mod jobs;
mod kv;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use jobs::{BenchJob, GenTraceJob, Job, OptimizationJob, SimulateJob};
pub use kv::{parse_kv, parse_u64_list, parse_usize_list};
pub use output::{default_manifest_path, execute, write_all_or_nothing, RunManifest, VERSION};

use crate::bench::load_csv;
use crate::error::{Error, Result};
use crate::estimators::{
    mean_predict, nnr_search_indexed, ArModel, EmaState, NnrConfig, QuantizedIndex, RunningStats,
    DEFAULT_EMA_ALPHA, DEFAULT_FIT_WINDOW, DEFAULT_SCALE,
};

/// Environment variable capping worker threads; 0 runs serially.
pub const THREADS_ENV: &str = "AQUANNR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "aquannr", version, about = "SNR prediction and underwater routing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic SNR trace as CSV.
    GenTrace(GenTraceArgs),
    /// Predict the next sample of a trace.
    Estimate(EstimateArgs),
    /// Compare estimators, or measure NNR optimizations with --optimization.
    Bench(BenchArgs),
    /// Run a protocol x node count x seed simulation grid.
    Simulate(SimulateArgs),
    /// Re-run a manifest written by an earlier run.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Manifest path; defaults to the output path plus `.manifest`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenTraceArgs {
    /// ideal, noisy or random.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    length: Option<usize>,
    /// Period in samples.
    #[arg(long)]
    period: Option<usize>,
    /// Fluctuation amplitude, dB.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Mean level, dB.
    #[arg(long)]
    base: Option<f64>,
    /// Gaussian noise deviation, dB.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Relative spread of each cycle's period.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Trace CSV with header time_s,snr_db.
    #[arg(long)]
    input: PathBuf,
    /// mean, ema, ar or nnr.
    #[arg(long)]
    method: String,
    /// AR order.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// AR fitting window.
    #[arg(long, default_value_t = DEFAULT_FIT_WINDOW)]
    fit_window: usize,
    /// EMA smoothing factor.
    #[arg(long, default_value_t = DEFAULT_EMA_ALPHA)]
    alpha: f64,
    /// NNR window length.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// NNR neighbor count.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// List the NNR neighbors behind the prediction.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// key=value file with bench settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Measure naive, indexed and compressed NNR instead of comparing estimators.
    #[arg(long)]
    optimization: bool,
    /// Generated trace kinds, e.g. ideal,noisy,random.
    #[arg(long)]
    kinds: Option<String>,
    /// Trace kind for --optimization.
    #[arg(long)]
    kind: Option<String>,
    /// Trace lengths, e.g. 1000:10000:1000.
    #[arg(long)]
    sizes: Option<String>,
    /// Seeds for noisy kinds, e.g. 0:9.
    #[arg(long)]
    seeds: Option<String>,
    /// Seed for --optimization.
    #[arg(long)]
    seed: Option<u64>,
    /// Trace CSV to evaluate; repeatable.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    /// Estimators, e.g. mean,ema,ar2,ar5,nnr.
    #[arg(long)]
    estimators: Option<String>,
    /// Any other setting as key=value; repeatable.
    #[arg(long = "set")]
    sets: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// key=value file with simulation settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Protocols, e.g. dbcar,dbr,carp.
    #[arg(long)]
    protocols: Option<String>,
    /// Node counts, e.g. 100:200:10.
    #[arg(long)]
    nodes: Option<String>,
    /// Seeds, e.g. 0:9.
    #[arg(long)]
    seeds: Option<String>,
    /// Any configuration key as key=value; repeatable.
    #[arg(long = "set")]
    sets: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the new manifest.
    #[arg(long = "new-manifest")]
    new_manifest: Option<PathBuf>,
}

/// Collects settings: file first, then flags in order, later values winning.
struct Settings(Vec<(String, String)>);

impl Settings {
    fn from_file(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Settings(Vec::new())),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Ok(Settings(parse_kv(&text, p)?))
            }
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.retain(|(k, _)| k != key);
        self.0.push((key.to_string(), value.to_string()));
    }

    fn set_opt(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    fn apply_assignments(&mut self, sets: &[String]) -> Result<()> {
        for s in sets {
            let (k, v) = kv::parse_assignment(s)?;
            self.set(&k, v);
        }
        Ok(())
    }
}

fn manifest_path(output: &OutputArgs) -> PathBuf {
    output
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&output.out))
}

/// Rayon pool honoring [`THREADS_ENV`]; `None` uses the global pool.
fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("{THREADS_ENV} must be a non-negative integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map(Some)
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

fn run_job(job: &Job, manifest: &Path) -> Result<()> {
    match thread_pool()? {
        Some(pool) => pool.install(|| execute(job, manifest)),
        None => execute(job, manifest),
    }
}

fn estimate(args: &EstimateArgs, stdout: &mut dyn Write) -> Result<()> {
    let series = load_csv(&args.input)?;
    let values = series.values();
    let too_short = |need: usize| {
        Error::Usage(format!(
            "method '{}' needs at least {need} samples, the trace has {}",
            args.method,
            values.len()
        ))
    };
    let mut lines = vec![
        format!("method = {}", args.method),
        format!("samples = {}", values.len()),
    ];
    let prediction = match args.method.as_str() {
        "mean" => {
            let mut stats = RunningStats::new();
            for &v in values {
                stats.update(v)?;
            }
            mean_predict(&stats)?
        }
        "ema" => {
            let mut ema = EmaState::new(args.alpha).map_err(|e| Error::Usage(e.to_string()))?;
            for &v in values {
                ema.update(v)?;
            }
            ema.prediction().ok_or_else(|| too_short(1))?
        }
        "ar" => {
            if args.order == 0 {
                return Err(Error::Usage("AR order must be at least 1".into()));
            }
            if values.len() < args.order + 2 {
                return Err(too_short(args.order + 2));
            }
            let fit = ArModel::fit(values, args.order, args.fit_window)?;
            lines.push(format!("degenerate_fit = {}", fit.degenerate));
            fit.model.predict(values)?
        }
        "nnr" => {
            let cfg = NnrConfig {
                window_m: args.window,
                k: args.k,
                ..NnrConfig::default()
            };
            cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
            if values.len() < cfg.min_history() {
                return Err(too_short(cfg.min_history()));
            }
            let index = QuantizedIndex::from_values(values, DEFAULT_SCALE)?;
            let outcome = nnr_search_indexed(&index, values, &cfg)?;
            if args.trace {
                lines.push(format!("comparisons = {}", outcome.comparisons));
                for n in &outcome.neighbors {
                    lines.push(format!(
                        "neighbor start={} distance={} label={}",
                        n.start, n.distance, n.label
                    ));
                }
            }
            outcome.value
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown method '{other}' (valid: mean, ema, ar, nnr)"
            )))
        }
    };
    lines.insert(2, format!("prediction = {prediction}"));
    for line in lines {
        writeln!(stdout, "{line}").map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

fn gen_trace_job(a: &GenTraceArgs) -> Result<Job> {
    let mut s = Settings(Vec::new());
    s.set_opt("kind", a.kind.as_ref());
    s.set_opt("length", a.length);
    s.set_opt("period", a.period);
    s.set_opt("amplitude", a.amplitude);
    s.set_opt("base", a.base);
    s.set_opt("noise_sigma", a.noise_sigma);
    s.set_opt("jitter", a.jitter);
    s.set_opt("seed", a.seed);
    Job::from_params("gen-trace", a.output.out.clone(), s.0)
}

fn bench_job(a: &BenchArgs) -> Result<Job> {
    let mut s = Settings::from_file(a.config.as_deref())?;
    if a.optimization {
        s.set("mode", "optimization");
    }
    s.set_opt("kinds", a.kinds.as_ref());
    s.set_opt("kind", a.kind.as_ref());
    s.set_opt("sizes", a.sizes.as_ref());
    s.set_opt("seeds", a.seeds.as_ref());
    s.set_opt("seed", a.seed);
    if !a.inputs.is_empty() {
        let joined = a.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
        s.set("inputs", joined);
    }
    s.set_opt("estimators", a.estimators.as_ref());
    s.apply_assignments(&a.sets)?;
    Job::from_params("bench", a.output.out.clone(), s.0)
}

fn simulate_job(a: &SimulateArgs) -> Result<Job> {
    let mut s = Settings::from_file(a.config.as_deref())?;
    s.apply_assignments(&a.sets)?;
    s.set_opt("protocols", a.protocols.as_ref());
    s.set_opt("node_counts", a.nodes.as_ref());
    s.set_opt("seeds", a.seeds.as_ref());
    Job::from_params("simulate", a.output.out.clone(), s.0)
}

/// Parses `args` (program name first) and runs the command. Normal output
/// goes to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            write!(stdout, "{e}").map_err(|err| Error::io("<stdout>", err))?;
            return Ok(());
        }
        Err(e) => return Err(Error::Usage(e.to_string().trim_end().to_string())),
    };
    match &cli.command {
        Command::GenTrace(a) => run_job(&gen_trace_job(a)?, &manifest_path(&a.output)),
        Command::Estimate(a) => estimate(a, stdout),
        Command::Bench(a) => run_job(&bench_job(a)?, &manifest_path(&a.output)),
        Command::Simulate(a) => run_job(&simulate_job(a)?, &manifest_path(&a.output)),
        Command::Replay(a) => {
            let manifest = RunManifest::load(&a.manifest)?;
            if manifest.version != VERSION {
                eprintln!(
                    "warning: manifest written by version {}, replaying with {VERSION}",
                    manifest.version
                );
            }
            let mut job = manifest.job()?;
            if let Some(out) = &a.out {
                job.set_out(out.clone());
            }
            let new_manifest = a
                .new_manifest
                .clone()
                .unwrap_or_else(|| default_manifest_path(job.out()));
            run_job(&job, &new_manifest)
        }
    }
}
