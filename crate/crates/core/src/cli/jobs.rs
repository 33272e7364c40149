use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::kv::{join, parse_u64_list, parse_usize_list, Params};
use crate::bench::{
    evaluate_datasets, load_csv, measure_optimization, sweep, write_bench_csv, write_optimization_csv,
    write_series, Estimator, EvalConfig,
};
use crate::channel::{gen_trace, TraceKind, TraceSpec};
use crate::error::{Error, Result};
use crate::estimators::{CompressionPolicy, NnrConfig, DEFAULT_SCALE};
use crate::netsim::{run_sim, write_metrics_csv, Protocol, SimConfig, SimRow};

fn io_err(e: std::io::Error) -> Error {
    Error::io("<output buffer>", e)
}

/// Writes a synthetic SNR trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GenTraceJob {
    pub spec: TraceSpec,
    pub out: PathBuf,
}

impl GenTraceJob {
    pub fn to_params(&self) -> Vec<(String, String)> {
        let s = &self.spec;
        [
            ("kind", s.kind.to_string()),
            ("length", s.length.to_string()),
            ("period", s.period_samples.to_string()),
            ("amplitude", s.amplitude_db.to_string()),
            ("base", s.base_db.to_string()),
            ("noise_sigma", s.noise_sigma_db.to_string()),
            ("jitter", s.period_jitter.to_string()),
            ("seed", s.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn from_params(out: PathBuf, mut p: Params) -> Result<Self> {
        let kind: TraceKind = p.parse_or("kind", TraceKind::IdealPeriod)?;
        let spec = TraceSpec {
            kind,
            length: p.parse_or("length", 1000)?,
            period_samples: p.parse_or("period", 20)?,
            amplitude_db: p.parse_or("amplitude", 5.0)?,
            base_db: p.parse_or("base", 10.0)?,
            noise_sigma_db: p.parse_or(
                "noise_sigma",
                if kind == TraceKind::IdealPeriod { 0.0 } else { 0.5 },
            )?,
            period_jitter: p.parse_or(
                "jitter",
                if kind == TraceKind::RandomPeriodWithNoise { 0.2 } else { 0.0 },
            )?,
            seed: p.parse_or("seed", 0)?,
        };
        p.finish()?;
        spec.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(GenTraceJob { spec, out })
    }

    pub fn produce(&self) -> Result<Vec<u8>> {
        let series = gen_trace(&self.spec)?;
        let mut buf = Vec::new();
        write_series(&mut buf, &series).map_err(io_err)?;
        Ok(buf)
    }
}

/// Estimator accuracy over generated and loaded traces.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchJob {
    pub kinds: Vec<TraceKind>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub estimators: Vec<Estimator>,
    pub eval: EvalConfig,
    pub out: PathBuf,
}

fn nnr_pairs(nnr: &NnrConfig) -> [(String, String); 2] {
    [
        ("nnr_window".to_string(), nnr.window_m.to_string()),
        ("nnr_k".to_string(), nnr.k.to_string()),
    ]
}

fn nnr_from(p: &mut Params) -> Result<NnrConfig> {
    let d = NnrConfig::default();
    let nnr = NnrConfig {
        window_m: p.parse_or("nnr_window", d.window_m)?,
        k: p.parse_or("nnr_k", d.k)?,
        ..d
    };
    nnr.validate()?;
    Ok(nnr)
}

impl BenchJob {
    pub fn to_params(&self) -> Vec<(String, String)> {
        let e = &self.eval;
        let mut v = vec![
            ("mode".to_string(), "accuracy".to_string()),
            ("kinds".to_string(), join(&self.kinds)),
            ("sizes".to_string(), join(&self.sizes)),
            ("seeds".to_string(), join(&self.seeds)),
            (
                "inputs".to_string(),
                self.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","),
            ),
            ("estimators".to_string(), join(&self.estimators)),
            ("ema_alpha".to_string(), e.ema_alpha.to_string()),
            ("ar_fit_window".to_string(), e.ar_fit_window.to_string()),
            ("quant_scale".to_string(), e.quant_scale.to_string()),
            (
                "storage_limit".to_string(),
                e.compression.map_or(0, |c| c.storage_limit).to_string(),
            ),
        ];
        v.extend(nnr_pairs(&e.nnr));
        v
    }

    pub fn from_params(out: PathBuf, mut p: Params) -> Result<Self> {
        let kinds_text = p.take("kinds").unwrap_or_default();
        let kinds = kinds_text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<TraceKind>>>()?;
        let inputs: Vec<PathBuf> = p
            .take("inputs")
            .unwrap_or_default()
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(PathBuf::from)
            .collect();
        if kinds.is_empty() && inputs.is_empty() {
            return Err(Error::Usage(
                "bench needs trace kinds or input files (for example: --kinds ideal,noisy,random)".into(),
            ));
        }
        let sizes = match p.take("sizes") {
            Some(s) => parse_usize_list(&s)?,
            None if kinds.is_empty() => Vec::new(),
            None => {
                return Err(Error::Config(
                    "bench: missing required key 'sizes' (for example: sizes = 1000:10000:1000)".into(),
                ))
            }
        };
        let seeds = match p.take("seeds") {
            Some(s) if !s.is_empty() => parse_u64_list(&s)?,
            _ => vec![0],
        };
        let estimators = match p.take("estimators") {
            Some(list) => Estimator::parse_list(&list)?,
            None => Estimator::STANDARD.to_vec(),
        };
        let d = EvalConfig::default();
        let ema_alpha = p.parse_or("ema_alpha", d.ema_alpha)?;
        let ar_fit_window = p.parse_or("ar_fit_window", d.ar_fit_window)?;
        let quant_scale = p.parse_or("quant_scale", DEFAULT_SCALE)?;
        let storage_limit: usize = p.parse_or("storage_limit", 0)?;
        let nnr = nnr_from(&mut p)?;
        match p.take("mode").as_deref() {
            None | Some("accuracy") => {}
            Some(other) => return Err(Error::Config(format!("bench: unexpected mode '{other}'"))),
        }
        p.finish()?;
        let compression = (storage_limit > 0).then(|| CompressionPolicy {
            storage_limit,
            ..CompressionPolicy::default()
        });
        if let Some(c) = &compression {
            c.validate()?;
        }
        Ok(BenchJob {
            kinds,
            sizes,
            seeds,
            inputs,
            estimators,
            eval: EvalConfig {
                ema_alpha,
                ar_fit_window,
                nnr,
                quant_scale,
                compression,
            },
            out,
        })
    }

    /// Generated specs; the ideal trace has no randomness, so it appears once.
    fn specs(&self) -> Vec<TraceSpec> {
        let mut specs = Vec::new();
        for &kind in &self.kinds {
            if kind == TraceKind::IdealPeriod {
                specs.push(TraceSpec::preset(kind, 0, 0));
            } else {
                specs.extend(self.seeds.iter().map(|&s| TraceSpec::preset(kind, 0, s)));
            }
        }
        specs
    }

    pub fn produce(&self) -> Result<Vec<u8>> {
        let mut rows = if self.kinds.is_empty() {
            Vec::new()
        } else {
            sweep(&self.sizes, &self.specs(), &self.estimators, &self.eval)?
        };
        let datasets = self
            .inputs
            .iter()
            .map(|path| Ok((dataset_name(path), load_csv(path)?)))
            .collect::<Result<Vec<_>>>()?;
        rows.extend(evaluate_datasets(&datasets, &self.estimators, &self.eval)?);
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &rows).map_err(io_err)?;
        Ok(buf)
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Naive vs. indexed vs. compressed NNR measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationJob {
    pub sizes: Vec<usize>,
    pub trace: TraceSpec,
    pub policy: CompressionPolicy,
    pub nnr: NnrConfig,
    pub eval_steps: usize,
    pub out: PathBuf,
}

impl OptimizationJob {
    pub fn to_params(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("mode".to_string(), "optimization".to_string()),
            ("sizes".to_string(), join(&self.sizes)),
            ("kind".to_string(), self.trace.kind.to_string()),
            ("seed".to_string(), self.trace.seed.to_string()),
            ("storage_limit".to_string(), self.policy.storage_limit.to_string()),
            ("fraction".to_string(), self.policy.fraction.to_string()),
            ("eval_steps".to_string(), self.eval_steps.to_string()),
        ];
        v.extend(nnr_pairs(&self.nnr));
        v
    }

    pub fn from_params(out: PathBuf, mut p: Params) -> Result<Self> {
        let sizes = parse_usize_list(&p.require("sizes", "1000,10000,100000")?)?;
        let kind = p.parse_or("kind", TraceKind::PeriodWithNoise)?;
        let seed = p.parse_or("seed", 0)?;
        let d = CompressionPolicy::default();
        let policy = CompressionPolicy {
            storage_limit: p.parse_or("storage_limit", d.storage_limit)?,
            fraction: p.parse_or("fraction", d.fraction)?,
            ..d
        };
        policy.validate()?;
        let eval_steps = p.parse_or("eval_steps", 200)?;
        let nnr = nnr_from(&mut p)?;
        match p.take("mode").as_deref() {
            None | Some("optimization") => {}
            Some(other) => return Err(Error::Config(format!("bench: unexpected mode '{other}'"))),
        }
        p.finish()?;
        Ok(OptimizationJob {
            sizes,
            trace: TraceSpec::preset(kind, 0, seed),
            policy,
            nnr,
            eval_steps,
            out,
        })
    }

    pub fn produce(&self) -> Result<Vec<u8>> {
        let rows = measure_optimization(&self.sizes, &self.nnr, &self.policy, &self.trace, self.eval_steps)?;
        let mut buf = Vec::new();
        write_optimization_csv(&mut buf, &rows).map_err(io_err)?;
        Ok(buf)
    }
}

/// The protocol x node count x seed simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateJob {
    pub protocols: Vec<Protocol>,
    pub node_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub base: SimConfig,
    pub out: PathBuf,
}

/// Keys fixed per grid cell rather than by the shared configuration.
const GRID_KEYS: [&str; 3] = ["protocol", "node_count", "seed"];

impl SimulateJob {
    pub fn to_params(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("protocols".to_string(), join(&self.protocols)),
            ("node_counts".to_string(), join(&self.node_counts)),
            ("seeds".to_string(), join(&self.seeds)),
        ];
        v.extend(
            self.base
                .to_pairs()
                .into_iter()
                .filter(|(k, _)| !GRID_KEYS.contains(k))
                .map(|(k, val)| (k.to_string(), val)),
        );
        v
    }

    /// Grid keys fall back to their single-valued config counterparts;
    /// `seeds` defaults to 0.
    pub fn from_params(out: PathBuf, mut p: Params) -> Result<Self> {
        let protocols_text = match (p.take("protocols"), p.take("protocol")) {
            (Some(list), _) | (None, Some(list)) => list,
            (None, None) => p.require("protocols", "dbcar,dbr,carp")?,
        };
        let protocols = protocols_text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Protocol>>>()?;
        if protocols.is_empty() {
            return Err(Error::Usage("no protocols given".into()));
        }
        let nodes_text = match (p.take("node_counts"), p.take("node_count")) {
            (Some(list), _) | (None, Some(list)) => list,
            (None, None) => p.require("node_counts", "100:200:10")?,
        };
        let node_counts = parse_usize_list(&nodes_text)?;
        let seeds = match (p.take("seeds"), p.take("seed")) {
            (Some(list), _) | (None, Some(list)) => parse_u64_list(&list)?,
            (None, None) => vec![0],
        };
        let mut base = SimConfig::default();
        for (k, v) in p.drain() {
            base.set(&k, &v)?;
        }
        p.finish()?;
        let job = SimulateJob {
            protocols,
            node_counts,
            seeds,
            base,
            out,
        };
        for cell in job.cells() {
            cell.validate()?;
        }
        Ok(job)
    }

    /// Every cell's configuration in output order.
    pub fn cells(&self) -> Vec<SimConfig> {
        let mut cells = Vec::new();
        for &protocol in &self.protocols {
            for &node_count in &self.node_counts {
                for &seed in &self.seeds {
                    cells.push(SimConfig {
                        protocol,
                        node_count,
                        seed,
                        ..self.base
                    });
                }
            }
        }
        cells
    }

    pub fn rows(&self) -> Result<Vec<SimRow>> {
        self.cells()
            .into_par_iter()
            .map(|cfg| {
                Ok(SimRow {
                    protocol: cfg.protocol,
                    node_count: cfg.node_count,
                    seed: cfg.seed,
                    metrics: run_sim(&cfg)?,
                })
            })
            .collect()
    }

    pub fn produce(&self) -> Result<Vec<u8>> {
        let rows = self.rows()?;
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &rows).map_err(io_err)?;
        Ok(buf)
    }
}

/// Any command that writes a CSV and a manifest.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    GenTrace(GenTraceJob),
    Bench(BenchJob),
    Optimization(OptimizationJob),
    Simulate(SimulateJob),
}

impl Job {
    pub fn command(&self) -> &'static str {
        match self {
            Job::GenTrace(_) => "gen-trace",
            Job::Bench(_) | Job::Optimization(_) => "bench",
            Job::Simulate(_) => "simulate",
        }
    }

    pub fn out(&self) -> &Path {
        match self {
            Job::GenTrace(j) => &j.out,
            Job::Bench(j) => &j.out,
            Job::Optimization(j) => &j.out,
            Job::Simulate(j) => &j.out,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Job::GenTrace(j) => j.out = out,
            Job::Bench(j) => j.out = out,
            Job::Optimization(j) => j.out = out,
            Job::Simulate(j) => j.out = out,
        }
    }

    pub fn params(&self) -> Vec<(String, String)> {
        match self {
            Job::GenTrace(j) => j.to_params(),
            Job::Bench(j) => j.to_params(),
            Job::Optimization(j) => j.to_params(),
            Job::Simulate(j) => j.to_params(),
        }
    }

    /// Rebuilds a job from a command name and its resolved parameters.
    pub fn from_params(command: &str, out: PathBuf, pairs: Vec<(String, String)>) -> Result<Self> {
        match command {
            "gen-trace" => Ok(Job::GenTrace(GenTraceJob::from_params(out, Params::new("gen-trace", pairs))?)),
            "bench" => {
                let optimization = pairs.iter().any(|(k, v)| k == "mode" && v == "optimization");
                let p = Params::new("bench", pairs);
                if optimization {
                    Ok(Job::Optimization(OptimizationJob::from_params(out, p)?))
                } else {
                    Ok(Job::Bench(BenchJob::from_params(out, p)?))
                }
            }
            "simulate" => Ok(Job::Simulate(SimulateJob::from_params(out, Params::new("simulate", pairs))?)),
            other => Err(Error::Usage(format!(
                "unknown command '{other}' (valid: gen-trace, bench, simulate)"
            ))),
        }
    }

    /// Computes the output file's full contents.
    pub fn produce(&self) -> Result<Vec<u8>> {
        match self {
            Job::GenTrace(j) => j.produce(),
            Job::Bench(j) => j.produce(),
            Job::Optimization(j) => j.produce(),
            Job::Simulate(j) => j.produce(),
        }
    }
}
