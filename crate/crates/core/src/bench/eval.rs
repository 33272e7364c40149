use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{
    mean_predict, ArModel, CompressionPolicy, EmaState, NnrConfig, NnrPredictor, RunningStats,
    SnrSeries, DEFAULT_EMA_ALPHA, DEFAULT_FIT_WINDOW, DEFAULT_SCALE,
};

/// One-step predictors compared by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Mean,
    Ema,
    Ar(usize),
    Nnr,
}

impl Estimator {
    /// MEAN, EMA, AR(2), AR(5) and NNR.
    pub const STANDARD: [Estimator; 5] = [
        Estimator::Mean,
        Estimator::Ema,
        Estimator::Ar(2),
        Estimator::Ar(5),
        Estimator::Nnr,
    ];

    /// Parses a comma-separated list such as `mean,ema,ar2,ar5,nnr`.
    pub fn parse_list(list: &str) -> Result<Vec<Estimator>> {
        let mut out: Vec<Estimator> = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let e: Estimator = item.parse()?;
            if out.contains(&e) {
                return Err(Error::Usage(format!("estimator '{item}' listed twice")));
            }
            out.push(e);
        }
        if out.is_empty() {
            return Err(Error::Usage("no estimators given".into()));
        }
        Ok(out)
    }

    fn min_history(self, cfg: &EvalConfig) -> usize {
        match self {
            Estimator::Mean | Estimator::Ema => 1,
            Estimator::Ar(p) => p + 2,
            Estimator::Nnr => cfg.nnr.min_history(),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Mean => f.write_str("mean"),
            Estimator::Ema => f.write_str("ema"),
            Estimator::Ar(p) => write!(f, "ar{p}"),
            Estimator::Nnr => f.write_str("nnr"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || {
            Error::Usage(format!(
                "unknown estimator '{s}' (valid: mean, ema, nnr, ar<p> with p >= 1, e.g. ar2)"
            ))
        };
        match s {
            "mean" => Ok(Estimator::Mean),
            "ema" => Ok(Estimator::Ema),
            "nnr" => Ok(Estimator::Nnr),
            _ => {
                let p: usize = s.strip_prefix("ar").ok_or_else(unknown)?.parse().map_err(|_| unknown())?;
                if p == 0 {
                    return Err(unknown());
                }
                Ok(Estimator::Ar(p))
            }
        }
    }
}

/// Parameters shared by all estimators in an evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub ema_alpha: f64,
    pub ar_fit_window: usize,
    pub nnr: NnrConfig,
    pub quant_scale: u32,
    /// Applied to the NNR history when set.
    pub compression: Option<CompressionPolicy>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ema_alpha: DEFAULT_EMA_ALPHA,
            ar_fit_window: DEFAULT_FIT_WINDOW,
            nnr: NnrConfig::default(),
            quant_scale: DEFAULT_SCALE,
            compression: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorScore {
    pub estimator: Estimator,
    /// Steps at which this estimator's absolute error was minimal (ties
    /// count for every tied estimator).
    pub best_count: u64,
    pub best_rate: f64,
    pub avg_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// In the order the estimators were requested.
    pub scores: Vec<EstimatorScore>,
    pub steps_evaluated: u64,
    pub warmup_steps: usize,
}

impl EvalResult {
    pub fn score(&self, estimator: Estimator) -> Option<&EstimatorScore> {
        self.scores.iter().find(|s| s.estimator == estimator)
    }
}

enum State {
    Mean(RunningStats),
    Ema(EmaState),
    Ar(usize),
    Nnr(Box<NnrPredictor>),
}

impl State {
    fn new(estimator: Estimator, cfg: &EvalConfig) -> Result<Self> {
        Ok(match estimator {
            Estimator::Mean => State::Mean(RunningStats::new()),
            Estimator::Ema => State::Ema(EmaState::new(cfg.ema_alpha)?),
            Estimator::Ar(0) => return Err(Error::Config("AR order must be at least 1".into())),
            Estimator::Ar(p) => State::Ar(p),
            Estimator::Nnr => {
                let mut p = NnrPredictor::with_scale(cfg.nnr, cfg.quant_scale)?;
                if let Some(policy) = cfg.compression {
                    p = p.with_compression(policy)?;
                }
                State::Nnr(Box::new(p))
            }
        })
    }

    fn predict(&self, history: &[f64], cfg: &EvalConfig) -> Result<f64> {
        match self {
            State::Mean(stats) => mean_predict(stats),
            State::Ema(ema) => ema
                .prediction()
                .ok_or_else(|| Error::Prediction("EMA has no history".into())),
            State::Ar(p) => ArModel::fit(history, *p, cfg.ar_fit_window)?.model.predict(history),
            State::Nnr(nnr) => nnr.predict(),
        }
    }

    fn observe(&mut self, series: &SnrSeries, t: usize) -> Result<()> {
        let sample = series.get(t).expect("in range");
        match self {
            State::Mean(stats) => stats.update(sample.snr_db),
            State::Ema(ema) => ema.update(sample.snr_db).map(|_| ()),
            State::Ar(_) => Ok(()),
            State::Nnr(nnr) => nnr.push(sample),
        }
    }
}

/// Walks the series once, letting every estimator predict each sample from
/// the samples before it, and scores the one-step absolute errors.
///
/// All estimators start predicting at the same step: the largest minimum
/// history among them.
pub fn evaluate(series: &SnrSeries, estimators: &[Estimator], cfg: &EvalConfig) -> Result<EvalResult> {
    if estimators.is_empty() {
        return Err(Error::Evaluation("no estimators to evaluate".into()));
    }
    let warmup = estimators.iter().map(|e| e.min_history(cfg)).max().expect("non-empty");
    let n = series.len();
    if n <= warmup {
        return Err(Error::Evaluation(format!(
            "series of {n} samples is too short; the estimators need more than {warmup}"
        )));
    }

    let mut states = estimators
        .iter()
        .map(|&e| State::new(e, cfg))
        .collect::<Result<Vec<_>>>()?;
    let values = series.values();
    let mut best = vec![0u64; estimators.len()];
    let mut abs_sum = vec![0.0f64; estimators.len()];
    let mut errors = vec![0.0f64; estimators.len()];

    for t in 0..n {
        if t >= warmup {
            let history = &values[..t];
            for (i, state) in states.iter().enumerate() {
                let prediction = state.predict(history, cfg)?;
                if !prediction.is_finite() {
                    return Err(Error::Evaluation(format!(
                        "{} produced a non-finite prediction at step {t}",
                        estimators[i]
                    )));
                }
                errors[i] = (prediction - values[t]).abs();
                abs_sum[i] += errors[i];
            }
            let min = errors.iter().copied().fold(f64::INFINITY, f64::min);
            for (count, &e) in best.iter_mut().zip(&errors) {
                if e == min {
                    *count += 1;
                }
            }
        }
        for state in &mut states {
            state.observe(series, t)?;
        }
    }

    let steps = (n - warmup) as u64;
    let scores = estimators
        .iter()
        .enumerate()
        .map(|(i, &estimator)| EstimatorScore {
            estimator,
            best_count: best[i],
            best_rate: best[i] as f64 / steps as f64,
            avg_abs_error: abs_sum[i] / steps as f64,
        })
        .collect();
    Ok(EvalResult {
        scores,
        steps_evaluated: steps,
        warmup_steps: warmup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{gen_trace, TraceSpec};

    #[test]
    fn names_round_trip() {
        for e in Estimator::STANDARD {
            assert_eq!(e.to_string().parse::<Estimator>().unwrap(), e);
        }
        assert_eq!(
            Estimator::parse_list("mean, ema,ar2,ar5,nnr").unwrap(),
            Estimator::STANDARD.to_vec()
        );
        for bad in ["arima", "ar0", "ar", "knn"] {
            match bad.parse::<Estimator>() {
                Err(Error::Usage(msg)) => assert!(msg.contains("mean, ema, nnr")),
                other => panic!("{bad}: {other:?}"),
            }
        }
        assert!(Estimator::parse_list("nnr,nnr").is_err());
    }

    #[test]
    fn constant_series_ties_everywhere() {
        let s = SnrSeries::from_values(&[6.25; 200]).unwrap();
        let r = evaluate(&s, &Estimator::STANDARD, &EvalConfig::default()).unwrap();
        assert_eq!(r.warmup_steps, 7);
        assert_eq!(r.steps_evaluated, 193);
        for score in &r.scores {
            assert_eq!(score.best_rate, 1.0, "{}", score.estimator);
            assert_eq!(score.avg_abs_error, 0.0);
        }
    }

    #[test]
    fn nnr_wins_on_ideal_periodic_data() {
        let s = gen_trace(&TraceSpec::ideal(2000, 20)).unwrap();
        let r = evaluate(&s, &Estimator::STANDARD, &EvalConfig::default()).unwrap();
        let nnr = r.score(Estimator::Nnr).unwrap();
        for other in r.scores.iter().filter(|s| s.estimator != Estimator::Nnr) {
            assert!(nnr.best_rate > other.best_rate, "{}", other.estimator);
            assert!(nnr.avg_abs_error < other.avg_abs_error, "{}", other.estimator);
        }
    }

    #[test]
    fn each_step_awards_at_least_one_best() {
        let s = gen_trace(&TraceSpec::noisy(400, 15, 1.0, 3)).unwrap();
        let r = evaluate(&s, &Estimator::STANDARD, &EvalConfig::default()).unwrap();
        let total: u64 = r.scores.iter().map(|s| s.best_count).sum();
        assert!(total >= r.steps_evaluated);
        for score in &r.scores {
            assert_eq!(score.best_rate, score.best_count as f64 / r.steps_evaluated as f64);
        }
        assert_eq!(r, evaluate(&s, &Estimator::STANDARD, &EvalConfig::default()).unwrap());
    }

    #[test]
    fn too_short() {
        let s = SnrSeries::from_values(&[1.0; 7]).unwrap();
        assert!(matches!(
            evaluate(&s, &Estimator::STANDARD, &EvalConfig::default()),
            Err(Error::Evaluation(_))
        ));
        assert!(evaluate(&s, &[], &EvalConfig::default()).is_err());
    }

    /// Mean of a stream predicted one step ahead, recomputed from scratch.
    #[test]
    fn mean_errors_match_two_pass_oracle() {
        let s = gen_trace(&TraceSpec::noisy(300, 10, 2.0, 5)).unwrap();
        let v = s.values();
        let expected: f64 = (1..v.len())
            .map(|t| (v[..t].iter().sum::<f64>() / t as f64 - v[t]).abs())
            .sum::<f64>()
            / (v.len() - 1) as f64;
        let r = evaluate(&s, &[Estimator::Mean], &EvalConfig::default()).unwrap();
        assert!((r.scores[0].avg_abs_error - expected).abs() < 1e-9);
    }
}
