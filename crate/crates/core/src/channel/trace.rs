use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::estimators::{SnrSample, SnrSeries};

/// Harmonic content of the periodic SNR pattern: (harmonic, amplitude, phase).
const HARMONICS: [(f64, f64, f64); 4] = [
    (1.0, 1.0, 0.0),
    (2.0, 0.45, 0.9),
    (3.0, 0.3, 2.1),
    (5.0, 0.2, 0.4),
];
const HARMONIC_NORM: f64 = 1.95;

/// Zero-mean periodic pattern with period `2*pi` in `phase`, bounded by 1 in
/// magnitude.
///
/// Several harmonics are mixed so the pattern is not generated by any
/// low-order linear recurrence; a single sinusoid would be reproduced exactly
/// by an AR(2) model.
pub fn periodic_waveform(phase: f64) -> f64 {
    HARMONICS
        .iter()
        .map(|&(h, a, p)| a * (h * phase + p).sin())
        .sum::<f64>()
        / HARMONIC_NORM
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceKind {
    IdealPeriod,
    PeriodWithNoise,
    RandomPeriodWithNoise,
}

impl TraceKind {
    pub const ALL: [TraceKind; 3] = [
        TraceKind::IdealPeriod,
        TraceKind::PeriodWithNoise,
        TraceKind::RandomPeriodWithNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceKind::IdealPeriod => "ideal",
            TraceKind::PeriodWithNoise => "noisy",
            TraceKind::RandomPeriodWithNoise => "random",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TraceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(TraceKind::IdealPeriod),
            "noisy" => Ok(TraceKind::PeriodWithNoise),
            "random" => Ok(TraceKind::RandomPeriodWithNoise),
            other => Err(Error::Usage(format!(
                "unknown trace kind '{other}' (expected ideal, noisy or random)"
            ))),
        }
    }
}

/// Parameters of a synthetic SNR trace. Sample `i` is taken at `i` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSpec {
    pub kind: TraceKind,
    pub length: usize,
    pub base_db: f64,
    pub amplitude_db: f64,
    pub period_samples: usize,
    pub noise_sigma_db: f64,
    pub period_jitter: f64,
    pub seed: u64,
}

impl TraceSpec {
    pub fn ideal(length: usize, period_samples: usize) -> Self {
        TraceSpec {
            kind: TraceKind::IdealPeriod,
            length,
            base_db: 10.0,
            amplitude_db: 5.0,
            period_samples,
            noise_sigma_db: 0.0,
            period_jitter: 0.0,
            seed: 0,
        }
    }

    pub fn noisy(length: usize, period_samples: usize, noise_sigma_db: f64, seed: u64) -> Self {
        TraceSpec {
            kind: TraceKind::PeriodWithNoise,
            noise_sigma_db,
            seed,
            ..Self::ideal(length, period_samples)
        }
    }

    pub fn random_period(
        length: usize,
        period_samples: usize,
        period_jitter: f64,
        noise_sigma_db: f64,
        seed: u64,
    ) -> Self {
        TraceSpec {
            kind: TraceKind::RandomPeriodWithNoise,
            period_jitter,
            ..Self::noisy(length, period_samples, noise_sigma_db, seed)
        }
    }

    /// The standard spec for `kind` used by the benchmarks.
    pub fn preset(kind: TraceKind, length: usize, seed: u64) -> Self {
        match kind {
            TraceKind::IdealPeriod => Self::ideal(length, 20),
            TraceKind::PeriodWithNoise => Self::noisy(length, 20, 0.5, seed),
            TraceKind::RandomPeriodWithNoise => Self::random_period(length, 20, 0.2, 0.5, seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Config("trace length must be positive".into()));
        }
        if self.period_samples == 0 {
            return Err(Error::Config("trace period must be positive".into()));
        }
        if !self.base_db.is_finite() {
            return Err(Error::Config("trace base level must be finite".into()));
        }
        if !(self.amplitude_db >= 0.0 && self.amplitude_db.is_finite()) {
            return Err(Error::Config(format!(
                "amplitude must be non-negative, got {}",
                self.amplitude_db
            )));
        }
        if !(self.noise_sigma_db >= 0.0 && self.noise_sigma_db.is_finite()) {
            return Err(Error::Config(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma_db
            )));
        }
        if !(0.0..1.0).contains(&self.period_jitter) {
            return Err(Error::Config(format!(
                "period jitter must lie in [0, 1), got {}",
                self.period_jitter
            )));
        }
        match self.kind {
            TraceKind::IdealPeriod if self.noise_sigma_db != 0.0 => Err(Error::Config(
                "an ideal periodic trace carries no noise".into(),
            )),
            TraceKind::IdealPeriod | TraceKind::PeriodWithNoise if self.period_jitter != 0.0 => {
                Err(Error::Config(
                    "period jitter only applies to random-period traces".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Generates the trace described by `spec`; identical specs give identical
/// traces.
pub fn gen_trace(spec: &TraceSpec) -> Result<SnrSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma_db)
        .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
    let period = spec.period_samples as f64;

    let mut series = SnrSeries::with_capacity(spec.length);
    match spec.kind {
        TraceKind::IdealPeriod | TraceKind::PeriodWithNoise => {
            for i in 0..spec.length {
                // Reduce modulo the period so cycles repeat bit for bit.
                let phase = TAU * (i % spec.period_samples) as f64 / period;
                let mut v = spec.base_db + spec.amplitude_db * periodic_waveform(phase);
                if spec.kind == TraceKind::PeriodWithNoise {
                    v += noise.sample(&mut rng);
                }
                series.push(SnrSample::new(i as f64, v))?;
            }
        }
        TraceKind::RandomPeriodWithNoise => {
            let lo = period * (1.0 - spec.period_jitter);
            let hi = period * (1.0 + spec.period_jitter);
            let draw_period = |rng: &mut ChaCha8Rng| {
                if hi > lo {
                    rng.random_range(lo..hi)
                } else {
                    lo
                }
            };
            let mut cycle = draw_period(&mut rng);
            let mut phase = 0.0;
            for i in 0..spec.length {
                let v = spec.base_db
                    + spec.amplitude_db * periodic_waveform(phase)
                    + noise.sample(&mut rng);
                series.push(SnrSample::new(i as f64, v))?;
                phase += TAU / cycle;
                if phase >= TAU {
                    phase -= TAU;
                    cycle = draw_period(&mut rng);
                }
            }
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn autocorrelation(values: &[f64], lag: usize) -> f64 {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let num: f64 = (0..n - lag)
            .map(|i| (values[i] - mean) * (values[i + lag] - mean))
            .sum();
        let den: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        num / den
    }

    #[test]
    fn zero_amplitude_is_constant() {
        let spec = TraceSpec {
            amplitude_db: 0.0,
            base_db: 12.5,
            ..TraceSpec::ideal(300, 17)
        };
        let s = gen_trace(&spec).unwrap();
        assert!(s.values().iter().all(|&v| v == 12.5));
    }

    #[test]
    fn autocorrelation_peaks_at_the_period() {
        let s = gen_trace(&TraceSpec::ideal(1000, 100)).unwrap();
        let v = s.values();
        let best = (25..175)
            .max_by(|&a, &b| autocorrelation(v, a).total_cmp(&autocorrelation(v, b)))
            .unwrap();
        assert_eq!(best, 100);
    }

    #[test]
    fn ideal_trace_repeats_exactly() {
        let s = gen_trace(&TraceSpec::ideal(600, 50)).unwrap();
        let v = s.values();
        for i in 50..600 {
            assert_eq!(v[i], v[i - 50]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in TraceKind::ALL {
            let spec = TraceSpec::preset(kind, 500, 42);
            let a = gen_trace(&spec).unwrap();
            let b = gen_trace(&spec).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 500);
        }
        let a = gen_trace(&TraceSpec::noisy(100, 10, 1.0, 1)).unwrap();
        let b = gen_trace(&TraceSpec::noisy(100, 10, 1.0, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn waveform_is_bounded() {
        for i in 0..10_000 {
            let w = periodic_waveform(TAU * i as f64 / 10_000.0);
            assert!(w.abs() <= 1.0);
        }
    }

    #[test]
    fn invalid_specs() {
        let noisy_ideal = TraceSpec {
            noise_sigma_db: 2.0,
            ..TraceSpec::ideal(10, 5)
        };
        assert!(matches!(gen_trace(&noisy_ideal), Err(Error::Config(_))));
        let jittered = TraceSpec {
            period_jitter: 0.1,
            ..TraceSpec::noisy(10, 5, 1.0, 0)
        };
        assert!(gen_trace(&jittered).is_err());
        assert!(gen_trace(&TraceSpec::ideal(0, 5)).is_err());
        assert!(gen_trace(&TraceSpec::ideal(10, 0)).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in TraceKind::ALL {
            assert_eq!(kind.name().parse::<TraceKind>().unwrap(), kind);
        }
        assert!("square".parse::<TraceKind>().is_err());
    }
}
