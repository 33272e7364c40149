use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::SimConfig;
use crate::channel::{periodic_waveform, snr_db, ChannelParams};
use crate::error::{Error, Result};

const SHAPE_KEY: u64 = 0x6c69_6e6b_7368_6170;
const NOISE_KEY: u64 = 0x6c69_6e6b_6e6f_6973;
/// ChaCha words reserved per coherence slot.
const WORDS_PER_SLOT: u128 = 256;

/// Distances below this are evaluated at this distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Time-varying SNR of every node pair: the analytic mean SNR at the pair's
/// distance plus a periodic fluctuation and slot-wise Gaussian noise.
///
/// Each link draws its own phase and an amplitude between 0.25 and 1.75
/// times `amplitude_db` from the seed. Links are symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    pub channel: ChannelParams,
    pub range_m: f64,
    pub amplitude_db: f64,
    pub period_s: f64,
    pub noise_db: f64,
    pub coherence_s: f64,
    pub seed: u64,
}

impl LinkModel {
    pub fn from_config(cfg: &SimConfig) -> Self {
        LinkModel {
            channel: cfg.channel,
            range_m: cfg.tx_range_m,
            amplitude_db: cfg.fluct_amplitude_db,
            period_s: cfg.fluct_period_s,
            noise_db: cfg.fluct_noise_db,
            coherence_s: cfg.fluct_coherence_s,
            seed: cfg.seed,
        }
    }

    fn stream(a: usize, b: usize) -> u64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        ((lo as u64) << 32) | hi as u64
    }

    /// Per-link (amplitude, phase).
    pub fn shape(&self, a: usize, b: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ SHAPE_KEY);
        rng.set_stream(Self::stream(a, b));
        let scale: f64 = rng.random_range(0.25..1.75);
        let phase: f64 = rng.random_range(0.0..TAU);
        (self.amplitude_db * scale, phase)
    }

    /// Deviation from the mean SNR at time `t`, in dB.
    pub fn fluctuation_db(&self, a: usize, b: usize, t: f64) -> f64 {
        let (amplitude, phase) = self.shape(a, b);
        let periodic = amplitude * periodic_waveform(TAU * t / self.period_s + phase);
        if self.noise_db == 0.0 {
            return periodic;
        }
        let slot = (t / self.coherence_s).floor().max(0.0) as u128;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ NOISE_KEY);
        rng.set_stream(Self::stream(a, b));
        rng.set_word_pos(slot * WORDS_PER_SLOT);
        let z: f64 = rng.sample(StandardNormal);
        periodic + self.noise_db * z
    }

    pub fn mean_snr_db(&self, distance_m: f64) -> Result<f64> {
        snr_db(distance_m.max(MIN_DISTANCE_M), &self.channel)
    }

    /// SNR in dB between nodes `a` and `b` separated by `distance_m` at `t`.
    pub fn snr_db(&self, a: usize, b: usize, distance_m: f64, t: f64) -> Result<f64> {
        if !(distance_m <= self.range_m) {
            return Err(Error::NoLink { from: a, to: b });
        }
        Ok(self.mean_snr_db(distance_m)? + self.fluctuation_db(a, b, t))
    }
}

pub fn distance(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    let dz = p[2] - q[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// SNR of the link between `a` at `pa` and `b` at `pb` at time `t`.
pub fn link_snr_at(
    model: &LinkModel,
    a: usize,
    b: usize,
    pa: &[f64; 3],
    pb: &[f64; 3],
    t: f64,
) -> Result<f64> {
    model.snr_db(a, b, distance(pa, pb), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> LinkModel {
        LinkModel::from_config(&SimConfig::default())
    }

    #[test]
    fn zero_amplitude_is_the_mean() {
        let m = LinkModel {
            amplitude_db: 0.0,
            noise_db: 0.0,
            ..model()
        };
        let expected = snr_db(120.0, &m.channel).unwrap();
        for t in [0.0, 17.3, 5000.0] {
            assert_eq!(m.snr_db(3, 9, 120.0, t).unwrap(), expected);
        }
    }

    #[test]
    fn deterministic_and_symmetric() {
        let m = model();
        let a = m.snr_db(4, 11, 90.0, 123.4).unwrap();
        assert_eq!(a, m.snr_db(4, 11, 90.0, 123.4).unwrap());
        assert_eq!(a, m.snr_db(11, 4, 90.0, 123.4).unwrap());
        let other = LinkModel { seed: 1, ..m };
        assert_ne!(a, other.snr_db(4, 11, 90.0, 123.4).unwrap());
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            model().snr_db(1, 2, 150.5, 0.0),
            Err(Error::NoLink { from: 1, to: 2 })
        ));
    }

    #[test]
    fn period_average_is_the_mean() {
        let m = model();
        let mean = m.mean_snr_db(100.0).unwrap();
        let steps = 6000;
        let avg = (0..steps)
            .map(|i| m.snr_db(0, 1, 100.0, i as f64 * m.period_s / steps as f64).unwrap())
            .sum::<f64>()
            / steps as f64;
        // 300 independent noise slots of 1 dB: standard error about 0.06 dB.
        assert!((avg - mean).abs() < 0.3, "{avg} vs {mean}");

        let quiet = LinkModel { noise_db: 0.0, ..m };
        let avg = (0..steps)
            .map(|i| quiet.snr_db(0, 1, 100.0, i as f64 * m.period_s / steps as f64).unwrap())
            .sum::<f64>()
            / steps as f64;
        assert!((avg - mean).abs() < 1e-9);
    }

    #[test]
    fn noise_is_constant_within_a_slot() {
        let m = LinkModel {
            amplitude_db: 0.0,
            ..model()
        };
        let a = m.fluctuation_db(2, 5, 10.1);
        assert_eq!(a, m.fluctuation_db(2, 5, 11.9));
        assert_ne!(a, m.fluctuation_db(2, 5, 12.1));
    }
}
