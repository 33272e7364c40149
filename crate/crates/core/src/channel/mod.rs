//! Analytic underwater acoustic channel.
//!
//! Path loss follows `A(l, f) = k*10*log10(l) + l*a(f)` with Thorp's
//! absorption for `a(f)`, SNR is `P / A / (N * df)` with flat noise, and the
//! packet success probability assumes independent bit errors with
//! `p_e = erfc(sqrt(snr)) / 2`.

mod trace;

pub use trace::{gen_trace, periodic_waveform, TraceKind, TraceSpec};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Acoustic source power, watts.
    pub tx_power_w: f64,
    /// Carrier frequency, kHz.
    pub carrier_khz: f64,
    /// Spreading exponent `k`, in [1, 2].
    pub spreading_exponent: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd_w_per_hz: f64,
    /// Receiver noise bandwidth, Hz.
    pub bandwidth_hz: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            tx_power_w: 1.0,
            carrier_khz: 10.0,
            spreading_exponent: 1.5,
            noise_psd_w_per_hz: 1e-8,
            bandwidth_hz: 10_000.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power_w", self.tx_power_w),
            ("carrier_khz", self.carrier_khz),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
            ("bandwidth_hz", self.bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(1.0..=2.0).contains(&self.spreading_exponent) {
            return Err(Error::Config(format!(
                "spreading exponent must lie in [1, 2], got {}",
                self.spreading_exponent
            )));
        }
        Ok(())
    }

    /// Noise power in the receiver band, watts.
    pub fn noise_power_w(&self) -> f64 {
        self.noise_psd_w_per_hz * self.bandwidth_hz
    }
}

/// Thorp's absorption coefficient in dB/km for `f` in kHz.
pub fn absorption_db_per_km(f_khz: f64) -> Result<f64> {
    if !(f_khz > 0.0) || !f_khz.is_finite() {
        return Err(Error::Domain(format!(
            "frequency must be positive, got {f_khz} kHz"
        )));
    }
    let f2 = f_khz * f_khz;
    Ok(0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003)
}

/// Path loss in dB over `distance_m` meters.
pub fn attenuation_db(distance_m: f64, params: &ChannelParams) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::Domain(format!(
            "distance must be positive, got {distance_m} m"
        )));
    }
    let spreading = params.spreading_exponent * 10.0 * distance_m.log10();
    let absorption = distance_m / 1000.0 * absorption_db_per_km(params.carrier_khz)?;
    Ok(spreading + absorption)
}

/// Received SNR as a linear power ratio.
pub fn snr_linear(distance_m: f64, params: &ChannelParams) -> Result<f64> {
    let attenuation = 10f64.powf(attenuation_db(distance_m, params)? / 10.0);
    Ok(params.tx_power_w / attenuation / params.noise_power_w())
}

/// Received SNR in dB, computed directly in the log domain.
pub fn snr_db(distance_m: f64, params: &ChannelParams) -> Result<f64> {
    Ok(10.0 * params.tx_power_w.log10()
        - attenuation_db(distance_m, params)?
        - 10.0 * params.noise_power_w().log10())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Probability that all `packet_bits` bits of a packet arrive intact at the
/// given linear SNR.
pub fn packet_success_prob(snr: f64, packet_bits: u32) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::Domain(format!("SNR must be non-negative, got {snr}")));
    }
    if packet_bits == 0 {
        return Err(Error::Domain("packet must carry at least one bit".into()));
    }
    let bit_error = 0.5 * libm::erfc(snr.sqrt());
    Ok((1.0 - bit_error).powf(f64::from(packet_bits)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorption_limits_and_monotonicity() {
        assert!((absorption_db_per_km(1e-9).unwrap() - 0.003).abs() < 1e-12);
        assert!(absorption_db_per_km(20.0).unwrap() > absorption_db_per_km(10.0).unwrap());
        assert!(matches!(absorption_db_per_km(0.0), Err(Error::Domain(_))));
        assert!(matches!(absorption_db_per_km(-3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn absorption_at_10_khz() {
        // 0.11*100/101 + 44*100/4200 + 2.75e-4*100 + 0.003
        let hand = 11.0 / 101.0 + 4400.0 / 4200.0 + 0.0275 + 0.003;
        assert!((hand - 1.187_029_938_708_156_7_f64).abs() < 1e-12);
        assert!((absorption_db_per_km(10.0).unwrap() - hand).abs() < 1e-12);
    }

    #[test]
    fn attenuation_cases() {
        let p = ChannelParams::default();
        let a10 = absorption_db_per_km(10.0).unwrap();
        assert!((attenuation_db(1.0, &p).unwrap() - a10 / 1000.0).abs() < 1e-12);

        let p2 = ChannelParams {
            spreading_exponent: 2.0,
            ..p
        };
        let step = attenuation_db(200.0, &p2).unwrap() - attenuation_db(100.0, &p2).unwrap();
        assert!((step - (20.0 * 2f64.log10() + 0.1 * a10)).abs() < 1e-12);
        assert!((20.0 * 2f64.log10() - 6.0206).abs() < 1e-4);

        let p15 = ChannelParams {
            spreading_exponent: 1.5,
            ..p
        };
        assert!((attenuation_db(1000.0, &p15).unwrap() - (45.0 + a10)).abs() < 1e-12);

        assert!(matches!(attenuation_db(0.0, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_snr_when_noise_equals_received_power() {
        let p = ChannelParams::default();
        let received = p.tx_power_w / db_to_linear(attenuation_db(80.0, &p).unwrap());
        let q = ChannelParams {
            noise_psd_w_per_hz: received / p.bandwidth_hz,
            ..p
        };
        assert!((snr_linear(80.0, &q).unwrap() - 1.0).abs() < 1e-12);
        assert!(snr_db(80.0, &q).unwrap().abs() < 1e-9);
    }

    #[test]
    fn snr_linear_and_db_agree() {
        let p = ChannelParams::default();
        for d in [1.0, 10.0, 150.0, 333.3, 2000.0] {
            let lin = snr_linear(d, &p).unwrap();
            assert!(lin.is_finite() && lin > 0.0);
            assert!((linear_to_db(lin) - snr_db(d, &p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn snr_decreases_with_distance() {
        let p = ChannelParams::default();
        let mut last = f64::INFINITY;
        for i in 1..400 {
            let s = snr_linear(i as f64 * 2.5, &p).unwrap();
            assert!(s < last);
            last = s;
        }
    }

    #[test]
    fn psr_endpoints() {
        assert_eq!(packet_success_prob(f64::INFINITY, 800).unwrap(), 1.0);
        assert_eq!(packet_success_prob(0.0, 1).unwrap(), 0.5);
        assert!(matches!(packet_success_prob(-1.0, 8), Err(Error::Domain(_))));
        assert!(packet_success_prob(1.0, 0).is_err());
    }

    /// erf via its Maclaurin series, summed until terms vanish.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let contribution = term / (2.0 * n + 1.0);
            sum += contribution;
            if contribution.abs() < 1e-18 {
                break;
            }
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn psr_matches_series_oracle() {
        let pe = 0.5 * (1.0 - erf_series(1.0));
        let expected = (1.0 - pe).powf(800.0);
        let got = packet_success_prob(1.0, 800).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }
}
