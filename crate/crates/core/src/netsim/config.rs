use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Dbcar,
    Dbr,
    CarpLike,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Dbcar, Protocol::Dbr, Protocol::CarpLike];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Dbcar => "dbcar",
            Protocol::Dbr => "dbr",
            Protocol::CarpLike => "carp",
        }
    }

    /// Protocols that pick a single forwarder after a handshake round.
    pub fn uses_handshake(self) -> bool {
        !matches!(self, Protocol::Dbr)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dbcar" => Ok(Protocol::Dbcar),
            "dbr" => Ok(Protocol::Dbr),
            "carp" | "carp-like" | "carp_like" => Ok(Protocol::CarpLike),
            other => Err(Error::Usage(format!(
                "unknown protocol '{other}' (valid: dbcar, dbr, carp)"
            ))),
        }
    }
}

/// Everything a simulation run depends on. Every field is addressable by the
/// key listed in [`SimConfig::KEYS`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Deployment volume, meters; depth is the third axis, positive downward.
    pub area: [f64; 3],
    /// Total nodes, sinks included.
    pub node_count: usize,
    pub sink_count: usize,
    pub tx_range_m: f64,
    pub bit_rate_bps: f64,
    pub power_send_w: f64,
    pub power_recv_w: f64,
    pub power_idle_w: f64,
    pub initial_energy_j: f64,
    /// Data packets generated by the source per second.
    pub packet_rate_hz: f64,
    pub duration_s: f64,
    pub sound_speed_mps: f64,
    pub protocol: Protocol,
    pub gradient_alpha: f64,
    /// DBR depth threshold and holding-time parameter; `None` means `R / 4`.
    pub dbr_delta_m: Option<f64>,
    pub ttl: u32,
    pub retry_limit: u32,
    pub mobility_speed_mps: f64,
    /// Mobility and idle-energy tick.
    pub mobility_step_s: f64,
    pub data_bytes: u32,
    pub control_bytes: u32,
    /// Extra wait added to handshake windows and Ack timeouts.
    pub guard_s: f64,
    /// Wait before retrying a packet that found no eligible forwarder.
    pub retry_backoff_s: f64,
    pub channel: ChannelParams,
    /// Mean per-link amplitude of the periodic SNR fluctuation.
    pub fluct_amplitude_db: f64,
    pub fluct_period_s: f64,
    pub fluct_noise_db: f64,
    /// Interval over which the noise part of a link's SNR stays constant.
    pub fluct_coherence_s: f64,
    pub ema_alpha: f64,
    pub nnr_window: usize,
    pub nnr_k: usize,
    /// Storage limit for per-neighbor SNR histories; 0 disables compression.
    pub history_limit: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area: [500.0, 500.0, 500.0],
            node_count: 100,
            sink_count: 3,
            tx_range_m: 150.0,
            bit_rate_bps: 10_000.0,
            power_send_w: 2.0,
            power_recv_w: 0.1,
            power_idle_w: 0.01,
            initial_energy_j: 1000.0,
            packet_rate_hz: 0.1,
            duration_s: 10_000.0,
            sound_speed_mps: 1500.0,
            protocol: Protocol::Dbcar,
            gradient_alpha: 0.15,
            dbr_delta_m: None,
            ttl: 50,
            retry_limit: 3,
            mobility_speed_mps: 0.5,
            mobility_step_s: 10.0,
            data_bytes: 100,
            control_bytes: 20,
            guard_s: 0.02,
            retry_backoff_s: 1.0,
            channel: ChannelParams::default(),
            fluct_amplitude_db: 4.0,
            fluct_period_s: 600.0,
            fluct_noise_db: 1.0,
            fluct_coherence_s: 2.0,
            ema_alpha: crate::estimators::DEFAULT_EMA_ALPHA,
            nnr_window: 3,
            nnr_k: 3,
            history_limit: 0,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Every key accepted by [`SimConfig::set`], in documentation order.
    pub const KEYS: [&'static str; 40] = [
        "area_x_m",
        "area_y_m",
        "area_z_m",
        "node_count",
        "sink_count",
        "tx_range_m",
        "bit_rate_bps",
        "power_send_w",
        "power_recv_w",
        "power_idle_w",
        "initial_energy_j",
        "packet_rate_hz",
        "duration_s",
        "sound_speed_mps",
        "protocol",
        "gradient_alpha",
        "dbr_delta_m",
        "ttl",
        "retry_limit",
        "mobility_speed_mps",
        "mobility_step_s",
        "data_bytes",
        "control_bytes",
        "guard_s",
        "retry_backoff_s",
        "tx_power_w",
        "carrier_khz",
        "spreading_exponent",
        "noise_psd_w_per_hz",
        "noise_bandwidth_hz",
        "fluct_amplitude_db",
        "fluct_period_s",
        "fluct_noise_db",
        "fluct_coherence_s",
        "ema_alpha",
        "nnr_window",
        "nnr_k",
        "history_limit",
        "seed",
        "area_m",
    ];

    pub fn dbr_delta(&self) -> f64 {
        self.dbr_delta_m.unwrap_or(self.tx_range_m / 4.0)
    }

    /// Seconds needed to put `bytes` on the channel.
    pub fn airtime(&self, bytes: u32) -> f64 {
        f64::from(bytes) * 8.0 / self.bit_rate_bps
    }

    /// One-way propagation delay across the full transmission range.
    pub fn max_propagation_s(&self) -> f64 {
        self.tx_range_m / self.sound_speed_mps
    }

    /// Sets one field from its key and textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |e: &dyn fmt::Display| Error::Config(format!("key '{key}': cannot parse '{value}': {e}"));
        let f = || value.parse::<f64>().map_err(|e| bad(&e));
        let u = || value.parse::<usize>().map_err(|e| bad(&e));
        let u32_ = || value.parse::<u32>().map_err(|e| bad(&e));
        match key {
            "area_x_m" => self.area[0] = f()?,
            "area_y_m" => self.area[1] = f()?,
            "area_z_m" => self.area[2] = f()?,
            "area_m" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::Config(format!(
                        "key 'area_m': expected three comma-separated numbers, got '{value}'"
                    )));
                }
                for (slot, part) in self.area.iter_mut().zip(parts) {
                    *slot = part.parse::<f64>().map_err(|e| bad(&e))?;
                }
            }
            "node_count" => self.node_count = u()?,
            "sink_count" => self.sink_count = u()?,
            "tx_range_m" => self.tx_range_m = f()?,
            "bit_rate_bps" => self.bit_rate_bps = f()?,
            "power_send_w" => self.power_send_w = f()?,
            "power_recv_w" => self.power_recv_w = f()?,
            "power_idle_w" => self.power_idle_w = f()?,
            "initial_energy_j" => self.initial_energy_j = f()?,
            "packet_rate_hz" => self.packet_rate_hz = f()?,
            "duration_s" => self.duration_s = f()?,
            "sound_speed_mps" => self.sound_speed_mps = f()?,
            "protocol" => {
                self.protocol = value
                    .parse()
                    .map_err(|e: Error| Error::Config(format!("key 'protocol': {e}")))?
            }
            "gradient_alpha" => self.gradient_alpha = f()?,
            "dbr_delta_m" => {
                self.dbr_delta_m = match value {
                    "" | "auto" => None,
                    _ => Some(f()?),
                }
            }
            "ttl" => self.ttl = u32_()?,
            "retry_limit" => self.retry_limit = u32_()?,
            "mobility_speed_mps" => self.mobility_speed_mps = f()?,
            "mobility_step_s" => self.mobility_step_s = f()?,
            "data_bytes" => self.data_bytes = u32_()?,
            "control_bytes" => self.control_bytes = u32_()?,
            "guard_s" => self.guard_s = f()?,
            "retry_backoff_s" => self.retry_backoff_s = f()?,
            "tx_power_w" => self.channel.tx_power_w = f()?,
            "carrier_khz" => self.channel.carrier_khz = f()?,
            "spreading_exponent" => self.channel.spreading_exponent = f()?,
            "noise_psd_w_per_hz" => self.channel.noise_psd_w_per_hz = f()?,
            "noise_bandwidth_hz" => self.channel.bandwidth_hz = f()?,
            "fluct_amplitude_db" => self.fluct_amplitude_db = f()?,
            "fluct_period_s" => self.fluct_period_s = f()?,
            "fluct_noise_db" => self.fluct_noise_db = f()?,
            "fluct_coherence_s" => self.fluct_coherence_s = f()?,
            "ema_alpha" => self.ema_alpha = f()?,
            "nnr_window" => self.nnr_window = u()?,
            "nnr_k" => self.nnr_k = u()?,
            "history_limit" => self.history_limit = u()?,
            "seed" => self.seed = value.parse::<u64>().map_err(|e| bad(&e))?,
            other => {
                return Err(Error::Config(format!(
                    "unknown config key '{other}' (valid keys: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// The configuration as `(key, value)` pairs that [`SimConfig::set`]
    /// accepts, so that applying them to a default config reproduces `self`.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let c = &self.channel;
        vec![
            ("area_x_m", self.area[0].to_string()),
            ("area_y_m", self.area[1].to_string()),
            ("area_z_m", self.area[2].to_string()),
            ("node_count", self.node_count.to_string()),
            ("sink_count", self.sink_count.to_string()),
            ("tx_range_m", self.tx_range_m.to_string()),
            ("bit_rate_bps", self.bit_rate_bps.to_string()),
            ("power_send_w", self.power_send_w.to_string()),
            ("power_recv_w", self.power_recv_w.to_string()),
            ("power_idle_w", self.power_idle_w.to_string()),
            ("initial_energy_j", self.initial_energy_j.to_string()),
            ("packet_rate_hz", self.packet_rate_hz.to_string()),
            ("duration_s", self.duration_s.to_string()),
            ("sound_speed_mps", self.sound_speed_mps.to_string()),
            ("protocol", self.protocol.to_string()),
            ("gradient_alpha", self.gradient_alpha.to_string()),
            (
                "dbr_delta_m",
                self.dbr_delta_m.map_or_else(|| "auto".to_string(), |d| d.to_string()),
            ),
            ("ttl", self.ttl.to_string()),
            ("retry_limit", self.retry_limit.to_string()),
            ("mobility_speed_mps", self.mobility_speed_mps.to_string()),
            ("mobility_step_s", self.mobility_step_s.to_string()),
            ("data_bytes", self.data_bytes.to_string()),
            ("control_bytes", self.control_bytes.to_string()),
            ("guard_s", self.guard_s.to_string()),
            ("retry_backoff_s", self.retry_backoff_s.to_string()),
            ("tx_power_w", c.tx_power_w.to_string()),
            ("carrier_khz", c.carrier_khz.to_string()),
            ("spreading_exponent", c.spreading_exponent.to_string()),
            ("noise_psd_w_per_hz", c.noise_psd_w_per_hz.to_string()),
            ("noise_bandwidth_hz", c.bandwidth_hz.to_string()),
            ("fluct_amplitude_db", self.fluct_amplitude_db.to_string()),
            ("fluct_period_s", self.fluct_period_s.to_string()),
            ("fluct_noise_db", self.fluct_noise_db.to_string()),
            ("fluct_coherence_s", self.fluct_coherence_s.to_string()),
            ("ema_alpha", self.ema_alpha.to_string()),
            ("nnr_window", self.nnr_window.to_string()),
            ("nnr_k", self.nnr_k.to_string()),
            ("history_limit", self.history_limit.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("area_x_m", self.area[0]),
            ("area_y_m", self.area[1]),
            ("area_z_m", self.area[2]),
            ("tx_range_m", self.tx_range_m),
            ("bit_rate_bps", self.bit_rate_bps),
            ("power_send_w", self.power_send_w),
            ("power_recv_w", self.power_recv_w),
            ("power_idle_w", self.power_idle_w),
            ("initial_energy_j", self.initial_energy_j),
            ("packet_rate_hz", self.packet_rate_hz),
            ("duration_s", self.duration_s),
            ("sound_speed_mps", self.sound_speed_mps),
            ("dbr_delta_m", self.dbr_delta()),
            ("mobility_step_s", self.mobility_step_s),
            ("retry_backoff_s", self.retry_backoff_s),
            ("fluct_period_s", self.fluct_period_s),
            ("fluct_coherence_s", self.fluct_coherence_s),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("guard_s", self.guard_s),
            ("mobility_speed_mps", self.mobility_speed_mps),
            ("fluct_amplitude_db", self.fluct_amplitude_db),
            ("fluct_noise_db", self.fluct_noise_db),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{key} must be non-negative, got {v}")));
            }
        }
        if self.node_count < 2 {
            return Err(Error::Config(format!(
                "node_count must be at least 2, got {}",
                self.node_count
            )));
        }
        if self.sink_count == 0 || self.sink_count >= self.node_count {
            return Err(Error::Config(format!(
                "sink_count must lie in [1, node_count - 1], got {} with node_count {}",
                self.sink_count, self.node_count
            )));
        }
        if !(0.0..=0.3).contains(&self.gradient_alpha) {
            return Err(Error::Config(format!(
                "gradient_alpha must lie in [0, 0.3], got {}",
                self.gradient_alpha
            )));
        }
        if self.ttl == 0 {
            return Err(Error::Config("ttl must be positive".into()));
        }
        if self.data_bytes == 0 || self.control_bytes == 0 {
            return Err(Error::Config("packet sizes must be positive".into()));
        }
        if !(self.ema_alpha > 0.0 && self.ema_alpha <= 1.0) {
            return Err(Error::Config(format!(
                "ema_alpha must lie in (0, 1], got {}",
                self.ema_alpha
            )));
        }
        if self.nnr_window == 0 || self.nnr_k == 0 {
            return Err(Error::Config("nnr_window and nnr_k must be positive".into()));
        }
        if self.history_limit == 1 {
            return Err(Error::Config("history_limit must be 0 (off) or at least 2".into()));
        }
        self.channel.validate()
    }
}
