use super::config::SimConfig;

/// Something a node spends energy on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activity {
    Send { bytes: u32 },
    Receive { bytes: u32 },
    Idle { duration_s: f64 },
}

/// Power draw per activity and the bit rate that turns packet sizes into
/// airtime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub power_send_w: f64,
    pub power_recv_w: f64,
    pub power_idle_w: f64,
    pub bit_rate_bps: f64,
}

impl EnergyModel {
    pub fn from_config(cfg: &SimConfig) -> Self {
        EnergyModel {
            power_send_w: cfg.power_send_w,
            power_recv_w: cfg.power_recv_w,
            power_idle_w: cfg.power_idle_w,
            bit_rate_bps: cfg.bit_rate_bps,
        }
    }

    /// Joules the activity costs, before clamping to the remaining budget.
    pub fn cost(&self, activity: Activity) -> f64 {
        let airtime = |bytes: u32| f64::from(bytes) * 8.0 / self.bit_rate_bps;
        match activity {
            Activity::Send { bytes } => self.power_send_w * airtime(bytes),
            Activity::Receive { bytes } => self.power_recv_w * airtime(bytes),
            Activity::Idle { duration_s } => self.power_idle_w * duration_s,
        }
    }
}

/// Energy totals split by activity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyLedger {
    pub send_j: f64,
    pub receive_j: f64,
    pub idle_j: f64,
}

impl EnergyLedger {
    pub fn total(&self) -> f64 {
        self.send_j + self.receive_j + self.idle_j
    }

    pub(crate) fn add(&mut self, activity: Activity, joules: f64) {
        match activity {
            Activity::Send { .. } => self.send_j += joules,
            Activity::Receive { .. } => self.receive_j += joules,
            Activity::Idle { .. } => self.idle_j += joules,
        }
    }
}

/// Deducts the cost of `activity` from `residual`, never going below zero,
/// and returns the joules actually deducted.
pub fn energy_charge(residual: &mut f64, activity: Activity, model: &EnergyModel) -> f64 {
    let charged = model.cost(activity).min(*residual).max(0.0);
    *residual -= charged;
    charged
}
