use std::io::Write;

use super::config::Protocol;

pub const METRICS_HEADER: [&str; 9] = [
    "protocol",
    "node_count",
    "seed",
    "pdr",
    "avg_delay_s",
    "avg_energy_j",
    "packets_sent",
    "packets_delivered",
    "total_energy_j",
];

/// Outcome of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimMetrics {
    pub packet_delivery_ratio: f64,
    /// Mean source-to-sink delay of delivered packets; NaN when none arrived.
    pub avg_end_to_end_delay: f64,
    /// Total network energy divided by delivered packets; infinite when none
    /// arrived.
    pub avg_energy_per_delivered_packet: f64,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub total_energy: f64,
}

/// One row of a simulation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub protocol: Protocol,
    pub node_count: usize,
    pub seed: u64,
    pub metrics: SimMetrics,
}

pub fn write_metrics_csv<W: Write>(writer: W, rows: &[SimRow]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(METRICS_HEADER)?;
    for r in rows {
        let m = &r.metrics;
        wtr.write_record([
            r.protocol.name().to_string(),
            r.node_count.to_string(),
            r.seed.to_string(),
            m.packet_delivery_ratio.to_string(),
            m.avg_end_to_end_delay.to_string(),
            m.avg_energy_per_delivered_packet.to_string(),
            m.packets_sent.to_string(),
            m.packets_delivered.to_string(),
            m.total_energy.to_string(),
        ])?;
    }
    wtr.flush()
}
