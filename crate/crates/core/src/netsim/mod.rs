//! Discrete-event simulation of underwater sensor networks comparing
//! channel-aware forwarding (DBCAR) against depth-based (DBR) and
//! EMA-driven (CARP-like) baselines.

mod config;
mod energy;
mod engine;
mod link;
mod metrics;
mod mobility;
mod node;
mod packet;
mod scoring;

pub use config::{Protocol, SimConfig};
pub use energy::{energy_charge, Activity, EnergyLedger, EnergyModel};
pub use engine::{
    deploy, run_sim, stream_rng, Deployment, Reception, SimCounters, Simulation, DEPLOY_STREAM,
    LOSS_STREAM, MOBILITY_STREAM,
};
pub use link::{distance, link_snr_at, LinkModel, MIN_DISTANCE_M};
pub use metrics::{write_metrics_csv, SimMetrics, SimRow, METRICS_HEADER};
pub use mobility::mobility_step;
pub use node::{NeighborRecord, Node, NodeState};
pub use packet::{Acked, Packet, PacketKind};
pub use scoring::{
    carp_like_select, forwarder_score, gradient_adjusted_snr, rank_carp_like, rank_dbcar,
    select_forwarder, sgn, CarpCandidate, DbcarCandidate, V_FLOOR,
};
