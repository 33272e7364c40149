use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Protocol, SimConfig};
use super::energy::{energy_charge, Activity, EnergyLedger, EnergyModel};
use super::link::{distance, LinkModel};
use super::metrics::SimMetrics;
use super::mobility::mobility_step;
use super::node::{NeighborRecord, Node, NodeState};
use super::packet::{Acked, Packet, PacketKind};
use super::scoring::{rank_carp_like, rank_dbcar, CarpCandidate, DbcarCandidate};
use crate::channel::{db_to_linear, packet_success_prob};
use crate::error::Result;
use crate::estimators::{CompressionPolicy, NnrConfig};

/// Random stream used for node placement and initialization offsets.
pub const DEPLOY_STREAM: u64 = 1;
/// Random stream used for mobility.
pub const MOBILITY_STREAM: u64 = 2;
/// Random stream used for the per-reception delivery draws.
pub const LOSS_STREAM: u64 = 3;

/// The ChaCha stream `stream` of the run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Node positions. Ids below `sink_count` are sinks; the last id is the
/// source.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub positions: Vec<[f64; 3]>,
    pub sink_count: usize,
}

impl Deployment {
    pub fn source(&self) -> usize {
        self.positions.len() - 1
    }
}

/// Uniform placement in the volume, sinks on the surface and the source on
/// the deepest plane.
pub fn deploy(cfg: &SimConfig) -> Result<Deployment> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, DEPLOY_STREAM);
    let [ax, ay, az] = cfg.area;
    let positions = (0..cfg.node_count)
        .map(|id| {
            let x = rng.random_range(0.0..=ax);
            let y = rng.random_range(0.0..=ay);
            let z = if id < cfg.sink_count {
                0.0
            } else if id == cfg.node_count - 1 {
                az
            } else {
                rng.random_range(0.0..=az)
            };
            [x, y, z]
        })
        .collect();
    Ok(Deployment {
        positions,
        sink_count: cfg.sink_count,
    })
}

/// One delivery draw, kept when logging is enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reception {
    pub time: f64,
    pub sender: usize,
    pub receiver: usize,
    pub kind: PacketKind,
    pub snr_db: f64,
    pub success_prob: f64,
    pub decoded: bool,
}

/// Diagnostic counters beyond the headline metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimCounters {
    pub transmissions: u64,
    pub data_transmissions: u64,
    pub receptions: u64,
    pub decoded: u64,
    pub retransmissions: u64,
    pub dropped_no_candidate: u64,
    pub dropped_retries: u64,
    pub dropped_ttl: u64,
    pub dropped_no_energy: u64,
    pub dbr_suppressed: u64,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    InitStart,
    InitEnd,
    Generate,
    MobilityTick,
    Arrival {
        sender: usize,
        packet: Packet,
        distance: f64,
    },
    HandshakeWindowEnd {
        token: u64,
    },
    AckTimeout {
        token: u64,
    },
    RetryCycle {
        token: u64,
    },
    HoldExpire {
        key: (usize, u64),
        token: u64,
    },
}

struct Scheduled {
    time: f64,
    seq: u64,
    node: usize,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    /// Reversed so the max-heap pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
            .then_with(|| other.node.cmp(&self.node))
    }
}

enum Phase {
    Handshake { token: u64, responders: BTreeSet<usize> },
    AwaitAck { token: u64, forwarder: usize },
    Backoff { token: u64 },
}

/// A data packet a node is currently trying to pass on.
struct Hop {
    packet: Packet,
    phase: Phase,
    ranked: Vec<usize>,
    choice: usize,
    attempts: u32,
    empty_rounds: u32,
}

#[derive(Default)]
struct Relay {
    queue: VecDeque<Packet>,
    current: Option<Hop>,
}

struct Hold {
    packet: Packet,
    token: u64,
}

/// A discrete-event run of one protocol over one deployment.
pub struct Simulation {
    cfg: SimConfig,
    link: LinkModel,
    energy: EnergyModel,
    nnr: NnrConfig,
    history: Option<CompressionPolicy>,
    nodes: Vec<Node>,
    source: usize,
    queue: BinaryHeap<Scheduled>,
    now: f64,
    event_seq: u64,
    next_token: u64,
    next_sequence: u64,
    mobility_rng: ChaCha8Rng,
    loss_rng: ChaCha8Rng,
    ledger: EnergyLedger,
    busy_until: Vec<f64>,
    relays: Vec<Relay>,
    holds: Vec<BTreeMap<(usize, u64), Hold>>,
    seen: Vec<BTreeSet<(usize, u64)>>,
    generated: u64,
    delivered: BTreeMap<(usize, u64), f64>,
    counters: SimCounters,
    log: Option<Vec<Reception>>,
}

impl Simulation {
    pub fn new(cfg: SimConfig, deployment: Deployment) -> Result<Self> {
        cfg.validate()?;
        if deployment.positions.len() < 2 || deployment.sink_count == 0 {
            return Err(crate::Error::Config(
                "a deployment needs at least one sink and a source".into(),
            ));
        }
        if deployment.sink_count >= deployment.positions.len() {
            return Err(crate::Error::Config("the source cannot be a sink".into()));
        }
        let n = deployment.positions.len();
        let source = deployment.source();
        let nodes = deployment
            .positions
            .iter()
            .enumerate()
            .map(|(id, &p)| Node::new(id, p, cfg.initial_energy_j, id < deployment.sink_count))
            .collect();
        let nnr = NnrConfig {
            window_m: cfg.nnr_window,
            k: cfg.nnr_k,
            ..NnrConfig::default()
        };
        let history = (cfg.history_limit > 0).then(|| CompressionPolicy {
            storage_limit: cfg.history_limit,
            ..CompressionPolicy::default()
        });
        let mut sim = Simulation {
            link: LinkModel::from_config(&cfg),
            energy: EnergyModel::from_config(&cfg),
            nnr,
            history,
            nodes,
            source,
            queue: BinaryHeap::new(),
            now: 0.0,
            event_seq: 0,
            next_token: 0,
            next_sequence: 0,
            mobility_rng: stream_rng(cfg.seed, MOBILITY_STREAM),
            loss_rng: stream_rng(cfg.seed, LOSS_STREAM),
            ledger: EnergyLedger::default(),
            busy_until: vec![0.0; n],
            relays: (0..n).map(|_| Relay::default()).collect(),
            holds: (0..n).map(|_| BTreeMap::new()).collect(),
            seen: vec![BTreeSet::new(); n],
            generated: 0,
            delivered: BTreeMap::new(),
            counters: SimCounters::default(),
            log: None,
            cfg,
        };
        sim.schedule_start();
        Ok(sim)
    }

    /// Keeps every delivery draw for inspection.
    pub fn enable_log(&mut self) {
        self.log = Some(Vec::new());
    }

    pub fn log(&self) -> &[Reception] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn counters(&self) -> &SimCounters {
        &self.counters
    }

    /// End-to-end delay of every delivered packet, keyed by (source, sequence).
    pub fn deliveries(&self) -> &BTreeMap<(usize, u64), f64> {
        &self.delivered
    }

    /// Length of the handshake response window.
    pub fn handshake_window(&self) -> f64 {
        2.0 * (self.cfg.airtime(self.cfg.control_bytes) + self.cfg.max_propagation_s()) + self.cfg.guard_s
    }

    fn ack_timeout(&self) -> f64 {
        2.0 * self.cfg.max_propagation_s() + self.cfg.airtime(self.cfg.control_bytes) + self.cfg.guard_s
    }

    fn schedule(&mut self, time: f64, node: usize, event: Event) {
        self.event_seq += 1;
        self.queue.push(Scheduled {
            time,
            seq: self.event_seq,
            node,
            event,
        });
    }

    fn token(&mut self) -> u64 {
        self.next_token += 1;
        self.next_token
    }

    fn schedule_start(&mut self) {
        let n = self.nodes.len();
        let interval = 1.0 / self.cfg.packet_rate_hz;
        if self.cfg.protocol.uses_handshake() {
            // Initialization rounds are spread over the first half interval
            // and run back to back when there is room.
            let spacing = (self.handshake_window() + self.cfg.guard_s).min(0.5 * interval / n as f64);
            for id in 0..n {
                self.schedule(id as f64 * spacing, id, Event::InitStart);
            }
        } else {
            for id in 0..n {
                self.schedule(0.0, id, Event::InitEnd);
            }
        }
        self.schedule(interval, self.source, Event::Generate);
        self.schedule(self.cfg.mobility_step_s, 0, Event::MobilityTick);
    }

    /// Processes events up to and including time `until`.
    pub fn run_until(&mut self, until: f64) -> Result<()> {
        let end = until.min(self.cfg.duration_s);
        while let Some(next) = self.queue.peek() {
            if next.time > end {
                break;
            }
            let ev = self.queue.pop().expect("peeked");
            self.now = ev.time;
            self.handle(ev.node, ev.event)?;
        }
        self.now = self.now.max(end);
        Ok(())
    }

    /// Runs to the configured duration and reports the metrics.
    pub fn run(mut self) -> Result<SimMetrics> {
        self.run_until(self.cfg.duration_s)?;
        Ok(self.metrics())
    }

    pub fn metrics(&self) -> SimMetrics {
        let delivered = self.delivered.len() as u64;
        let total_energy = self.ledger.total();
        SimMetrics {
            packet_delivery_ratio: if self.generated == 0 {
                0.0
            } else {
                delivered as f64 / self.generated as f64
            },
            avg_end_to_end_delay: if delivered == 0 {
                f64::NAN
            } else {
                self.delivered.values().sum::<f64>() / delivered as f64
            },
            avg_energy_per_delivered_packet: if delivered == 0 {
                f64::INFINITY
            } else {
                total_energy / delivered as f64
            },
            packets_sent: self.generated,
            packets_delivered: delivered,
            total_energy,
        }
    }

    fn charge(&mut self, node: usize, activity: Activity) {
        let joules = energy_charge(&mut self.nodes[node].energy_residual, activity, &self.energy);
        self.ledger.add(activity, joules);
    }

    fn new_packet(&self, sender: usize, kind: PacketKind) -> Packet {
        let node = &self.nodes[sender];
        Packet {
            kind,
            source_id: sender,
            sender_id: sender,
            designated_forwarder_id: None,
            payload_bytes: match kind {
                PacketKind::Data => self.cfg.data_bytes,
                _ => self.cfg.control_bytes,
            },
            sequence: 0,
            birth_time: self.now,
            hop_count: 0,
            sender_depth: node.depth(),
            sender_energy_ratio: node.energy_ratio(),
        }
    }

    /// Puts `packet` on the channel from `sender` once the sender's previous
    /// transmission has finished. Returns the end of transmission, or `None`
    /// when the sender has no energy left.
    fn transmit(&mut self, sender: usize, mut packet: Packet) -> Option<f64> {
        if !self.nodes[sender].can_transmit() {
            self.counters.dropped_no_energy += 1;
            return None;
        }
        packet.sender_id = sender;
        packet.sender_depth = self.nodes[sender].depth();
        packet.sender_energy_ratio = self.nodes[sender].energy_ratio();
        let airtime = self.cfg.airtime(packet.payload_bytes);
        let start = self.now.max(self.busy_until[sender]);
        let end = start + airtime;
        self.busy_until[sender] = end;
        self.charge(
            sender,
            Activity::Send {
                bytes: packet.payload_bytes,
            },
        );
        self.counters.transmissions += 1;
        if packet.is_data() {
            self.counters.data_transmissions += 1;
        }
        let origin = self.nodes[sender].position;
        for j in 0..self.nodes.len() {
            if j == sender {
                continue;
            }
            let d = distance(&origin, &self.nodes[j].position);
            if d <= self.cfg.tx_range_m {
                self.schedule(
                    end + d / self.cfg.sound_speed_mps,
                    j,
                    Event::Arrival {
                        sender,
                        packet,
                        distance: d,
                    },
                );
            }
        }
        Some(end)
    }

    fn handle(&mut self, node: usize, event: Event) -> Result<()> {
        match event {
            Event::InitStart => {
                let token = self.token();
                let mut hs = self.new_packet(node, PacketKind::Handshake);
                hs.sequence = token;
                self.transmit(node, hs);
                let end = self.now + self.handshake_window();
                self.schedule(end, node, Event::InitEnd);
            }
            Event::InitEnd => self.nodes[node].set_state(NodeState::Listening)?,
            Event::Generate => self.generate()?,
            Event::MobilityTick => self.mobility_tick(),
            Event::Arrival {
                sender,
                packet,
                distance,
            } => self.arrival(node, sender, packet, distance)?,
            Event::HandshakeWindowEnd { token } => self.window_end(node, token)?,
            Event::AckTimeout { token } => self.ack_timeout_fired(node, token)?,
            Event::RetryCycle { token } => {
                let backoff = matches!(
                    self.relays[node].current.as_ref().map(|h| &h.phase),
                    Some(Phase::Backoff { token: t }) if *t == token
                );
                if backoff {
                    self.begin_handshake(node)?;
                }
            }
            Event::HoldExpire { key, token } => self.hold_expire(node, key, token)?,
        }
        Ok(())
    }

    fn generate(&mut self) -> Result<()> {
        let src = self.source;
        self.next_sequence += 1;
        self.generated += 1;
        let mut packet = self.new_packet(src, PacketKind::Data);
        packet.sequence = self.next_sequence;
        self.seen[src].insert(packet.key());
        if self.cfg.protocol.uses_handshake() {
            self.enqueue(src, packet)?;
        } else {
            self.transmit(src, packet);
        }
        let next = self.now + 1.0 / self.cfg.packet_rate_hz;
        if next <= self.cfg.duration_s {
            self.schedule(next, src, Event::Generate);
        }
        Ok(())
    }

    fn mobility_tick(&mut self) {
        let dt = self.cfg.mobility_step_s;
        for id in 0..self.nodes.len() {
            if !self.nodes[id].is_sink {
                self.nodes[id].position = mobility_step(
                    self.nodes[id].position,
                    dt,
                    self.cfg.mobility_speed_mps,
                    self.cfg.area,
                    &mut self.mobility_rng,
                );
            }
            self.charge(id, Activity::Idle { duration_s: dt });
        }
        let next = self.now + dt;
        if next <= self.cfg.duration_s {
            self.schedule(next, 0, Event::MobilityTick);
        }
    }

    fn arrival(&mut self, node: usize, sender: usize, packet: Packet, distance: f64) -> Result<()> {
        self.charge(
            node,
            Activity::Receive {
                bytes: packet.payload_bytes,
            },
        );
        let snr_db = self.link.snr_db(sender, node, distance, self.now)?;
        let success_prob = packet_success_prob(db_to_linear(snr_db), packet.payload_bytes * 8)?;
        let draw: f64 = self.loss_rng.random();
        let decoded = draw < success_prob;
        self.counters.receptions += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(Reception {
                time: self.now,
                sender,
                receiver: node,
                kind: packet.kind,
                snr_db,
                success_prob,
                decoded,
            });
        }
        if !decoded {
            return Ok(());
        }
        self.counters.decoded += 1;

        if self.cfg.protocol.uses_handshake() {
            self.listen(node, sender, &packet, snr_db)?;
        }
        match packet.kind {
            PacketKind::Handshake => {
                if self.cfg.protocol.uses_handshake() {
                    let mut ack = self.new_packet(
                        node,
                        PacketKind::Ack {
                            to: sender,
                            of: Acked::Handshake,
                        },
                    );
                    ack.sequence = packet.sequence;
                    self.transmit(node, ack);
                }
            }
            PacketKind::Ack { to, of } if to == node => self.ack_received(node, sender, &packet, of)?,
            PacketKind::Ack { .. } => {}
            PacketKind::Data => {
                if self.cfg.protocol.uses_handshake() {
                    self.data_handshake_protocol(node, sender, packet)?;
                } else {
                    self.data_dbr(node, packet)?;
                }
            }
        }
        Ok(())
    }

    /// Updates the sender's record with what this packet revealed.
    fn listen(&mut self, node: usize, sender: usize, packet: &Packet, snr_db: f64) -> Result<()> {
        let (nnr, alpha, history) = (self.nnr, self.cfg.ema_alpha, self.history);
        let neighbors = &mut self.nodes[node].neighbors;
        let record = match neighbors.entry(sender) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(NeighborRecord::new(sender, nnr, alpha, history)?)
            }
        };
        record.observe(self.now, snr_db, packet.sender_energy_ratio, packet.sender_depth)?;
        Ok(())
    }

    fn ack_received(&mut self, node: usize, sender: usize, packet: &Packet, of: Acked) -> Result<()> {
        let Some(hop) = self.relays[node].current.as_mut() else {
            return Ok(());
        };
        match (&mut hop.phase, of) {
            (Phase::Handshake { token, responders }, Acked::Handshake) if *token == packet.sequence => {
                responders.insert(sender);
            }
            (Phase::AwaitAck { forwarder, .. }, Acked::Data)
                if *forwarder == sender && hop.packet.key() == packet.key() =>
            {
                self.finish_hop(node)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn deliver(&mut self, packet: &Packet) {
        if !self.delivered.contains_key(&packet.key()) {
            self.delivered.insert(packet.key(), self.now - packet.birth_time);
        }
    }

    fn data_handshake_protocol(&mut self, node: usize, sender: usize, packet: Packet) -> Result<()> {
        if packet.designated_forwarder_id != Some(node) {
            return Ok(());
        }
        let mut ack = self.new_packet(
            node,
            PacketKind::Ack {
                to: sender,
                of: Acked::Data,
            },
        );
        ack.source_id = packet.source_id;
        ack.sequence = packet.sequence;
        self.transmit(node, ack);

        if self.nodes[node].is_sink {
            self.deliver(&packet);
            return Ok(());
        }
        if !self.seen[node].insert(packet.key()) {
            return Ok(());
        }
        if packet.hop_count + 1 > self.cfg.ttl {
            self.counters.dropped_ttl += 1;
            return Ok(());
        }
        let mut copy = packet;
        copy.hop_count += 1;
        copy.designated_forwarder_id = None;
        self.enqueue(node, copy)
    }

    fn enqueue(&mut self, node: usize, packet: Packet) -> Result<()> {
        if self.nodes[node].state() == NodeState::Initialization {
            self.nodes[node].set_state(NodeState::Listening)?;
        }
        self.nodes[node].set_state(NodeState::Forwarding)?;
        self.relays[node].queue.push_back(packet);
        if self.relays[node].current.is_none() {
            self.start_next_hop(node)?;
        }
        Ok(())
    }

    fn start_next_hop(&mut self, node: usize) -> Result<()> {
        match self.relays[node].queue.pop_front() {
            Some(packet) => {
                self.relays[node].current = Some(Hop {
                    packet,
                    phase: Phase::Backoff { token: 0 },
                    ranked: Vec::new(),
                    choice: 0,
                    attempts: 0,
                    empty_rounds: 0,
                });
                self.begin_handshake(node)
            }
            None => self.nodes[node].set_state(NodeState::Listening),
        }
    }

    fn finish_hop(&mut self, node: usize) -> Result<()> {
        self.relays[node].current = None;
        self.start_next_hop(node)
    }

    fn begin_handshake(&mut self, node: usize) -> Result<()> {
        let token = self.token();
        let mut hs = self.new_packet(node, PacketKind::Handshake);
        hs.sequence = token;
        if self.transmit(node, hs).is_none() {
            return self.finish_hop(node);
        }
        let hop = self.relays[node].current.as_mut().expect("active hop");
        hop.phase = Phase::Handshake {
            token,
            responders: BTreeSet::new(),
        };
        let end = self.now + self.handshake_window();
        self.schedule(end, node, Event::HandshakeWindowEnd { token });
        Ok(())
    }

    fn rank_responders(&self, node: usize, responders: &BTreeSet<usize>) -> Result<Vec<usize>> {
        let me = &self.nodes[node];
        let records = responders.iter().filter_map(|r| me.neighbors.get(r));
        match self.cfg.protocol {
            Protocol::Dbcar => {
                let candidates: Vec<DbcarCandidate> = records
                    .filter_map(|rec| {
                        Some(DbcarCandidate {
                            id: rec.neighbor_id,
                            is_sink: self.nodes[rec.neighbor_id].is_sink,
                            delta_d: me.depth() - rec.last_depth,
                            s: rec.predicted_snr()?,
                            g: rec.gradient(),
                            m: rec.stats().mean()?,
                            v: rec.variance(),
                            e: rec.last_energy_ratio,
                        })
                    })
                    .collect();
                rank_dbcar(&candidates, self.cfg.gradient_alpha)
            }
            Protocol::CarpLike => {
                let candidates: Vec<CarpCandidate> = records
                    .filter_map(|rec| {
                        Some(CarpCandidate {
                            id: rec.neighbor_id,
                            is_sink: self.nodes[rec.neighbor_id].is_sink,
                            delta_d: me.depth() - rec.last_depth,
                            ema_s: rec.ema().prediction()?,
                        })
                    })
                    .collect();
                Ok(rank_carp_like(&candidates))
            }
            Protocol::Dbr => Ok(Vec::new()),
        }
    }

    fn window_end(&mut self, node: usize, token: u64) -> Result<()> {
        let responders = match self.relays[node].current.as_mut().map(|h| &mut h.phase) {
            Some(Phase::Handshake { token: t, responders }) if *t == token => std::mem::take(responders),
            _ => return Ok(()),
        };
        let mut ranked = self.rank_responders(node, &responders)?;
        ranked.truncate(2);
        let retry_limit = self.cfg.retry_limit;
        let hop = self.relays[node].current.as_mut().expect("active hop");
        if ranked.is_empty() {
            hop.empty_rounds += 1;
            if hop.empty_rounds > retry_limit {
                self.counters.dropped_no_candidate += 1;
                return self.finish_hop(node);
            }
            let retry = self.token();
            let hop = self.relays[node].current.as_mut().expect("active hop");
            hop.phase = Phase::Backoff { token: retry };
            let at = self.now + self.cfg.retry_backoff_s;
            self.schedule(at, node, Event::RetryCycle { token: retry });
            return Ok(());
        }
        hop.ranked = ranked;
        hop.choice = 0;
        hop.attempts = 0;
        self.send_data(node)
    }

    fn send_data(&mut self, node: usize) -> Result<()> {
        let hop = self.relays[node].current.as_ref().expect("active hop");
        let forwarder = hop.ranked[hop.choice];
        let mut packet = hop.packet;
        packet.designated_forwarder_id = Some(forwarder);
        let Some(end) = self.transmit(node, packet) else {
            return self.finish_hop(node);
        };
        let token = self.token();
        self.relays[node].current.as_mut().expect("active hop").phase = Phase::AwaitAck { token, forwarder };
        let at = end + self.ack_timeout();
        self.schedule(at, node, Event::AckTimeout { token });
        Ok(())
    }

    fn ack_timeout_fired(&mut self, node: usize, token: u64) -> Result<()> {
        let retry_limit = self.cfg.retry_limit;
        let Some(hop) = self.relays[node].current.as_mut() else {
            return Ok(());
        };
        if !matches!(hop.phase, Phase::AwaitAck { token: t, .. } if t == token) {
            return Ok(());
        }
        hop.attempts += 1;
        if hop.attempts > retry_limit {
            if hop.choice + 1 < hop.ranked.len() {
                hop.choice += 1;
                hop.attempts = 0;
            } else {
                self.counters.dropped_retries += 1;
                return self.finish_hop(node);
            }
        }
        self.counters.retransmissions += 1;
        self.send_data(node)
    }

    fn data_dbr(&mut self, node: usize, packet: Packet) -> Result<()> {
        if self.nodes[node].is_sink {
            self.deliver(&packet);
            return Ok(());
        }
        let key = packet.key();
        if self.holds[node].remove(&key).is_some() {
            self.counters.dbr_suppressed += 1;
            if self.holds[node].is_empty() {
                self.nodes[node].set_state(NodeState::Listening)?;
            }
            return Ok(());
        }
        if self.seen[node].contains(&key) {
            return Ok(());
        }
        let delta = self.cfg.dbr_delta();
        let gain = packet.sender_depth - self.nodes[node].depth();
        if gain <= delta {
            return Ok(());
        }
        if packet.hop_count + 1 > self.cfg.ttl {
            self.counters.dropped_ttl += 1;
            return Ok(());
        }
        self.seen[node].insert(key);
        let range = self.cfg.tx_range_m;
        let tau = self.cfg.max_propagation_s();
        let hold = 2.0 * tau / delta * (range - gain).max(0.0);
        let token = self.token();
        let mut copy = packet;
        copy.hop_count += 1;
        self.holds[node].insert(key, Hold { packet: copy, token });
        self.nodes[node].set_state(NodeState::Forwarding)?;
        let at = self.now + hold;
        self.schedule(at, node, Event::HoldExpire { key, token });
        Ok(())
    }

    fn hold_expire(&mut self, node: usize, key: (usize, u64), token: u64) -> Result<()> {
        match self.holds[node].get(&key) {
            Some(h) if h.token == token => {}
            _ => return Ok(()),
        }
        let hold = self.holds[node].remove(&key).expect("checked");
        self.transmit(node, hold.packet);
        if self.holds[node].is_empty() {
            self.nodes[node].set_state(NodeState::Listening)?;
        }
        Ok(())
    }
}

/// Deploys nodes from the config's seed and runs to the configured duration.
pub fn run_sim(cfg: &SimConfig) -> Result<SimMetrics> {
    let deployment = deploy(cfg)?;
    Simulation::new(*cfg, deployment)?.run()
}
