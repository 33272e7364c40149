use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimators::{
    CompressionPolicy, EmaState, NnrConfig, NnrPredictor, RunningStats, SnrSample, SnrSeries,
};

/// Operating process of a node. Legal moves: Initialization -> Listening,
/// Listening -> Forwarding and Forwarding -> Listening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeState {
    Initialization,
    Listening,
    Forwarding,
}

impl NodeState {
    pub fn name(self) -> &'static str {
        match self {
            NodeState::Initialization => "initialization",
            NodeState::Listening => "listening",
            NodeState::Forwarding => "forwarding",
        }
    }

    pub fn can_move_to(self, to: NodeState) -> bool {
        matches!(
            (self, to),
            (NodeState::Initialization, NodeState::Listening)
                | (NodeState::Listening, NodeState::Forwarding)
                | (NodeState::Forwarding, NodeState::Listening)
        )
    }
}

/// A node's view of one neighbor: the SNR history of packets heard from it
/// and the latest energy and depth it advertised.
#[derive(Debug, Clone)]
pub struct NeighborRecord {
    pub neighbor_id: usize,
    predictor: NnrPredictor,
    stats: RunningStats,
    ema: EmaState,
    pub last_energy_ratio: f64,
    pub last_depth: f64,
}

impl NeighborRecord {
    pub fn new(
        neighbor_id: usize,
        nnr: NnrConfig,
        ema_alpha: f64,
        history: Option<CompressionPolicy>,
    ) -> Result<Self> {
        let mut predictor = NnrPredictor::new(nnr)?;
        if let Some(policy) = history {
            predictor = predictor.with_compression(policy)?;
        }
        Ok(NeighborRecord {
            neighbor_id,
            predictor,
            stats: RunningStats::new(),
            ema: EmaState::new(ema_alpha)?,
            last_energy_ratio: 1.0,
            last_depth: 0.0,
        })
    }

    /// Records a packet heard at `time` with the given SNR. Returns false,
    /// leaving the SNR history untouched, when `time` does not follow the
    /// previous sample.
    pub fn observe(&mut self, time: f64, snr_db: f64, energy_ratio: f64, depth: f64) -> Result<bool> {
        self.last_energy_ratio = energy_ratio.clamp(0.0, 1.0);
        self.last_depth = depth;
        if self.predictor.series().last().is_some_and(|s| time <= s.time) {
            return Ok(false);
        }
        self.predictor.push(SnrSample::new(time, snr_db))?;
        self.stats.update(snr_db)?;
        self.ema.update(snr_db)?;
        Ok(true)
    }

    pub fn series(&self) -> &SnrSeries {
        self.predictor.series()
    }

    pub fn stats(&self) -> &RunningStats {
        &self.stats
    }

    pub fn ema(&self) -> &EmaState {
        &self.ema
    }

    /// NNR prediction of the next SNR, or the latest sample while the
    /// history is too short to predict.
    pub fn predicted_snr(&self) -> Option<f64> {
        if self.predictor.can_predict() {
            self.predictor.predict().ok()
        } else {
            self.series().last().map(|s| s.snr_db)
        }
    }

    /// Difference between the two most recent samples; zero with fewer.
    pub fn gradient(&self) -> f64 {
        let v = self.series().values();
        match v.len() {
            0 | 1 => 0.0,
            n => v[n - 1] - v[n - 2],
        }
    }

    /// Historical variance, zero while it is undefined.
    pub fn variance(&self) -> f64 {
        self.stats.variance().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: usize,
    /// Meters; `position[2]` is depth, positive downward.
    pub position: [f64; 3],
    pub energy_initial: f64,
    pub energy_residual: f64,
    pub is_sink: bool,
    pub neighbors: BTreeMap<usize, NeighborRecord>,
    state: NodeState,
    transitions: u64,
}

impl Node {
    pub fn new(id: usize, position: [f64; 3], energy: f64, is_sink: bool) -> Self {
        Node {
            id,
            position,
            energy_initial: energy,
            energy_residual: energy,
            is_sink,
            neighbors: BTreeMap::new(),
            state: NodeState::Initialization,
            transitions: 0,
        }
    }

    pub fn state(&self) -> NodeState {
        self.state
    }

    /// Number of state changes so far.
    pub fn transitions(&self) -> u64 {
        self.transitions
    }

    /// Moves to `to`; staying in the current state is a no-op.
    pub fn set_state(&mut self, to: NodeState) -> Result<()> {
        if to == self.state {
            return Ok(());
        }
        if !self.state.can_move_to(to) {
            return Err(Error::StateTransition {
                node: self.id,
                from: self.state.name(),
                to: to.name(),
            });
        }
        self.state = to;
        self.transitions += 1;
        Ok(())
    }

    pub fn depth(&self) -> f64 {
        self.position[2]
    }

    pub fn energy_ratio(&self) -> f64 {
        (self.energy_residual / self.energy_initial).clamp(0.0, 1.0)
    }

    pub fn can_transmit(&self) -> bool {
        self.energy_residual > 0.0
    }
}
