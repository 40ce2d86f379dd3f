use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::Result;
use crate::rng::RngStream;

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: usize,
    pub pos: Position,
    /// Residual energy in joules.
    pub energy: f64,
    pub initial_energy: f64,
    /// Bits generated per round.
    pub msg_len: u32,
    /// Bits sensed per round; only used as a clustering feature.
    pub sensed_data: u32,
    pub alive: bool,
    pub awake: bool,
}

impl NodeState {
    pub fn new(id: usize, pos: Position, initial_energy: f64, msg_len: u32, sensed_data: u32) -> Self {
        Self {
            id,
            pos,
            energy: initial_energy,
            initial_energy,
            msg_len,
            sensed_data,
            alive: true,
            awake: true,
        }
    }

    pub fn is_active(&self) -> bool {
        self.alive && self.awake
    }

    /// Deducts up to `joules`, clamping at zero, and returns what was
    /// actually taken. Death is applied separately by [`NodeState::settle`].
    pub fn spend(&mut self, joules: f64) -> f64 {
        let taken = joules.min(self.energy).max(0.0);
        self.energy -= taken;
        taken
    }

    /// Marks the node dead if its battery is exhausted.
    pub fn settle(&mut self) {
        if self.energy <= 0.0 {
            self.energy = 0.0;
            self.alive = false;
            self.awake = false;
        }
    }

    /// Energy spent so far, `I - e`.
    pub fn spent(&self) -> f64 {
        self.initial_energy - self.energy
    }
}

/// Places `node_count` nodes uniformly over the area with full batteries.
pub fn build_network(config: &NetworkConfig, rng: &mut RngStream) -> Result<Vec<NodeState>> {
    config.validate()?;
    let [ml_lo, ml_hi] = config.msg_len_range;
    let [sd_lo, sd_hi] = config.sensed_data_range;
    let nodes = (0..config.node_count)
        .map(|id| {
            let pos = Position::new(
                rng.random_range(0.0..=config.area_width),
                rng.random_range(0.0..=config.area_height),
            );
            let msg_len = rng.random_range(ml_lo..=ml_hi);
            let sensed = rng.random_range(sd_lo..=sd_hi);
            NodeState::new(id, pos, config.initial_energy, msg_len, sensed)
        })
        .collect();
    Ok(nodes)
}

pub fn total_energy(nodes: &[NodeState]) -> f64 {
    nodes.iter().map(|n| n.energy).sum()
}

pub fn alive_count(nodes: &[NodeState]) -> usize {
    nodes.iter().filter(|n| n.alive).count()
}
