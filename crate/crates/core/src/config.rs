//! Simulation configuration and its JSON file form.
//!
//! The file is a single flat JSON object. Every key is optional and falls
//! back to the defaults below (the 300-node, 250 m x 250 m, 2 J reference
//! network). Unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{FcmConfig, LeachConfig};
use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::network::Position;
use crate::sleepsched::SchedulerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Minen,
    Leach,
    Fcm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    None,
    Gso,
    Ga,
    Pso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringMethod {
    Kmeans,
    Gmm,
}

impl ProtocolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Minen => "minen",
            ProtocolKind::Leach => "leach",
            ProtocolKind::Fcm => "fcm",
        }
    }
}

impl SchedulerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::None => "none",
            SchedulerKind::Gso => "gso",
            SchedulerKind::Ga => "ga",
            SchedulerKind::Pso => "pso",
        }
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minen" => Ok(ProtocolKind::Minen),
            "leach" => Ok(ProtocolKind::Leach),
            "fcm" => Ok(ProtocolKind::Fcm),
            other => Err(Error::config(format!("unknown protocol {other:?}"))),
        }
    }
}

impl std::str::FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SchedulerKind::None),
            "gso" => Ok(SchedulerKind::Gso),
            "ga" => Ok(SchedulerKind::Ga),
            "pso" => Ok(SchedulerKind::Pso),
            other => Err(Error::config(format!("unknown scheduler {other:?}"))),
        }
    }
}

impl ClusteringMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusteringMethod::Kmeans => "kmeans",
            ClusteringMethod::Gmm => "gmm",
        }
    }
}

impl std::str::FromStr for ClusteringMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(ClusteringMethod::Kmeans),
            "gmm" => Ok(ClusteringMethod::Gmm),
            other => Err(Error::config(format!("unknown clustering method {other:?}"))),
        }
    }
}

/// Physical layout, traffic profile and seed of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub node_count: usize,
    pub area_width: f64,
    pub area_height: f64,
    pub bs_pos: Position,
    pub initial_energy: f64,
    /// Inclusive bounds, bits per round.
    pub msg_len_range: [u32; 2],
    pub sensed_data_range: [u32; 2],
    /// Fixed cluster count; `None` means 5% of the currently alive nodes.
    pub cluster_count: Option<usize>,
    pub sensing_radius: f64,
    pub coverage_grid_cells: usize,
    pub rng_seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            node_count: 300,
            area_width: 250.0,
            area_height: 250.0,
            bs_pos: Position::new(125.0, 125.0),
            initial_energy: 2.0,
            msg_len_range: [500, 4000],
            sensed_data_range: [500, 4000],
            cluster_count: None,
            sensing_radius: 25.0,
            coverage_grid_cells: 50,
            rng_seed: 1,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(Error::config("node_count must be at least 1"));
        }
        if !(self.area_width > 0.0 && self.area_height > 0.0) {
            return Err(Error::config("area dimensions must be positive"));
        }
        if !(self.initial_energy > 0.0 && self.initial_energy.is_finite()) {
            return Err(Error::config("initial_energy must be positive"));
        }
        let [lo, hi] = self.msg_len_range;
        if lo == 0 || lo > hi {
            return Err(Error::config(format!(
                "msg_len_range [{lo}, {hi}] must satisfy 0 < min <= max"
            )));
        }
        let [lo, hi] = self.sensed_data_range;
        if lo > hi {
            return Err(Error::config(format!(
                "sensed_data_range [{lo}, {hi}] is inverted"
            )));
        }
        if self.cluster_count == Some(0) {
            return Err(Error::config("cluster_count must be at least 1"));
        }
        if !(self.sensing_radius > 0.0) {
            return Err(Error::config("sensing_radius must be positive"));
        }
        if self.coverage_grid_cells == 0 {
            return Err(Error::config("coverage_grid_cells must be at least 1"));
        }
        if !(self.bs_pos.x.is_finite() && self.bs_pos.y.is_finite()) {
            return Err(Error::config("bs_pos must be finite"));
        }
        Ok(())
    }

    /// Cluster count to use when `alive` nodes remain.
    pub fn clusters_for(&self, alive: usize) -> usize {
        let k = match self.cluster_count {
            Some(k) => k,
            None => ((alive as f64) * 0.05).round() as usize,
        };
        k.max(1).min(alive.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub method: ClusteringMethod,
    pub kmeans_max_iter: usize,
    pub gmm_max_iter: usize,
    pub gmm_tol: f64,
    pub gmm_reg: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            method: ClusteringMethod::Gmm,
            kmeans_max_iter: 100,
            gmm_max_iter: 200,
            gmm_tol: 1e-6,
            gmm_reg: 1e-6,
        }
    }
}

/// One protocol/scheduler combination in a comparison.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Variant {
    pub name: Option<String>,
    pub protocol: Option<ProtocolKind>,
    pub algorithm: Option<SchedulerKind>,
    pub clustering: Option<ClusteringMethod>,
}

impl Variant {
    pub fn apply(&self, base: &SimConfig) -> SimConfig {
        let mut cfg = base.clone();
        if let Some(p) = self.protocol {
            cfg.protocol = p;
        }
        if let Some(a) = self.algorithm {
            cfg.scheduler.algorithm = a;
        }
        if let Some(c) = self.clustering {
            cfg.clustering.method = c;
        }
        cfg
    }

    pub fn label(&self, base: &SimConfig) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let cfg = self.apply(base);
        match cfg.scheduler.algorithm {
            SchedulerKind::None => cfg.protocol.as_str().to_string(),
            alg => format!("{}-{}", cfg.protocol.as_str(), alg.as_str()),
        }
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub network: NetworkConfig,
    pub energy: EnergyParams,
    pub clustering: ClusteringConfig,
    pub scheduler: SchedulerConfig,
    pub protocol: ProtocolKind,
    pub leach: LeachConfig,
    pub fcm: FcmConfig,
    pub aggregated_len_bits: u32,
    pub max_rounds: u64,
    pub variants: Vec<Variant>,
    /// Seed list for comparisons and sweeps; `None` means the network seed.
    pub seeds: Option<Vec<u64>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            energy: EnergyParams::default(),
            clustering: ClusteringConfig::default(),
            scheduler: SchedulerConfig::default(),
            protocol: ProtocolKind::Minen,
            leach: LeachConfig::default(),
            fcm: FcmConfig::default(),
            aggregated_len_bits: 4000,
            max_rounds: 20_000,
            variants: Vec::new(),
            seeds: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.energy.validate()?;
        self.scheduler.validate()?;
        self.leach.validate()?;
        self.fcm.validate()?;
        if self.aggregated_len_bits == 0 {
            return Err(Error::config("aggregated_len_bits must be positive"));
        }
        if self.max_rounds == 0 {
            return Err(Error::config("max_rounds must be at least 1"));
        }
        if self.clustering.kmeans_max_iter == 0 || self.clustering.gmm_max_iter == 0 {
            return Err(Error::config("clustering iteration caps must be at least 1"));
        }
        if !(self.clustering.gmm_tol >= 0.0) || !(self.clustering.gmm_reg > 0.0) {
            return Err(Error::config("gmm_tol must be >= 0 and gmm_reg > 0"));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text)?;
        let cfg = file.into_config();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = ConfigFile::from_config(self);
        serde_json::to_string_pretty(&file).expect("config serializes")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.network.rng_seed = seed;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConfigFile {
    node_count: usize,
    area_width: f64,
    area_height: f64,
    bs_pos: Option<Position>,
    initial_energy: f64,
    msg_len_range: [u32; 2],
    sensed_data_range: [u32; 2],
    cluster_count: Option<usize>,
    sensing_radius: f64,
    coverage_grid_cells: usize,
    rng_seed: u64,

    e_elec: f64,
    eps_fs: f64,
    eps_mp: f64,
    w1: f64,
    w2: f64,
    w3: f64,
    round_time: f64,

    clustering: ClusteringMethod,
    kmeans_max_iter: usize,
    gmm_max_iter: usize,
    gmm_tol: f64,

    algorithm: SchedulerKind,
    alpha: f64,
    beta: f64,
    max_iterations: usize,
    population_size: usize,
    mutation_rate: Option<f64>,
    coverage_preserving: bool,

    aggregated_len_bits: u32,
    protocol: ProtocolKind,
    leach: LeachConfig,
    fcm: FcmConfig,
    max_rounds: u64,
    variants: Vec<Variant>,
    seeds: Option<Vec<u64>>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self::from_config(&SimConfig::default())
    }
}

impl ConfigFile {
    fn from_config(c: &SimConfig) -> Self {
        let n = &c.network;
        let bs_default = Position::new(n.area_width / 2.0, n.area_height / 2.0);
        Self {
            node_count: n.node_count,
            area_width: n.area_width,
            area_height: n.area_height,
            bs_pos: (n.bs_pos != bs_default).then_some(n.bs_pos),
            initial_energy: n.initial_energy,
            msg_len_range: n.msg_len_range,
            sensed_data_range: n.sensed_data_range,
            cluster_count: n.cluster_count,
            sensing_radius: n.sensing_radius,
            coverage_grid_cells: n.coverage_grid_cells,
            rng_seed: n.rng_seed,
            e_elec: c.energy.e_elec,
            eps_fs: c.energy.eps_fs,
            eps_mp: c.energy.eps_mp,
            w1: c.energy.w1,
            w2: c.energy.w2,
            w3: c.energy.w3,
            round_time: c.energy.round_time,
            clustering: c.clustering.method,
            kmeans_max_iter: c.clustering.kmeans_max_iter,
            gmm_max_iter: c.clustering.gmm_max_iter,
            gmm_tol: c.clustering.gmm_tol,
            algorithm: c.scheduler.algorithm,
            alpha: c.scheduler.alpha,
            beta: c.scheduler.beta,
            max_iterations: c.scheduler.max_iterations,
            population_size: c.scheduler.population_size,
            mutation_rate: c.scheduler.mutation_rate,
            coverage_preserving: c.scheduler.coverage_preserving,
            aggregated_len_bits: c.aggregated_len_bits,
            protocol: c.protocol,
            leach: c.leach.clone(),
            fcm: c.fcm.clone(),
            max_rounds: c.max_rounds,
            variants: c.variants.clone(),
            seeds: c.seeds.clone(),
        }
    }

    fn into_config(self) -> SimConfig {
        let bs_pos = self
            .bs_pos
            .unwrap_or(Position::new(self.area_width / 2.0, self.area_height / 2.0));
        let defaults = SimConfig::default();
        SimConfig {
            network: NetworkConfig {
                node_count: self.node_count,
                area_width: self.area_width,
                area_height: self.area_height,
                bs_pos,
                initial_energy: self.initial_energy,
                msg_len_range: self.msg_len_range,
                sensed_data_range: self.sensed_data_range,
                cluster_count: self.cluster_count,
                sensing_radius: self.sensing_radius,
                coverage_grid_cells: self.coverage_grid_cells,
                rng_seed: self.rng_seed,
            },
            energy: EnergyParams {
                e_elec: self.e_elec,
                eps_fs: self.eps_fs,
                eps_mp: self.eps_mp,
                w1: self.w1,
                w2: self.w2,
                w3: self.w3,
                round_time: self.round_time,
            },
            clustering: ClusteringConfig {
                method: self.clustering,
                kmeans_max_iter: self.kmeans_max_iter,
                gmm_max_iter: self.gmm_max_iter,
                gmm_tol: self.gmm_tol,
                gmm_reg: defaults.clustering.gmm_reg,
            },
            scheduler: SchedulerConfig {
                algorithm: self.algorithm,
                alpha: self.alpha,
                beta: self.beta,
                max_iterations: self.max_iterations,
                population_size: self.population_size,
                mutation_rate: self.mutation_rate,
                coverage_preserving: self.coverage_preserving,
                ..defaults.scheduler
            },
            protocol: self.protocol,
            leach: self.leach,
            fcm: self.fcm,
            aggregated_len_bits: self.aggregated_len_bits,
            max_rounds: self.max_rounds,
            variants: self.variants,
            seeds: self.seeds,
        }
    }
}
