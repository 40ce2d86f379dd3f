//! Round loop, metric collection and result export.

use std::fs;
use std::io::Write;
use std::path::Path;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::baselines::{fcm_round, leach_round, LeachState};
use crate::clustering::cluster_and_elect;
use crate::config::{ProtocolKind, SchedulerKind, SimConfig};
use crate::coverage::CoverageGeometry;
use crate::error::Result;
use crate::network::{alive_count, build_network, total_energy, NodeState, Position};
use crate::rng::{streams, RngStream};
use crate::routing::{build_head_graph, execute_round, plan_routes, Route, BS_VERTEX};
use crate::sleepsched::{schedule, FitnessContext};

/// State after one round. Row 0 describes the network before any round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundMetrics {
    pub round: u64,
    pub alive: usize,
    /// Nodes that were awake and alive during the round.
    pub awake: usize,
    /// Residual energy summed over all nodes, joules.
    pub total_energy: f64,
    pub heads: usize,
    /// Sum and maximum of the planned head-to-BS path costs.
    pub path_cost_total: f64,
    pub path_cost_max: f64,
    /// Energy actually deducted by the round's transmissions.
    pub deducted: f64,
}

/// Per-cell count of rounds with at least one alive, awake node in range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageGrid {
    /// Cells per side.
    pub side: usize,
    /// Row-major counts; row index follows the y axis.
    pub counts: Vec<u64>,
}

impl CoverageGrid {
    pub fn new(side: usize) -> Self {
        Self {
            side,
            counts: vec![0; side * side],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.side + col]
    }

    pub fn add(&mut self, covered: &FixedBitSet) {
        for cell in covered.ones() {
            self.counts[cell] += 1;
        }
    }

    /// True when every cell of `self` is at least the matching cell of
    /// `other`.
    pub fn dominates(&self, other: &CoverageGrid) -> bool {
        self.side == other.side && self.counts.iter().zip(&other.counts).all(|(a, b)| a >= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub protocol: ProtocolKind,
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub initial_nodes: usize,
    pub rounds_total: u64,
    /// Whether the run stopped at `max_rounds` with nodes still alive.
    pub hit_round_cap: bool,
    pub first_death_round: Option<u64>,
    pub rounds_to_30pct_dead: Option<u64>,
    pub rounds_to_50pct_dead: Option<u64>,
    pub coverage: CoverageGrid,
    pub metrics: Vec<RoundMetrics>,
}

/// First round whose dead fraction of the initial population reaches
/// `fraction`, if any.
pub fn percent_dead_round(series: &[RoundMetrics], initial: usize, fraction: f64) -> Option<u64> {
    if initial == 0 {
        return None;
    }
    series
        .iter()
        .find(|m| (initial - m.alive) as f64 / initial as f64 >= fraction)
        .map(|m| m.round)
}

/// Routes used by MINEN heads in one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteRecord {
    pub round: u64,
    pub routes: Vec<(usize, Route)>,
}

/// One simulation instance. Rounds run strictly in order.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    nodes: Vec<NodeState>,
    bs: Position,
    masks: Vec<FixedBitSet>,
    cells: usize,
    round: u64,
    initial_nodes: usize,
    leach: LeachState,
    cluster_rng: RngStream,
    election_rng: RngStream,
    scheduler_rng: RngStream,
    baseline_rng: RngStream,
    metrics: Vec<RoundMetrics>,
    coverage: CoverageGrid,
    route_log: Option<Vec<RouteRecord>>,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let root = RngStream::new(config.network.rng_seed);
        let nodes = build_network(&config.network, &mut root.fork(streams::NETWORK))?;
        Self::with_nodes(config, nodes)
    }

    /// Starts from an explicit node set instead of a generated one.
    pub fn with_nodes(config: SimConfig, nodes: Vec<NodeState>) -> Result<Self> {
        config.validate()?;
        let net = &config.network;
        let geom = CoverageGeometry::new(net.area_width, net.area_height, net.coverage_grid_cells, net.sensing_radius);
        let masks = geom.node_masks(&nodes);
        let root = RngStream::new(net.rng_seed);
        let metrics = vec![RoundMetrics {
            round: 0,
            alive: alive_count(&nodes),
            awake: nodes.iter().filter(|n| n.is_active()).count(),
            total_energy: total_energy(&nodes),
            heads: 0,
            path_cost_total: 0.0,
            path_cost_max: 0.0,
            deducted: 0.0,
        }];
        Ok(Self {
            bs: net.bs_pos,
            cells: geom.cell_count(),
            coverage: CoverageGrid::new(net.coverage_grid_cells),
            leach: LeachState::new(config.leach.clone(), nodes.len()),
            initial_nodes: nodes.len(),
            cluster_rng: root.fork(streams::CLUSTERING),
            election_rng: root.fork(streams::ELECTION),
            scheduler_rng: root.fork(streams::SCHEDULER),
            baseline_rng: root.fork(streams::BASELINE),
            round: 0,
            metrics,
            masks,
            nodes,
            config,
            route_log: None,
        })
    }

    /// Keep every MINEN round's route plan.
    pub fn trace_routes(&mut self) {
        self.route_log.get_or_insert_with(Vec::new);
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn metrics(&self) -> &[RoundMetrics] {
        &self.metrics
    }

    pub fn coverage(&self) -> &CoverageGrid {
        &self.coverage
    }

    pub fn route_log(&self) -> Option<&[RouteRecord]> {
        self.route_log.as_deref()
    }

    pub fn is_finished(&self) -> bool {
        alive_count(&self.nodes) == 0 || self.round >= self.config.max_rounds
    }

    /// Runs one round: sleep schedule, clustering and routing, transmission,
    /// then wake-up. Returns `None` once the run is over.
    pub fn step(&mut self) -> Result<Option<&RoundMetrics>> {
        if self.is_finished() {
            return Ok(None);
        }
        self.round += 1;
        self.apply_schedule();

        let active: Vec<usize> = self.nodes.iter().filter(|n| n.is_active()).map(|n| n.id).collect();
        let mut covered = FixedBitSet::with_capacity(self.cells);
        for &id in &active {
            covered.union_with(&self.masks[id]);
        }
        self.coverage.add(&covered);

        let before = total_energy(&self.nodes);
        let k = self.config.network.clusters_for(alive_count(&self.nodes));
        let a = self.config.aggregated_len_bits as f64;
        let params = &self.config.energy;
        let (heads, routes, deducted) = match self.config.protocol {
            ProtocolKind::Minen => {
                let assignment = cluster_and_elect(
                    &self.nodes,
                    self.bs,
                    k,
                    &self.config.clustering,
                    &mut self.cluster_rng,
                    &mut self.election_rng,
                )?;
                match assignment {
                    None => (0, Vec::new(), 0.0),
                    Some(assignment) => {
                        let graph = build_head_graph(&assignment.heads, &self.nodes, self.bs, params, a)?;
                        let plan = plan_routes(&graph)?;
                        let ledger = execute_round(&mut self.nodes, &assignment, &plan, self.bs, params, a)?;
                        (assignment.heads.len(), plan.routes, ledger.total())
                    }
                }
            }
            ProtocolKind::Leach => {
                let r = leach_round(&mut self.nodes, &mut self.leach, self.bs, params, a, &mut self.baseline_rng);
                (r.heads.len(), self.direct_routes(&r.heads, a), r.ledger.total())
            }
            ProtocolKind::Fcm => {
                let r = fcm_round(
                    &mut self.nodes,
                    &self.config.fcm,
                    k,
                    self.bs,
                    params,
                    a,
                    &mut self.baseline_rng,
                    &mut self.election_rng,
                )?;
                (r.heads.len(), self.direct_routes(&r.heads, a), r.ledger.total())
            }
        };

        for n in self.nodes.iter_mut().filter(|n| n.alive) {
            n.awake = true;
        }
        let path_cost_total = routes.iter().map(|(_, r)| r.cost).sum();
        let path_cost_max = routes.iter().map(|(_, r)| r.cost).fold(0.0, f64::max);
        if self.config.protocol == ProtocolKind::Minen {
            if let Some(log) = &mut self.route_log {
                log.push(RouteRecord {
                    round: self.round,
                    routes,
                });
            }
        }
        debug_assert!(total_energy(&self.nodes) <= before);
        self.metrics.push(RoundMetrics {
            round: self.round,
            alive: alive_count(&self.nodes),
            awake: active.len(),
            total_energy: total_energy(&self.nodes),
            heads,
            path_cost_total,
            path_cost_max,
            deducted,
        });
        Ok(self.metrics.last())
    }

    // Single-hop baseline paths, costed with the head-to-BS edge weight.
    fn direct_routes(&self, heads: &[usize], bits: f64) -> Vec<(usize, Route)> {
        heads
            .iter()
            .map(|&h| {
                let cost = self
                    .config
                    .energy
                    .bs_edge_cost(&self.nodes[h], self.bs, bits)
                    .map_or(0.0, |c| c.value);
                (
                    h,
                    Route {
                        path: vec![h, BS_VERTEX],
                        cost,
                    },
                )
            })
            .collect()
    }

    fn apply_schedule(&mut self) {
        let cfg = &self.config.scheduler;
        if cfg.algorithm == SchedulerKind::None {
            return;
        }
        let ctx = FitnessContext::new(&self.nodes, &self.masks, cfg.alpha, cfg.beta, cfg.coverage_preserving);
        if ctx.is_empty() {
            return;
        }
        if let Some(solution) = schedule(&ctx, cfg, &mut self.scheduler_rng) {
            let ids = ctx.ids().to_vec();
            for (gene, id) in ids.into_iter().enumerate() {
                self.nodes[id].awake = !solution.is_asleep(gene);
            }
        }
    }

    /// Runs to completion.
    pub fn run(mut self) -> Result<RunSummary> {
        while self.step()?.is_some() {}
        Ok(self.summary())
    }

    pub fn summary(&self) -> RunSummary {
        let first_death_round = self
            .metrics
            .iter()
            .find(|m| m.alive < self.initial_nodes)
            .map(|m| m.round);
        RunSummary {
            protocol: self.config.protocol,
            scheduler: self.config.scheduler.algorithm,
            seed: self.config.network.rng_seed,
            initial_nodes: self.initial_nodes,
            rounds_total: self.round,
            hit_round_cap: alive_count(&self.nodes) > 0,
            first_death_round,
            rounds_to_30pct_dead: percent_dead_round(&self.metrics, self.initial_nodes, 0.3),
            rounds_to_50pct_dead: percent_dead_round(&self.metrics, self.initial_nodes, 0.5),
            coverage: self.coverage.clone(),
            metrics: self.metrics.clone(),
        }
    }
}

/// Builds the network for `config` and runs it until every node is dead or
/// the round cap is reached.
pub fn run_simulation(config: &SimConfig) -> Result<RunSummary> {
    Simulation::new(config.clone())?.run()
}

pub fn metrics_csv(summary: &RunSummary) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["round", "alive", "awake", "total_energy_j", "heads"])?;
    for m in &summary.metrics {
        w.write_record([
            m.round.to_string(),
            m.alive.to_string(),
            m.awake.to_string(),
            m.total_energy.to_string(),
            m.heads.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
}

/// Long-form grid, one row per cell in row-major order.
pub fn coverage_csv(grid: &CoverageGrid) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["row", "col", "rounds_covered"])?;
    for (i, c) in grid.counts.iter().enumerate() {
        w.write_record([(i / grid.side).to_string(), (i % grid.side).to_string(), c.to_string()])?;
    }
    w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
}

pub fn summary_json(summary: &RunSummary) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(summary)?;
    out.push(b'\n');
    Ok(out)
}

/// Names of the files written by [`write_outputs`].
pub const OUTPUT_FILES: [&str; 3] = ["metrics.csv", "coverage.csv", "summary.json"];
pub const ROUTES_FILE: &str = "routes.jsonl";

/// Writes metrics.csv, coverage.csv and summary.json into `dir`, which must
/// exist.
pub fn write_outputs(summary: &RunSummary, dir: &Path) -> Result<()> {
    fs::write(dir.join("metrics.csv"), metrics_csv(summary)?)?;
    fs::write(dir.join("coverage.csv"), coverage_csv(&summary.coverage)?)?;
    fs::write(dir.join("summary.json"), summary_json(summary)?)?;
    Ok(())
}

/// One JSON object per round.
pub fn write_route_log(records: &[RouteRecord], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    fs::File::create(path)?.write_all(&out)?;
    Ok(())
}
