//! LEACH and fuzzy c-means baseline protocols.
//!
//! Both cluster on node position only, and every head sends its aggregated
//! message straight to the base station. Energy is charged with the same
//! radio model and clamping rules as MINEN.
//!
//! LEACH threshold for a node that has not been head in the current epoch:
//! `T(r) = p / (1 - p * (r mod ceil(1/p)))`.
//!
//! Fuzzy c-means alternates
//! `u_ik = 1 / sum_j (d_ik / d_ij)^(2/(m-1))` and
//! `c_k = sum_i u_ik^m x_i / sum_i u_ik^m`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{compact_labels, elect_heads};
use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::network::{distance, NodeState, Position};
use crate::routing::{charge_members, charge_path, settle_all, RoundLedger, BS_VERTEX};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeachConfig {
    /// Desired fraction of heads per round.
    pub p: f64,
}

impl Default for LeachConfig {
    fn default() -> Self {
        Self { p: 0.05 }
    }
}

impl LeachConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::config(format!("leach.p must be in (0, 1), got {}", self.p)));
        }
        Ok(())
    }

    /// Rounds per epoch, `ceil(1/p)`.
    pub fn epoch_len(&self) -> u64 {
        // Guard against 1/p landing a hair above an integer.
        ((1.0 / self.p) - 1e-9).ceil().max(1.0) as u64
    }

    pub fn threshold(&self, round: u64) -> f64 {
        let denom = 1.0 - self.p * (round % self.epoch_len()) as f64;
        if denom <= self.p {
            1.0
        } else {
            (self.p / denom).min(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcmConfig {
    /// Cluster count; `None` uses the network's cluster count.
    pub c: Option<usize>,
    /// Fuzziness exponent.
    pub m: f64,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FcmConfig {
    fn default() -> Self {
        Self {
            c: None,
            m: 2.0,
            tol: 1e-5,
            max_iter: 200,
        }
    }
}

impl FcmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c == Some(0) {
            return Err(Error::config("fcm.c must be at least 1"));
        }
        if !(self.m > 1.0 && self.m.is_finite()) {
            return Err(Error::config(format!("fcm.m must exceed 1, got {}", self.m)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("fcm.tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("fcm.max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Heads of one baseline round and the energy it cost.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRound {
    pub heads: Vec<usize>,
    pub ledger: RoundLedger,
}

/// Per-node epoch bookkeeping for LEACH.
#[derive(Debug, Clone)]
pub struct LeachState {
    cfg: LeachConfig,
    round: u64,
    served: Vec<bool>,
}

impl LeachState {
    pub fn new(cfg: LeachConfig, node_count: usize) -> Self {
        Self {
            cfg,
            round: 0,
            served: vec![false; node_count],
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Whether `id` may still become head in the current epoch.
    pub fn eligible(&self, id: usize) -> bool {
        !self.served[id]
    }

    /// Liveness guard when nobody self-elects: the active node nearest the
    /// base station, preferring nodes still eligible this epoch.
    pub fn forced_head(&self, nodes: &[NodeState], bs: Position) -> Option<usize> {
        nodes
            .iter()
            .filter(|n| n.is_active())
            .min_by(|a, b| {
                self.served[a.id]
                    .cmp(&self.served[b.id])
                    .then(distance(a.pos, bs).total_cmp(&distance(b.pos, bs)))
                    .then(a.id.cmp(&b.id))
            })
            .map(|n| n.id)
    }

    /// Self-election for the current round. Advances the round counter.
    pub fn elect(&mut self, nodes: &[NodeState], bs: Position, rng: &mut RngStream) -> Vec<usize> {
        if self.round % self.cfg.epoch_len() == 0 {
            self.served.fill(false);
        }
        let t = self.cfg.threshold(self.round);
        let mut heads = Vec::new();
        for n in nodes.iter().filter(|n| n.is_active() && !self.served[n.id]) {
            if rng.random::<f64>() < t {
                heads.push(n.id);
            }
        }
        if heads.is_empty() {
            heads.extend(self.forced_head(nodes, bs));
        }
        for &h in &heads {
            self.served[h] = true;
        }
        self.round += 1;
        heads
    }
}

fn nearest_head(nodes: &[NodeState], id: usize, heads: &[usize]) -> usize {
    let mut best = heads[0];
    let mut best_d = f64::INFINITY;
    for &h in heads {
        let d = distance(nodes[id].pos, nodes[h].pos);
        if d < best_d {
            best = h;
            best_d = d;
        }
    }
    best
}

fn single_hop_round(
    nodes: &mut [NodeState],
    pairs: Vec<(usize, usize)>,
    heads: Vec<usize>,
    bs: Position,
    params: &EnergyParams,
    aggregated_bits: f64,
) -> BaselineRound {
    let mut ledger = RoundLedger::default();
    charge_members(nodes, pairs, params, &mut ledger);
    for &h in &heads {
        charge_path(nodes, &[h, BS_VERTEX], bs, params, aggregated_bits, &mut ledger);
    }
    settle_all(nodes);
    BaselineRound { heads, ledger }
}

/// One LEACH round: threshold election, nearest-head membership, single-hop
/// delivery to the base station.
pub fn leach_round(
    nodes: &mut [NodeState],
    state: &mut LeachState,
    bs: Position,
    params: &EnergyParams,
    aggregated_bits: f64,
    rng: &mut RngStream,
) -> BaselineRound {
    let heads = state.elect(nodes, bs, rng);
    if heads.is_empty() {
        return BaselineRound {
            heads,
            ledger: RoundLedger::default(),
        };
    }
    let pairs = nodes
        .iter()
        .filter(|n| n.is_active() && !heads.contains(&n.id))
        .map(|n| (n.id, nearest_head(nodes, n.id, &heads)))
        .collect();
    single_hop_round(nodes, pairs, heads, bs, params, aggregated_bits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmFit<const D: usize> {
    /// Row-major `n x c` membership matrix.
    pub memberships: Vec<f64>,
    pub centroids: Vec<[f64; D]>,
    /// Index of the largest membership per point, lowest cluster on ties.
    pub labels: Vec<usize>,
    /// Objective after each centroid update.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl<const D: usize> FcmFit<D> {
    pub fn membership(&self, point: usize, cluster: usize) -> f64 {
        self.memberships[point * self.centroids.len() + cluster]
    }
}

// x^e with exact fast paths for the integer exponents used in practice.
fn pow_exact(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e.fract() == 0.0 && e.abs() <= 16.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

fn update_memberships<const D: usize>(points: &[[f64; D]], centroids: &[[f64; D]], m: f64, u: &mut [f64]) {
    let c = centroids.len();
    let power = 1.0 / (m - 1.0);
    for (p, row) in points.iter().zip(u.chunks_exact_mut(c)) {
        let mut zeros = 0usize;
        for (slot, centroid) in row.iter_mut().zip(centroids) {
            *slot = crate::clustering::sq_dist(p, centroid);
            if *slot == 0.0 {
                zeros += 1;
            }
        }
        if zeros > 0 {
            // Coincident with a centroid: all membership goes there.
            for slot in row.iter_mut() {
                *slot = if *slot == 0.0 { 1.0 / zeros as f64 } else { 0.0 };
            }
            continue;
        }
        // (d_ik / d_ij)^(2/(m-1)) == (d2_ik / d2_ij)^(1/(m-1))
        let mut total = 0.0;
        for slot in row.iter_mut() {
            *slot = 1.0 / pow_exact(*slot, power);
            total += *slot;
        }
        for slot in row.iter_mut() {
            *slot /= total;
        }
    }
}

fn update_centroids<const D: usize>(points: &[[f64; D]], u: &[f64], m: f64, centroids: &mut [[f64; D]]) {
    let c = centroids.len();
    let mut num = vec![[0.0; D]; c];
    let mut den = vec![0.0; c];
    for (p, row) in points.iter().zip(u.chunks_exact(c)) {
        for k in 0..c {
            let w = pow_exact(row[k], m);
            den[k] += w;
            for d in 0..D {
                num[k][d] += w * p[d];
            }
        }
    }
    for k in 0..c {
        if den[k] > 0.0 {
            for d in 0..D {
                centroids[k][d] = num[k][d] / den[k];
            }
        }
    }
}

/// `sum_i sum_k u_ik^m * |x_i - c_k|^2`.
pub fn fcm_objective<const D: usize>(points: &[[f64; D]], centroids: &[[f64; D]], u: &[f64], m: f64) -> f64 {
    let c = centroids.len();
    let mut j = 0.0;
    for (p, row) in points.iter().zip(u.chunks_exact(c)) {
        for (uk, centroid) in row.iter().zip(centroids) {
            j += pow_exact(*uk, m) * crate::clustering::sq_dist(p, centroid);
        }
    }
    j
}

/// Fuzzy c-means from `c` distinct random points as initial centroids.
pub fn fcm<const D: usize>(
    points: &[[f64; D]],
    c: usize,
    cfg: &FcmConfig,
    rng: &mut RngStream,
) -> Result<FcmFit<D>> {
    let n = points.len();
    if c == 0 || c > n {
        return Err(Error::config(format!("fuzzy c-means needs 1 <= c <= {n} points, got c = {c}")));
    }
    let m = cfg.m;
    let mut centroids: Vec<[f64; D]> = sample(rng, n, c).iter().map(|i| points[i]).collect();
    let mut u = vec![0.0; n * c];
    let mut objective_trace = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter.max(1) {
        update_memberships(points, &centroids, m, &mut u);
        let previous = centroids.clone();
        update_centroids(points, &u, m, &mut centroids);
        objective_trace.push(fcm_objective(points, &centroids, &u, m));
        let shift = previous
            .iter()
            .zip(&centroids)
            .map(|(a, b)| crate::clustering::sq_dist(a, b))
            .fold(0.0, f64::max)
            .sqrt();
        if shift < cfg.tol {
            converged = true;
            break;
        }
    }
    let labels = (0..n)
        .map(|i| {
            let row = &u[i * c..(i + 1) * c];
            let mut best = 0;
            for k in 1..c {
                if row[k] > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    Ok(FcmFit {
        memberships: u,
        centroids,
        labels,
        objective_trace,
        converged,
    })
}

/// One FCM round: fuzzy clustering of active nodes by position, hard labels
/// by largest membership, highest-energy heads, single-hop delivery.
#[allow(clippy::too_many_arguments)]
pub fn fcm_round(
    nodes: &mut [NodeState],
    cfg: &FcmConfig,
    clusters: usize,
    bs: Position,
    params: &EnergyParams,
    aggregated_bits: f64,
    cluster_rng: &mut RngStream,
    election_rng: &mut RngStream,
) -> Result<BaselineRound> {
    let ids: Vec<usize> = nodes.iter().filter(|n| n.is_active()).map(|n| n.id).collect();
    if ids.is_empty() {
        return Ok(BaselineRound {
            heads: Vec::new(),
            ledger: RoundLedger::default(),
        });
    }
    let c = cfg.c.unwrap_or(clusters).clamp(1, ids.len());
    let points: Vec<[f64; 2]> = ids.iter().map(|&i| [nodes[i].pos.x, nodes[i].pos.y]).collect();
    let fit = fcm(&points, c, cfg, cluster_rng)?;
    let (labels, k) = compact_labels(&fit.labels, c);
    let heads = elect_heads(nodes, &ids, &labels, k, election_rng)?;
    let pairs = ids
        .iter()
        .zip(&labels)
        .filter(|(id, l)| heads[**l] != **id)
        .map(|(&id, &l)| (id, heads[l]))
        .collect();
    Ok(single_hop_round(nodes, pairs, heads, bs, params, aggregated_bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid_nodes(n: usize) -> Vec<NodeState> {
        (0..n)
            .map(|i| NodeState::new(i, Position::new((i % 10) as f64 * 20.0, (i / 10) as f64 * 20.0), 2.0, 2000, 2000))
            .collect()
    }

    #[test]
    fn threshold_values() {
        let cfg = LeachConfig::default();
        assert_eq!(cfg.epoch_len(), 20);
        assert_relative_eq!(cfg.threshold(0), 0.05, max_relative = 1e-12);
        assert_eq!(cfg.threshold(19), 1.0);
        assert_relative_eq!(cfg.threshold(20), 0.05, max_relative = 1e-12);
        assert_relative_eq!(cfg.threshold(10), 0.1, max_relative = 1e-12);
        assert_eq!(LeachConfig { p: 0.3 }.epoch_len(), 4);
        assert!(LeachConfig { p: 0.0 }.validate().is_err());
    }

    #[test]
    fn every_node_heads_at_most_once_per_epoch() {
        let cfg = LeachConfig::default();
        let nodes = grid_nodes(100);
        let bs = Position::new(90.0, 90.0);
        let mut state = LeachState::new(cfg.clone(), nodes.len());
        let mut rng = RngStream::new(4);
        for _epoch in 0..3 {
            let mut count = vec![0; nodes.len()];
            for _ in 0..cfg.epoch_len() {
                for h in state.elect(&nodes, bs, &mut rng) {
                    count[h] += 1;
                }
            }
            assert!(count.iter().all(|&c| c <= 1));
            // The last round of an epoch has threshold 1, so everyone served.
            assert!(count.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn single_node_is_head_and_sends_direct() {
        let p = EnergyParams::default();
        let mut nodes = vec![NodeState::new(0, Position::new(0.0, 0.0), 2.0, 2000, 2000)];
        let bs = Position::new(30.0, 40.0);
        let mut state = LeachState::new(LeachConfig::default(), 1);
        let r = leach_round(&mut nodes, &mut state, bs, &p, 4000.0, &mut RngStream::new(1));
        assert_eq!(r.heads, vec![0]);
        let expected = p.tx_energy(50.0, 4000.0).unwrap();
        assert_relative_eq!(r.ledger.total(), expected, max_relative = 1e-12);
        assert_relative_eq!(2.0 - nodes[0].energy, expected, max_relative = 1e-9);
    }

    #[test]
    fn guard_prefers_eligible_node_nearest_bs() {
        let mut nodes = grid_nodes(4);
        let bs = Position::new(100.0, 0.0);
        let mut state = LeachState::new(LeachConfig::default(), 4);
        assert_eq!(state.forced_head(&nodes, bs), Some(3));
        state.served[3] = true;
        assert_eq!(state.forced_head(&nodes, bs), Some(2));
        state.served.fill(true);
        assert_eq!(state.forced_head(&nodes, bs), Some(3));
        for n in &mut nodes {
            n.alive = false;
        }
        assert_eq!(state.forced_head(&nodes, bs), None);
    }

    #[test]
    fn members_join_nearest_head_and_ledger_closes() {
        let p = EnergyParams::default();
        let mut nodes = grid_nodes(50);
        let bs = Position::new(100.0, 250.0);
        let mut state = LeachState::new(LeachConfig { p: 0.1 }, nodes.len());
        let mut rng = RngStream::new(9);
        for _ in 0..30 {
            let before: f64 = nodes.iter().map(|n| n.energy).sum();
            let r = leach_round(&mut nodes, &mut state, bs, &p, 4000.0, &mut rng);
            let after: f64 = nodes.iter().map(|n| n.energy).sum();
            assert!(!r.heads.is_empty());
            assert_relative_eq!(before - after, r.ledger.total(), max_relative = 1e-9);
        }
    }

    #[test]
    fn fcm_memberships_normalize_and_single_cluster_is_mean() {
        let pts: Vec<[f64; 2]> = vec![[0.0, 0.0], [4.0, 0.0], [0.0, 8.0], [10.0, 2.0]];
        let fit = fcm(&pts, 1, &FcmConfig::default(), &mut RngStream::new(1)).unwrap();
        assert_relative_eq!(fit.centroids[0][0], 3.5, max_relative = 1e-12);
        assert_relative_eq!(fit.centroids[0][1], 2.5, max_relative = 1e-12);
        let fit = fcm(&pts, 3, &FcmConfig::default(), &mut RngStream::new(2)).unwrap();
        for i in 0..pts.len() {
            let s: f64 = (0..3).map(|k| fit.membership(i, k)).sum();
            assert_relative_eq!(s, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn exact_powers_agree_with_powf() {
        for &x in &[0.0, 0.3, 1.0, 2.5, 1e-8] {
            for &e in &[1.0, 2.0, 3.0, 0.5, 1.7] {
                assert_relative_eq!(pow_exact(x, e), f64::powf(x, e), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn coincident_point_gets_full_membership() {
        let centroids = [[1.0, 1.0], [5.0, 5.0]];
        let mut u = vec![0.0; 4];
        update_memberships(&[[1.0, 1.0], [3.0, 3.0]], &centroids, 2.0, &mut u);
        assert_eq!(&u[..2], &[1.0, 0.0]);
        assert_relative_eq!(u[2], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn fcm_objective_is_non_increasing() {
        use rand_distr::{Distribution, Uniform};
        let mut rng = RngStream::new(12);
        let unif = Uniform::new(0.0, 250.0).unwrap();
        for _ in 0..20 {
            let pts: Vec<[f64; 2]> = (0..80).map(|_| [unif.sample(&mut rng), unif.sample(&mut rng)]).collect();
            let fit = fcm(&pts, 5, &FcmConfig::default(), &mut rng).unwrap();
            for w in fit.objective_trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn fcm_round_charges_single_hop() {
        let p = EnergyParams::default();
        let mut nodes = grid_nodes(40);
        let bs = Position::new(90.0, 200.0);
        let before: f64 = nodes.iter().map(|n| n.energy).sum();
        let r = fcm_round(
            &mut nodes,
            &FcmConfig::default(),
            4,
            bs,
            &p,
            4000.0,
            &mut RngStream::new(1),
            &mut RngStream::new(2),
        )
        .unwrap();
        let after: f64 = nodes.iter().map(|n| n.energy).sum();
        assert!(!r.heads.is_empty() && r.heads.len() <= 4);
        assert_eq!(r.ledger.relay_rx, 0.0);
        assert_relative_eq!(before - after, r.ledger.total(), max_relative = 1e-9);
    }
}
