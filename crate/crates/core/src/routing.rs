//! Head-graph routing and the per-round energy ledger.
//!
//! Every cluster head is a vertex of a complete directed graph that also
//! contains the base station as a sink. Each head forwards one aggregated
//! message along its minimum-cost path to the base station.

use std::cmp::Ordering;

use serde::Serialize;

use crate::clustering::ClusterAssignment;
use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::network::{distance, NodeState, Position};

/// Vertex id of the base station. It sorts after every node id.
pub const BS_VERTEX: usize = usize::MAX;

/// Dense directed graph over cluster heads plus the base station, which
/// is always the last vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadGraph {
    heads: Vec<usize>,
    // Row-major, `None` where there is no edge.
    weights: Vec<Option<f64>>,
}

impl HeadGraph {
    /// Builds a graph from explicit weights. `head_costs[a][b]` is the cost
    /// of head `a` to head `b` (the diagonal is ignored) and `bs_costs[a]`
    /// the cost of head `a` to the base station.
    pub fn from_costs(heads: Vec<usize>, head_costs: &[Vec<Option<f64>>], bs_costs: &[Option<f64>]) -> Result<Self> {
        let h = heads.len();
        if h == 0 {
            return Err(Error::contract("head graph needs at least one head"));
        }
        if head_costs.len() != h || head_costs.iter().any(|r| r.len() != h) || bs_costs.len() != h {
            return Err(Error::contract("cost matrix does not match head count"));
        }
        let mut sorted = heads.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.last() == Some(&BS_VERTEX) {
            return Err(Error::contract("head ids must be distinct node ids"));
        }
        let n = h + 1;
        let mut weights = vec![None; n * n];
        for a in 0..h {
            for b in 0..h {
                if a != b {
                    weights[a * n + b] = head_costs[a][b];
                }
            }
            weights[a * n + h] = bs_costs[a];
        }
        if let Some(w) = weights.iter().flatten().find(|w| !(**w >= 0.0)) {
            return Err(Error::contract(format!("edge cost {w} is negative or NaN")));
        }
        Ok(Self { heads, weights })
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    fn order(&self) -> usize {
        self.heads.len() + 1
    }

    /// Node id of vertex index `v`, or [`BS_VERTEX`].
    fn vertex_id(&self, v: usize) -> usize {
        self.heads.get(v).copied().unwrap_or(BS_VERTEX)
    }

    fn index_of(&self, id: usize) -> Option<usize> {
        if id == BS_VERTEX {
            Some(self.heads.len())
        } else {
            self.heads.iter().position(|&h| h == id)
        }
    }

    /// Cost of the edge between two vertex ids, if present.
    pub fn edge(&self, from: usize, to: usize) -> Option<f64> {
        let (a, b) = (self.index_of(from)?, self.index_of(to)?);
        self.weights[a * self.order() + b]
    }

    pub fn edge_count(&self) -> usize {
        self.weights.iter().filter(|w| w.is_some()).count()
    }
}

/// Complete head graph: head-to-head edges use [`EnergyParams::edge_cost`]
/// with the sender's aggregated length, head-to-BS edges use
/// [`EnergyParams::bs_edge_cost`].
pub fn build_head_graph(
    heads: &[usize],
    nodes: &[NodeState],
    bs: Position,
    params: &EnergyParams,
    aggregated_bits: f64,
) -> Result<HeadGraph> {
    let h = heads.len();
    let mut head_costs = vec![vec![None; h]; h];
    let mut bs_costs = Vec::with_capacity(h);
    for (a, &i) in heads.iter().enumerate() {
        for (b, &j) in heads.iter().enumerate() {
            if a != b {
                head_costs[a][b] = Some(params.edge_cost(&nodes[i], &nodes[j], aggregated_bits)?.value);
            }
        }
        bs_costs.push(Some(params.bs_edge_cost(&nodes[i], bs, aggregated_bits)?.value));
    }
    HeadGraph::from_costs(heads.to_vec(), &head_costs, &bs_costs)
}

/// A path from a head to the base station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    /// Vertex ids from the source head to [`BS_VERTEX`].
    pub path: Vec<usize>,
    pub cost: f64,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone)]
struct Label {
    cost: f64,
    path: Vec<usize>,
}

impl Label {
    // Lower cost, then fewer hops, then lexicographically smaller ids.
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.path.len().cmp(&other.path.len()))
            .then_with(|| self.path.cmp(&other.path))
    }
}

/// Minimum-cost path from head `source` to the base station. Ties go to
/// fewer hops, then to the lexicographically smallest vertex-id sequence.
pub fn dijkstra(graph: &HeadGraph, source: usize) -> Result<Route> {
    let n = graph.order();
    let src = match graph.index_of(source) {
        Some(v) if v < n - 1 => v,
        _ => return Err(Error::contract(format!("{source} is not a head of this graph"))),
    };
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    best[src] = Some(Label {
        cost: 0.0,
        path: vec![source],
    });
    loop {
        let mut next: Option<usize> = None;
        for v in 0..n {
            if done[v] {
                continue;
            }
            if let Some(l) = &best[v] {
                if next.is_none_or(|u| l.cmp(best[u].as_ref().unwrap()) == Ordering::Less) {
                    next = Some(v);
                }
            }
        }
        let Some(u) = next else { break };
        done[u] = true;
        if u == n - 1 {
            break;
        }
        let from = best[u].clone().unwrap();
        for v in 0..n {
            if done[v] {
                continue;
            }
            let Some(w) = graph.weights[u * n + v] else { continue };
            let mut path = from.path.clone();
            path.push(graph.vertex_id(v));
            let cand = Label {
                cost: from.cost + w,
                path,
            };
            if best[v].as_ref().is_none_or(|cur| cand.cmp(cur) == Ordering::Less) {
                best[v] = Some(cand);
            }
        }
    }
    match best[n - 1].take() {
        Some(l) if done[n - 1] => Ok(Route {
            path: l.path,
            cost: l.cost,
        }),
        _ => Err(Error::Internal(format!("base station unreachable from head {source}"))),
    }
}

/// One route per head, in head order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutePlan {
    pub routes: Vec<(usize, Route)>,
}

impl RoutePlan {
    pub fn route_for(&self, head: usize) -> Option<&Route> {
        self.routes.iter().find(|(h, _)| *h == head).map(|(_, r)| r)
    }

    pub fn total_cost(&self) -> f64 {
        self.routes.iter().map(|(_, r)| r.cost).sum()
    }
}

pub fn plan_routes(graph: &HeadGraph) -> Result<RoutePlan> {
    let routes = graph
        .heads()
        .iter()
        .map(|&h| Ok((h, dijkstra(graph, h)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RoutePlan { routes })
}

/// Energy actually deducted during one round, split by activity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RoundLedger {
    pub member_tx: f64,
    pub head_rx: f64,
    pub relay_tx: f64,
    pub relay_rx: f64,
}

impl RoundLedger {
    pub fn total(&self) -> f64 {
        self.member_tx + self.head_rx + self.relay_tx + self.relay_rx
    }
}

/// Each `(member, head)` pair: the member sends its own message to the head,
/// which pays to receive it.
pub(crate) fn charge_members(
    nodes: &mut [NodeState],
    pairs: impl IntoIterator<Item = (usize, usize)>,
    params: &EnergyParams,
    ledger: &mut RoundLedger,
) {
    for (m, h) in pairs {
        let bits = f64::from(nodes[m].msg_len);
        let d = distance(nodes[m].pos, nodes[h].pos);
        ledger.member_tx += nodes[m].spend(params.tx_cost(d, bits));
        ledger.head_rx += nodes[h].spend(params.rx_cost(bits));
    }
}

/// Forwards one aggregated message along `path`; the base station pays
/// nothing.
pub(crate) fn charge_path(
    nodes: &mut [NodeState],
    path: &[usize],
    bs: Position,
    params: &EnergyParams,
    bits: f64,
    ledger: &mut RoundLedger,
) {
    for hop in path.windows(2) {
        let (u, v) = (hop[0], hop[1]);
        let to = if v == BS_VERTEX { bs } else { nodes[v].pos };
        let d = distance(nodes[u].pos, to);
        ledger.relay_tx += nodes[u].spend(params.tx_cost(d, bits));
        if v != BS_VERTEX {
            ledger.relay_rx += nodes[v].spend(params.rx_cost(bits));
        }
    }
}

pub(crate) fn settle_all(nodes: &mut [NodeState]) {
    for n in nodes.iter_mut() {
        n.settle();
    }
}

/// Charges one round: intra-cluster collection, then every head's
/// aggregated message along its planned path. Deaths are applied at the end.
pub fn execute_round(
    nodes: &mut [NodeState],
    assignment: &ClusterAssignment,
    plan: &RoutePlan,
    bs: Position,
    params: &EnergyParams,
    aggregated_bits: f64,
) -> Result<RoundLedger> {
    let mut ledger = RoundLedger::default();
    let mut pairs = Vec::with_capacity(assignment.ids.len());
    for (&id, &label) in assignment.ids.iter().zip(&assignment.labels) {
        let head = *assignment
            .heads
            .get(label)
            .ok_or_else(|| Error::contract(format!("label {label} has no head")))?;
        if id != head {
            pairs.push((id, head));
        }
    }
    charge_members(nodes, pairs, params, &mut ledger);
    for &head in &assignment.heads {
        let route = plan
            .route_for(head)
            .ok_or_else(|| Error::contract(format!("no route planned for head {head}")))?;
        charge_path(nodes, &route.path, bs, params, aggregated_bits, &mut ledger);
    }
    settle_all(nodes);
    Ok(ledger)
}
