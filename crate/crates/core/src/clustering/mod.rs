//! Node clustering and cluster-head election.

mod election;
mod features;
mod gmm;
mod kmeans;

pub use election::{compact_labels, elect_heads};
pub use features::{extract_features, Features, FeatureVector};
pub use gmm::{gmm_fit, GmmFit, GmmModel};
pub use kmeans::{kmeans, KMeansFit};

use crate::config::{ClusteringConfig, ClusteringMethod};
use crate::error::Result;
use crate::network::{NodeState, Position};
use crate::rng::RngStream;

pub(crate) fn sq_dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster memberships and elected heads for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Member node ids, parallel to `labels`.
    pub ids: Vec<usize>,
    pub labels: Vec<usize>,
    /// Head node id per cluster index.
    pub heads: Vec<usize>,
    pub method: ClusteringMethod,
}

impl ClusterAssignment {
    pub fn cluster_count(&self) -> usize {
        self.heads.len()
    }

    pub fn label_of(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&x| x == id).map(|i| self.labels[i])
    }

    pub fn is_head(&self, id: usize) -> bool {
        self.heads.contains(&id)
    }

    /// Members of cluster `c`, head included.
    pub fn members(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.ids
            .iter()
            .zip(&self.labels)
            .filter(move |(_, &l)| l == c)
            .map(|(&id, _)| id)
    }
}

/// Clusters the alive and awake nodes on their feature vectors and elects
/// one head per non-empty cluster. Returns `None` when nobody is active.
pub fn cluster_and_elect(
    nodes: &[NodeState],
    bs: Position,
    k: usize,
    cfg: &ClusteringConfig,
    cluster_rng: &mut RngStream,
    election_rng: &mut RngStream,
) -> Result<Option<ClusterAssignment>> {
    let feats = extract_features(nodes, bs);
    if feats.is_empty() {
        return Ok(None);
    }
    let k = k.clamp(1, feats.len());
    let points: Vec<[f64; 3]> = feats.vectors.iter().map(|v| v.0).collect();
    let raw = match cfg.method {
        ClusteringMethod::Kmeans => kmeans(&points, k, cfg.kmeans_max_iter, cluster_rng)?.labels,
        ClusteringMethod::Gmm => {
            gmm_fit(&points, k, cfg.gmm_max_iter, cfg.gmm_tol, cfg.gmm_reg, cluster_rng)?.labels
        }
    };
    let (labels, k) = compact_labels(&raw, k);
    let heads = elect_heads(nodes, &feats.ids, &labels, k, election_rng)?;
    Ok(Some(ClusterAssignment {
        ids: feats.ids,
        labels,
        heads,
        method: cfg.method,
    }))
}
