use rand::Rng;

use crate::error::{Error, Result};
use crate::network::NodeState;
use crate::rng::RngStream;

/// Renumbers labels to `0..k'` dropping empty clusters, preserving the
/// relative order of the surviving cluster indices.
pub fn compact_labels(labels: &[usize], k: usize) -> (Vec<usize>, usize) {
    let mut used = vec![false; k];
    for &l in labels {
        used[l] = true;
    }
    let mut remap = vec![usize::MAX; k];
    let mut next = 0;
    for c in 0..k {
        if used[c] {
            remap[c] = next;
            next += 1;
        }
    }
    (labels.iter().map(|&l| remap[l]).collect(), next)
}

/// Picks the member with the most residual energy in each of the `k`
/// clusters, lowest id first on ties. When every member of a multi-node
/// cluster holds exactly the same energy (the first round), the head is
/// drawn uniformly from the members instead.
///
/// `ids[i]` is the node id carrying `labels[i]`; ids index into `nodes`.
pub fn elect_heads(
    nodes: &[NodeState],
    ids: &[usize],
    labels: &[usize],
    k: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if ids.len() != labels.len() {
        return Err(Error::contract("ids and labels differ in length"));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (&id, &l) in ids.iter().zip(labels) {
        let slot = members
            .get_mut(l)
            .ok_or_else(|| Error::Internal(format!("label {l} out of range for {k} clusters")))?;
        slot.push(id);
    }
    members
        .iter_mut()
        .enumerate()
        .map(|(c, group)| {
            if group.is_empty() {
                return Err(Error::Internal(format!("cluster {c} has no members")));
            }
            group.sort_unstable();
            let first = nodes[group[0]].energy;
            if group.len() > 1 && group.iter().all(|&id| nodes[id].energy == first) {
                return Ok(group[rng.random_range(0..group.len())]);
            }
            let mut best = group[0];
            for &id in &group[1..] {
                if nodes[id].energy > nodes[best].energy {
                    best = id;
                }
            }
            Ok(best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Position;
    use proptest::prelude::*;

    fn nodes_with(energies: &[f64]) -> Vec<NodeState> {
        energies
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let mut n = NodeState::new(i, Position::new(i as f64, 0.0), 2.0, 100, 100);
                n.energy = e;
                n
            })
            .collect()
    }

    #[test]
    fn highest_energy_wins() {
        let nodes = nodes_with(&[1.5, 2.0, 1.0]);
        let heads = elect_heads(&nodes, &[0, 1, 2], &[0, 0, 0], 1, &mut RngStream::new(0)).unwrap();
        assert_eq!(heads, vec![1]);
    }

    #[test]
    fn partial_ties_go_to_lowest_id() {
        let nodes = nodes_with(&[1.0, 1.8, 1.8, 0.5]);
        let heads =
            elect_heads(&nodes, &[3, 2, 1, 0], &[0, 0, 0, 0], 1, &mut RngStream::new(0)).unwrap();
        assert_eq!(heads, vec![1]);
    }

    #[test]
    fn fully_equal_cluster_elects_randomly_but_reproducibly() {
        let nodes = nodes_with(&[2.0; 6]);
        let ids = [0, 1, 2, 3, 4, 5];
        let labels = [0; 6];
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let a = elect_heads(&nodes, &ids, &labels, 1, &mut RngStream::new(seed)).unwrap();
            let b = elect_heads(&nodes, &ids, &labels, 1, &mut RngStream::new(seed)).unwrap();
            assert_eq!(a, b);
            seen.insert(a[0]);
        }
        assert!(seen.len() > 1);
    }

    #[test]
    fn singleton_cluster() {
        let nodes = nodes_with(&[0.2, 1.0]);
        let heads = elect_heads(&nodes, &[0, 1], &[1, 0], 2, &mut RngStream::new(0)).unwrap();
        assert_eq!(heads, vec![1, 0]);
    }

    #[test]
    fn empty_cluster_is_internal_error() {
        let nodes = nodes_with(&[1.0, 1.0]);
        assert!(matches!(
            elect_heads(&nodes, &[0, 1], &[0, 0], 2, &mut RngStream::new(0)),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn compaction_drops_empty_clusters() {
        assert_eq!(compact_labels(&[4, 0, 4, 2], 5), (vec![2, 0, 2, 1], 3));
    }

    proptest! {
        #[test]
        fn election_ignores_member_order(energies in prop::collection::vec(0.0..2.0f64, 2..20), rot in 0usize..20) {
            let nodes = nodes_with(&energies);
            let ids: Vec<usize> = (0..energies.len()).collect();
            let mut shuffled = ids.clone();
            shuffled.rotate_left(rot % ids.len());
            let labels = vec![0; ids.len()];
            let a = elect_heads(&nodes, &ids, &labels, 1, &mut RngStream::new(1)).unwrap();
            let b = elect_heads(&nodes, &shuffled, &labels, 1, &mut RngStream::new(1)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
