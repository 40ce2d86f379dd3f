use crate::network::{distance, NodeState, Position};

/// Standardized (distance to base station, message length, sensed data).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; 3]);

impl FeatureVector {
    pub fn dist_to_bs(&self) -> f64 {
        self.0[0]
    }

    pub fn msg_len(&self) -> f64 {
        self.0[1]
    }

    pub fn sensed_data(&self) -> f64 {
        self.0[2]
    }
}

/// Feature vectors of the alive and awake nodes, in node order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Features {
    pub ids: Vec<usize>,
    pub vectors: Vec<FeatureVector>,
}

impl Features {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Z-scores each raw feature over the active population (population
/// standard deviation). Constant features map to 0.
pub fn extract_features(nodes: &[NodeState], bs: Position) -> Features {
    let active: Vec<&NodeState> = nodes.iter().filter(|n| n.is_active()).collect();
    if active.is_empty() {
        return Features::default();
    }
    let raw: Vec<[f64; 3]> = active
        .iter()
        .map(|n| [distance(n.pos, bs), n.msg_len as f64, n.sensed_data as f64])
        .collect();
    let n = raw.len() as f64;
    let mut mean = [0.0; 3];
    let mut scale = [0.0; 3];
    for d in 0..3 {
        mean[d] = raw.iter().map(|r| r[d]).sum::<f64>() / n;
        let var = raw.iter().map(|r| (r[d] - mean[d]).powi(2)).sum::<f64>() / n;
        let magnitude = raw.iter().map(|r| r[d].abs()).fold(0.0, f64::max);
        // Rounding in the mean of identical values leaves a residue of a few
        // ulps; treat that as zero variance.
        scale[d] = if var.sqrt() <= 1e-12 * magnitude.max(f64::MIN_POSITIVE) {
            0.0
        } else {
            1.0 / var.sqrt()
        };
    }
    let vectors = raw
        .iter()
        .map(|r| FeatureVector(std::array::from_fn(|d| (r[d] - mean[d]) * scale[d])))
        .collect();
    Features {
        ids: active.iter().map(|n| n.id).collect(),
        vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn node(id: usize, x: f64, msg: u32, sensed: u32) -> NodeState {
        NodeState::new(id, Position::new(x, 0.0), 2.0, msg, sensed)
    }

    #[test]
    fn identical_nodes_give_zero_vectors() {
        let nodes: Vec<_> = (0..5).map(|i| node(i, 0.1, 1000, 700)).collect();
        let f = extract_features(&nodes, Position::new(0.3, 0.7));
        assert_eq!(f.len(), 5);
        for v in &f.vectors {
            assert_eq!(v.0, [0.0; 3]);
        }
    }

    #[test]
    fn two_nodes_standardize_to_plus_minus_one() {
        let nodes = vec![node(0, 10.0, 1000, 500), node(1, 30.0, 3000, 500)];
        let f = extract_features(&nodes, Position::new(0.0, 0.0));
        assert_relative_eq!(f.vectors[0].dist_to_bs(), -1.0);
        assert_relative_eq!(f.vectors[1].dist_to_bs(), 1.0);
        assert_relative_eq!(f.vectors[0].msg_len(), -1.0);
        assert_eq!(f.vectors[0].sensed_data(), 0.0);
    }

    #[test]
    fn skips_dead_and_sleeping_nodes_and_keeps_node_order() {
        let mut nodes: Vec<_> = (0..4).map(|i| node(i, i as f64 * 10.0, 1000 + i as u32, 600)).collect();
        nodes[1].alive = false;
        nodes[2].awake = false;
        let f = extract_features(&nodes, Position::new(0.0, 0.0));
        assert_eq!(f.ids, vec![0, 3]);
        let mut reversed = nodes.clone();
        reversed.reverse();
        let g = extract_features(&reversed, Position::new(0.0, 0.0));
        assert_eq!(g.ids, vec![3, 0]);
        assert_eq!(g.vectors[0], f.vectors[1]);
    }

    #[test]
    fn empty_population() {
        assert!(extract_features(&[], Position::new(0.0, 0.0)).is_empty());
    }
}
