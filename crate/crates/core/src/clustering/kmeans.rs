use rand::seq::index::sample;

use super::sq_dist;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit<const D: usize> {
    pub labels: Vec<usize>,
    pub centroids: Vec<[f64; D]>,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
    pub converged: bool,
}

impl<const D: usize> KMeansFit<D> {
    pub fn inertia(&self) -> f64 {
        self.inertia_trace.last().copied().unwrap_or(0.0)
    }
}

fn nearest<const D: usize>(p: &[f64; D], centroids: &[[f64; D]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm from `k` distinct random points. Stops when an
/// assignment step changes no label, or after `max_iter` steps.
pub fn kmeans<const D: usize>(
    points: &[[f64; D]],
    k: usize,
    max_iter: usize,
    rng: &mut RngStream,
) -> Result<KMeansFit<D>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::config(format!(
            "k-means needs 1 <= k <= {n} points, got k = {k}"
        )));
    }
    let mut centroids: Vec<[f64; D]> = sample(rng, n, k).iter().map(|i| points[i]).collect();
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut inertia_trace = Vec::new();
    let mut converged = false;

    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            dists[i] = d;
        }
        changed |= reseed_empty(points, &mut labels, &mut dists, &mut centroids);
        inertia_trace.push(dists.iter().sum());
        if !changed {
            converged = true;
            break;
        }
        update_centroids(points, &labels, &mut centroids);
    }

    Ok(KMeansFit {
        labels,
        centroids,
        inertia_trace,
        converged,
    })
}

/// Moves the point farthest from its centroid into each empty cluster,
/// taking only from clusters that keep at least one member.
fn reseed_empty<const D: usize>(
    points: &[[f64; D]],
    labels: &mut [usize],
    dists: &mut [f64],
    centroids: &mut [[f64; D]],
) -> bool {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut moved = false;
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let donor = (0..points.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
        let Some(i) = donor else { break };
        sizes[labels[i]] -= 1;
        sizes[c] += 1;
        labels[i] = c;
        dists[i] = 0.0;
        centroids[c] = points[i];
        moved = true;
    }
    moved
}

fn update_centroids<const D: usize>(points: &[[f64; D]], labels: &[usize], centroids: &mut [[f64; D]]) {
    let k = centroids.len();
    let mut sums = vec![[0.0; D]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for d in 0..D {
            sums[l][d] += p[d];
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = std::array::from_fn(|d| sums[c][d] / counts[c] as f64);
        }
    }
}
