//! K-means clustering of gaze points with seeded D² initialisation, and the
//! looking-time ranking of the resulting clusters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_K: usize = 4;
pub const MAX_ITERATIONS: usize = 100;
pub const RESTARTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("need at least {k} valid samples to form {k} clusters, got {available}")]
    TooFewSamples { k: usize, available: usize },
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<[f64; 2]>,
    pub assignments: Vec<usize>,
    pub counts: Vec<usize>,
    pub rank_order: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    /// Within-cluster squared distance after each assignment step.
    pub inertia_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn ranking_statement(&self) -> String {
        ranking_statement(&self.rank_order)
    }
}

/// Cluster indices by descending member count, ties by ascending index.
pub fn rank_clusters(counts: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(counts[i]), i));
    order
}

/// "looked most in cluster 3, then 1, then 0 and then 2"
pub fn ranking_statement(rank_order: &[usize]) -> String {
    let mut out = String::from("looked most in cluster");
    for (pos, c) in rank_order.iter().enumerate() {
        match pos {
            0 => out.push_str(&format!(" {c}")),
            p if p + 1 == rank_order.len() => out.push_str(&format!(" and then {c}")),
            _ => out.push_str(&format!(", then {c}")),
        }
    }
    out
}

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, sq_dist(p, centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(p, *c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign(points: &[[f64; 2]], centroids: &[[f64; 2]], assignments: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (p, a) in points.iter().zip(assignments.iter_mut()) {
        let (j, d) = nearest(*p, centroids);
        *a = j;
        inertia += d;
    }
    inertia
}

fn seed_centroids(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(*p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = points.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick];
        centroids.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(*p, c));
        }
    }
    centroids
}

struct Run {
    centroids: Vec<[f64; 2]>,
    assignments: Vec<usize>,
    inertia: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn lloyd(local: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Run {
    let mut centroids = seed_centroids(local, k, rng);
    let mut assignments = vec![0usize; local.len()];
    let mut inertia = assign(local, &centroids, &mut assignments);
    let mut trace = vec![inertia];
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in local.iter().zip(&assignments) {
            sums[a][0] += p[0];
            sums[a][1] += p[1];
            counts[a] += 1;
        }
        let mut taken = Vec::new();
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..local.len())
                    .filter(|i| !taken.contains(i))
                    .map(|i| (i, sq_dist(local[i], centroids[assignments[i]])))
                    .fold(None::<(usize, f64)>, |best, cand| match best {
                        Some(b) if b.1 >= cand.1 => Some(b),
                        _ => Some(cand),
                    });
                if let Some((i, _)) = far {
                    centroids[j] = local[i];
                    taken.push(i);
                }
            }
        }
        let previous = assignments.clone();
        inertia = assign(local, &centroids, &mut assignments);
        trace.push(inertia);
        if assignments == previous {
            break;
        }
    }

    Run { centroids, assignments, inertia, iterations, trace }
}

/// Lloyd iteration from D²-weighted seeding, best of [`RESTARTS`] seedings
/// drawn in turn from one generator.
///
/// Computation runs in coordinates relative to the bounding-box corner of the
/// input, so translating integer-valued inputs by an integer offset follows
/// the same arithmetic path. Stops when assignments stop changing or after
/// [`MAX_ITERATIONS`] updates. An empty cluster is reseeded at the point
/// farthest from its current centroid.
pub fn cluster_gaze(points: &[[f64; 2]], k: usize, seed: u64) -> Result<ClusterModel, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if points.len() < k {
        return Err(ClusterError::TooFewSamples { k, available: points.len() });
    }
    let origin = points.iter().fold([f64::INFINITY, f64::INFINITY], |o, p| [o[0].min(p[0]), o[1].min(p[1])]);
    let local: Vec<[f64; 2]> = points.iter().map(|p| [p[0] - origin[0], p[1] - origin[1]]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Run> = None;
    for _ in 0..RESTARTS {
        let run = lloyd(&local, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let Run { centroids, assignments, inertia, iterations, trace } = best.expect("at least one restart");

    let mut counts = vec![0usize; k];
    for &a in &assignments {
        counts[a] += 1;
    }
    Ok(ClusterModel {
        k,
        centroids: centroids.iter().map(|c| [c[0] + origin[0], c[1] + origin[1]]).collect(),
        rank_order: rank_clusters(&counts),
        counts,
        assignments,
        inertia,
        iterations,
        inertia_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_single_cluster() {
        let pts = vec![[321.0, 123.0]; 50];
        let m = cluster_gaze(&pts, 1, 7).unwrap();
        assert_eq!(m.centroids, vec![[321.0, 123.0]]);
        assert_eq!(m.inertia, 0.0);
        assert_eq!(m.rank_order, vec![0]);
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(
            cluster_gaze(&[[0.0, 0.0]; 3], 4, 1),
            Err(ClusterError::TooFewSamples { k: 4, available: 3 })
        );
        assert_eq!(cluster_gaze(&[[0.0, 0.0]], 0, 1), Err(ClusterError::ZeroK));
    }

    #[test]
    fn rank_ties_by_index() {
        assert_eq!(rank_clusters(&[10, 10, 10, 10]), vec![0, 1, 2, 3]);
        assert_eq!(rank_clusters(&[5, 40, 1, 20]), vec![1, 3, 0, 2]);
    }

    #[test]
    fn statement_format() {
        assert_eq!(ranking_statement(&[3, 1, 0, 2]), "looked most in cluster 3, then 1, then 0 and then 2");
        assert_eq!(ranking_statement(&[0]), "looked most in cluster 0");
        assert_eq!(ranking_statement(&[1, 0]), "looked most in cluster 1 and then 0");
    }

    #[test]
    fn duplicate_points_with_more_clusters() {
        let mut pts = vec![[10.0, 10.0]; 20];
        pts.extend(vec![[500.0, 500.0]; 5]);
        let m = cluster_gaze(&pts, 3, 3).unwrap();
        assert_eq!(m.counts.iter().sum::<usize>(), 25);
        assert!(m.centroids.iter().all(|c| c[0].is_finite() && c[1].is_finite()));
        assert_eq!(m.inertia, 0.0);
    }
}
