//! Seeded k-means over unit vectors: k-means++ seeding, Lloyd iterations on
//! squared Euclidean distance, empty clusters repaired by stealing the point
//! farthest from its centroid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::logic::Symbol;

pub const MAX_ITERATIONS: usize = 100;
pub const SHIFT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KmeansError {
    #[error("k = {k} exceeds the number of points ({n})")]
    TooFewPoints { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("point `{symbol}` has dimension {found}, expected {expected}")]
    DimensionMismatch { symbol: String, expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// Sorted member symbols.
    pub members: Vec<Symbol>,
    pub centroid: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if r < d {
                        break;
                    }
                    r -= d;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            // all remaining points coincide with a center
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].to_vec()).collect()
}

fn assign(points: &[&[f64]], centroids: &mut [Vec<f64>], labels: &mut [usize]) {
    for (i, p) in points.iter().enumerate() {
        labels[i] = nearest(p, centroids).0;
    }
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        labels.iter().for_each(|&l| sizes[l] += 1);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { return };
        let victim = (0..points.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| {
                dist2(points[a], &centroids[labels[a]])
                    .total_cmp(&dist2(points[b], &centroids[labels[b]]))
                    .then(b.cmp(&a))
            })
            .expect("k <= n leaves a cluster with two or more points");
        labels[victim] = empty;
        centroids[empty] = points[victim].to_vec();
    }
}

fn means(points: &[&[f64]], labels: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        sums[l].iter_mut().zip(p.iter()).for_each(|(s, x)| *s += x);
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|x| *x /= c as f64);
    }
    sums
}

/// Partitions `points` into `k` non-empty clusters. Output clusters are
/// ordered by their smallest member symbol. Deterministic for a fixed seed
/// and input order.
pub fn kmeans(points: &[(Symbol, Vec<f64>)], k: usize, seed: u64) -> Result<Vec<Cluster>, KmeansError> {
    if k == 0 {
        return Err(KmeansError::ZeroK);
    }
    if k > points.len() {
        return Err(KmeansError::TooFewPoints { k, n: points.len() });
    }
    let dim = points[0].1.len();
    if let Some((s, v)) = points.iter().find(|(_, v)| v.len() != dim) {
        return Err(KmeansError::DimensionMismatch { symbol: s.to_string(), expected: dim, found: v.len() });
    }
    let vecs: Vec<&[f64]> = points.iter().map(|(_, v)| v.as_slice()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(&vecs, k, &mut rng);
    let mut labels = vec![0usize; vecs.len()];
    assign(&vecs, &mut centroids, &mut labels);
    for _ in 0..MAX_ITERATIONS {
        let next = means(&vecs, &labels, k, dim);
        let shift = next.iter().zip(&centroids).map(|(a, b)| dist2(a, b).sqrt()).fold(0.0, f64::max);
        centroids = next;
        assign(&vecs, &mut centroids, &mut labels);
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    let centroids = means(&vecs, &labels, k, dim);
    let mut clusters: Vec<Cluster> =
        centroids.into_iter().map(|centroid| Cluster { members: Vec::new(), centroid }).collect();
    for ((s, _), &l) in points.iter().zip(&labels) {
        clusters[l].members.push(s.clone());
    }
    clusters.iter_mut().for_each(|c| c.members.sort());
    clusters.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
    Ok(clusters)
}

/// Within-cluster sum of squared distances to the cluster means.
pub fn inertia(points: &[(Symbol, Vec<f64>)], clusters: &[Cluster]) -> f64 {
    clusters
        .iter()
        .map(|c| {
            c.members
                .iter()
                .map(|m| dist2(&points.iter().find(|(s, _)| s == m).expect("member of points").1, &c.centroid))
                .sum::<f64>()
        })
        .sum()
}
