use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Outcome of a Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    /// Inertia after each assignment step; entry 0 follows seeding.
    pub inertia_trace: Vec<f64>,
    /// Number of centroid updates performed.
    pub iterations: usize,
    /// True when the last update left every assignment unchanged.
    pub converged: bool,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        *self.inertia_trace.last().expect("trace is never empty")
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid, lowest index on ties.
pub(crate) fn nearest_centroid(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn count_distinct(data: &[Vec<f64>], limit: usize) -> usize {
    let mut seen: Vec<&[f64]> = Vec::new();
    for x in data {
        if !seen.contains(&x.as_slice()) {
            seen.push(x);
            if seen.len() >= limit {
                break;
            }
        }
    }
    seen.len()
}

fn plus_plus_seed(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![data[rng.random_range(0..data.len())].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            pick = Some(i);
            if target < w {
                break;
            }
            target -= w;
        }
        let pick = pick.expect("fewer distinct points than clusters");
        let c = data[pick].clone();
        for (slot, x) in d2.iter_mut().zip(data) {
            *slot = slot.min(sq_dist(x, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Empty clusters are reseeded at the point farthest from its nearest
/// centroid so that exactly `k` centroids survive.
pub fn kmeans_fit(data: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let dim = data
        .first()
        .ok_or_else(|| Error::invalid("no descriptors to cluster"))?
        .len();
    if dim == 0 || data.iter().any(|x| x.len() != dim) {
        return Err(Error::invalid("descriptors must share one non-zero length"));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("descriptors contain non-finite values"));
    }
    if data.len() < k || count_distinct(data, k) < k {
        return Err(Error::Infeasible(format!(
            "need at least {k} distinct descriptors to form {k} clusters"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seed(data, k, &mut rng);

    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let mut labels = Vec::with_capacity(data.len());
        let mut inertia = 0.0;
        for x in data {
            let (j, d) = nearest_centroid(centroids, x);
            labels.push(j);
            inertia += d;
        }
        (labels, inertia)
    };

    let (mut labels, inertia) = assign(&centroids);
    let mut trace = vec![inertia];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iters {
        update_means(data, &labels, &mut centroids);
        iterations += 1;
        let (next, inertia) = assign(&centroids);
        trace.push(inertia);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }

    Ok(KMeansFit {
        centroids,
        inertia_trace: trace,
        iterations,
        converged,
    })
}

fn update_means(data: &[Vec<f64>], labels: &[usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = centroids[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &j) in data.iter().zip(labels) {
        counts[j] += 1;
        for (s, v) in sums[j].iter_mut().zip(x) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let n = counts[j] as f64;
            for (c, s) in centroids[j].iter_mut().zip(&sums[j]) {
                *c = s / n;
            }
        }
    }
    for j in (0..k).filter(|&j| counts[j] == 0) {
        let (far, _) = data
            .iter()
            .enumerate()
            .map(|(i, x)| (i, nearest_centroid(centroids, x).1))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        centroids[j] = data[far].clone();
    }
}
