//! Lloyd's k-means with k-means++ seeding and seeded restarts.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::random::SeedStream;

pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub labels: Vec<usize>,
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squares.
    pub cost: f64,
    /// Cost of the seeding (each point charged to its nearest seed).
    pub init_cost: f64,
    /// Cost after every assignment/update round.
    pub trace: Vec<f64>,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Nearest centroid; ties go to the lower cluster id.
fn nearest(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.nrows() {
        let d = sq_dist(points, i, centroids, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centroids(points: &DMatrix<f64>, k: usize, rng: &mut SeedStream) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points, i, &points.select_rows([chosen[0]].iter()), 0))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && t < w {
                    pick = i;
                    break;
                }
                t -= w;
            }
            // floating leftovers: fall back to the last positive weight
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // all remaining points coincide with a seed
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        let row = points.select_rows([next].iter());
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(sq_dist(points, i, &row, 0));
        }
    }
    points.select_rows(chosen.iter())
}

fn assign(points: &DMatrix<f64>, centroids: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>) {
    (0..points.nrows())
        .map(|i| nearest(points, i, centroids))
        .unzip()
}

fn update(points: &DMatrix<f64>, labels: &[usize], k: usize) -> (DMatrix<f64>, Vec<usize>) {
    let mut c = DMatrix::zeros(k, points.ncols());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let mut row = c.row_mut(l);
        row += points.row(i);
    }
    for (l, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            let mut row = c.row_mut(l);
            row /= cnt as f64;
        }
    }
    (c, counts)
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(
    points: &DMatrix<f64>,
    labels: &mut [usize],
    centroids: &mut DMatrix<f64>,
    counts: &mut [usize],
) {
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let mut far = None;
        let mut far_d = -1.0;
        for i in 0..points.nrows() {
            if counts[labels[i]] > 1 {
                let d = sq_dist(points, i, centroids, labels[i]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        let Some(i) = far else { return };
        counts[labels[i]] -= 1;
        labels[i] = empty;
        counts[empty] = 1;
        let (c, _) = update(points, labels, counts.len());
        *centroids = c;
    }
}

fn cost_of(points: &DMatrix<f64>, labels: &[usize], centroids: &DMatrix<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(points, i, centroids, l))
        .sum()
}

/// One seeded Lloyd run.
pub fn kmeans_single(points: &DMatrix<f64>, k: usize, rng: &mut SeedStream) -> KMeansRun {
    let n = points.nrows();
    assert!(
        k >= 1 && n >= k,
        "k-means needs 1 <= k <= N (k = {k}, N = {n})"
    );
    let mut centroids = seed_centroids(points, k, rng);
    let (mut labels, d) = assign(points, &centroids);
    let init_cost: f64 = d.iter().sum();
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let (c, mut counts) = update(points, &labels, k);
        centroids = c;
        repair_empty(points, &mut labels, &mut centroids, &mut counts);
        trace.push(cost_of(points, &labels, &centroids));
        let (next, _) = assign(points, &centroids);
        if next == labels {
            break;
        }
        labels = next;
    }
    let (c, mut counts) = update(points, &labels, k);
    centroids = c;
    repair_empty(points, &mut labels, &mut centroids, &mut counts);
    let cost = cost_of(points, &labels, &centroids);
    KMeansRun {
        labels,
        centroids,
        cost,
        init_cost,
        trace,
    }
}

/// Best of `restarts` seeded runs by cost; ties keep the earlier restart.
pub fn kmeans_with_restarts(
    points: &DMatrix<f64>,
    k: usize,
    restarts: usize,
    stream: &mut SeedStream,
) -> KMeansRun {
    let seeds: Vec<_> = (0..restarts.max(1)).map(|_| stream.fork()).collect();
    let runs: Vec<KMeansRun> = seeds
        .par_iter()
        .map(|s| kmeans_single(points, k, &mut s.stream()))
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.cost < runs[best].cost {
            best = i;
        }
    }
    runs.into_iter().nth(best).expect("at least one restart")
}

/// k-means labels of the rows of `points`.
pub fn kmeans(points: &DMatrix<f64>, k: usize, stream: &mut SeedStream) -> Vec<usize> {
    kmeans_with_restarts(points, k, DEFAULT_RESTARTS, stream).labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Seed;

    fn two_clouds(seed: u64) -> DMatrix<f64> {
        let mut s = Seed(seed).stream();
        DMatrix::from_fn(
            12,
            2,
            |i, _| if i < 6 { 0.0 } else { 100.0 } + s.standard_normal() * 0.1,
        )
    }

    fn partition_cost(points: &DMatrix<f64>, labels: &[usize]) -> f64 {
        let (c, _) = update(points, labels, 2);
        cost_of(points, labels, &c)
    }

    #[test]
    fn separates_clouds_like_exhaustive_search() {
        let p = two_clouds(1);
        let got = kmeans(&p, 2, &mut Seed(2).stream());
        // exhaustive 2-partition oracle
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1u32..(1 << 12) - 1 {
            let labels: Vec<usize> = (0..12).map(|i| ((mask >> i) & 1) as usize).collect();
            let c = partition_cost(&p, &labels);
            if c < best.0 {
                best = (c, mask);
            }
        }
        let oracle: Vec<usize> = (0..12).map(|i| ((best.1 >> i) & 1) as usize).collect();
        let same = got.iter().zip(&oracle).all(|(a, b)| a == b);
        let flipped = got.iter().zip(&oracle).all(|(a, b)| *a != *b);
        assert!(same || flipped);
        assert!(got[..6].iter().all(|&l| l == got[0]) && got[6..].iter().all(|&l| l != got[0]));
    }

    #[test]
    fn k_equals_n_has_zero_cost() {
        let p = two_clouds(3);
        let r = kmeans_with_restarts(&p, 12, 3, &mut Seed(4).stream());
        assert_eq!(r.cost, 0.0);
        let mut l = r.labels.clone();
        l.sort();
        l.dedup();
        assert_eq!(l.len(), 12);
    }

    #[test]
    fn identical_points_are_deterministic() {
        let p = DMatrix::from_element(5, 3, 0.7);
        let a = kmeans_with_restarts(&p, 2, 4, &mut Seed(5).stream());
        let b = kmeans_with_restarts(&p, 2, 4, &mut Seed(5).stream());
        assert_eq!(a.cost, 0.0);
        assert_eq!(a.labels, b.labels);
        assert!(a.labels.contains(&0) && a.labels.contains(&1));
    }

    #[test]
    fn cost_is_monotone() {
        let mut s = Seed(7).stream();
        let p = DMatrix::from_fn(60, 3, |_, _| s.standard_normal());
        for seed in 0..10 {
            let r = kmeans_single(&p, 4, &mut Seed(seed).stream());
            assert!(r.trace[0] <= r.init_cost + 1e-12);
            assert!(
                r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12),
                "{:?}",
                r.trace
            );
            assert!(r.cost <= r.init_cost + 1e-12);
        }
    }

    #[test]
    fn zero_row_tie_goes_to_cluster_zero() {
        let p = DMatrix::zeros(1, 2);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(nearest(&p, 0, &c), (0, 1.0));
    }
}
