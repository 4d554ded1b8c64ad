//! Location features: residence and activity distances to a branch, and
//! nearest-neighbour visit means over training customers.

use std::cmp::Ordering;

use crate::dataset::{Branch, Customer, CustomerId, Point};

/// Neighbour counts for the kNN visit features: 1, 2, 4, ..., 1024.
pub const KNN_KS: [usize; 11] = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024];

pub fn residence_branch_distance(customer: &Customer, branch: &Branch) -> f64 {
    customer.residence.distance(&branch.location)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceStats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
}

/// Distance summary between `branch` and the given activity positions.
/// Without any positions every statistic falls back to the residence
/// distance.
pub fn activity_distance_stats(positions: &[Point], customer: &Customer, branch: &Branch) -> DistanceStats {
    if positions.is_empty() {
        let d = residence_branch_distance(customer, branch);
        return DistanceStats {
            max: d,
            min: d,
            mean: d,
            median: d,
        };
    }
    let mut d: Vec<f64> = positions.iter().map(|p| p.distance(&branch.location)).collect();
    d.sort_by(f64::total_cmp);
    let n = d.len();
    let median = if n % 2 == 1 {
        d[n / 2]
    } else {
        0.5 * (d[n / 2 - 1] + d[n / 2])
    };
    DistanceStats {
        max: d[n - 1],
        min: d[0],
        mean: d.iter().sum::<f64>() / n as f64,
        median,
    }
}

/// Training customers' residences, searchable by distance.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    ids: Vec<CustomerId>,
    points: Vec<Point>,
}

impl KnnIndex {
    pub fn new<'a>(train: impl IntoIterator<Item = &'a Customer>) -> Self {
        let mut rows: Vec<(CustomerId, Point)> = train.into_iter().map(|c| (c.id, c.residence)).collect();
        rows.sort_by_key(|r| r.0);
        let (ids, points) = rows.into_iter().unzip();
        Self { ids, points }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ids in index order (ascending).
    pub fn ids(&self) -> &[CustomerId] {
        &self.ids
    }

    /// Up to `limit` training positions nearest to `query`, nearest first,
    /// ties by ascending id. A training customer never neighbours itself.
    pub fn neighbors(&self, query: &Customer, limit: usize) -> Vec<u32> {
        let mut cand: Vec<(f64, CustomerId, u32)> = self
            .ids
            .iter()
            .zip(&self.points)
            .enumerate()
            .filter(|(_, (&id, _))| id != query.id)
            .map(|(i, (&id, p))| (query.residence.distance(p), id, i as u32))
            .collect();
        let order = |a: &(f64, CustomerId, u32), b: &(f64, CustomerId, u32)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if limit == 0 {
            return Vec::new();
        }
        if cand.len() > limit {
            cand.select_nth_unstable_by(limit - 1, order);
            cand.truncate(limit);
        }
        cand.sort_unstable_by(order);
        cand.into_iter().map(|c| c.2).collect()
    }
}

/// Mean visit count over the `k` nearest neighbours for each `k` in `ks`,
/// with `k` capped at the number of neighbours available. `counts` is
/// aligned with the index order of `neighbors`' source. Returns 0 for
/// every `k` when there are no neighbours.
pub(crate) fn neighbor_means(neighbors: &[u32], counts: &[u32], ks: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ks.len());
    let mut sum: u64 = 0;
    let mut taken = 0;
    for &k in ks {
        let k = k.min(neighbors.len());
        while taken < k {
            sum += counts[neighbors[taken] as usize] as u64;
            taken += 1;
        }
        out.push(if k == 0 { 0.0 } else { sum as f64 / k as f64 });
    }
    out
}

/// kNN visit features for one query and one branch. `counts[i]` is the
/// branch visit count of `train[i]`. Each `k` is capped at the number of
/// available neighbours, and the query is excluded if it is in `train`.
pub fn knn_visit_features(train: &[Customer], counts: &[u32], query: &Customer, ks: &[usize]) -> Vec<f64> {
    assert_eq!(train.len(), counts.len(), "one count per training customer");
    let index = KnnIndex::new(train);
    let by_id: std::collections::HashMap<CustomerId, u32> =
        train.iter().zip(counts).map(|(c, &n)| (c.id, n)).collect();
    let aligned: Vec<u32> = index.ids().iter().map(|id| by_id[id]).collect();
    let limit = ks.iter().copied().max().unwrap_or(0);
    neighbor_means(&index.neighbors(query, limit), &aligned, ks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::customer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn branch_at(x: f64, y: f64) -> Branch {
        Branch {
            id: 0,
            location: Point::new(x, y),
        }
    }

    #[test]
    fn residence_distance_examples() {
        assert_eq!(residence_branch_distance(&customer(1, 0.0, 0.0), &branch_at(3.0, 4.0)), 5.0);
        assert_eq!(residence_branch_distance(&customer(1, 2.0, 2.0), &branch_at(2.0, 2.0)), 0.0);
    }

    #[test]
    fn distance_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            let b = Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            assert_eq!(a.distance(&b), b.distance(&a));
        }
    }

    #[test]
    fn distance_stats_examples() {
        let c = customer(1, 0.0, 3.0);
        let b = branch_at(0.0, 0.0);
        let pts: Vec<Point> = [1.0, 4.0, 2.0, 3.0].iter().map(|&x| Point::new(x, 0.0)).collect();
        assert_eq!(
            activity_distance_stats(&pts, &c, &b),
            DistanceStats { max: 4.0, min: 1.0, mean: 2.5, median: 2.5 }
        );
        let single = activity_distance_stats(&[Point::new(0.0, 7.0)], &c, &b);
        assert_eq!(single, DistanceStats { max: 7.0, min: 7.0, mean: 7.0, median: 7.0 });
        let fallback = activity_distance_stats(&[], &customer(1, 3.0, 4.0), &b);
        assert_eq!(fallback, DistanceStats { max: 5.0, min: 5.0, mean: 5.0, median: 5.0 });
    }

    #[test]
    fn knn_single_neighbor() {
        let train = vec![customer(1, 0.0, 0.0), customer(2, 10.0, 0.0)];
        let q = customer(9, 1.0, 0.0);
        assert_eq!(knn_visit_features(&train, &[3, 8], &q, &[1]), [3.0]);
    }

    #[test]
    fn knn_caps_at_train_size() {
        let train = vec![customer(1, 0.0, 0.0), customer(2, 10.0, 0.0), customer(3, 5.0, 5.0)];
        let q = customer(9, 1.0, 0.0);
        let f = knn_visit_features(&train, &[3, 8, 1], &q, &KNN_KS);
        assert_eq!(f.len(), 11);
        assert_eq!(f[2..], [4.0; 9]);
    }

    #[test]
    fn knn_leave_one_out_and_ties() {
        // 2 and 3 are equidistant from 1; the lower id wins the tie
        let train = vec![customer(1, 0.0, 0.0), customer(3, 0.0, 1.0), customer(2, 1.0, 0.0)];
        let f = knn_visit_features(&train, &[100, 7, 5], &train[0], &[1, 2, 4]);
        assert_eq!(f, [5.0, 6.0, 6.0]);
        // a lone training customer has no neighbours
        assert_eq!(knn_visit_features(&train[..1], &[4], &train[0], &[1]), [0.0]);
    }
}
