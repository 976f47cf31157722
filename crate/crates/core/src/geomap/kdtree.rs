//! A small static kd-tree over unit vectors on the sphere.
//!
//! Chord length is monotone in great-circle distance, so nearest neighbors
//! by Euclidean distance on the unit sphere are the haversine neighbors.

use crate::geo::{LonLat, EARTH_RADIUS_KM};

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    /// Point indices arranged as an implicit balanced tree.
    order: Vec<usize>,
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Great-circle distance in km for a unit-sphere chord length.
pub fn chord_to_km(chord: f64) -> f64 {
    2.0 * EARTH_RADIUS_KM * (0.5 * chord).min(1.0).asin()
}

impl KdTree {
    pub fn new(positions: &[LonLat]) -> Self {
        let points: Vec<[f64; 3]> = positions.iter().map(|p| p.to_unit()).collect();
        let mut order: Vec<usize> = (0..points.len()).collect();
        build(&points, &mut order, 0);
        KdTree { points, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest points as `(index, chord length)`, nearest first,
    /// ties broken by index.
    pub fn nearest(&self, q: LonLat, k: usize) -> Vec<(usize, f64)> {
        let q = q.to_unit();
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 {
            self.search(&q, 0, self.order.len(), 0, k, &mut best);
        }
        best.into_iter().map(|(d2, i)| (i, d2.sqrt())).collect()
    }

    fn search(&self, q: &[f64; 3], lo: usize, hi: usize, depth: usize, k: usize, best: &mut Vec<(f64, usize)>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let p = &self.points[idx];
        let cand = (dist2(q, p), idx);
        let pos = best.partition_point(|b| b.0 < cand.0 || (b.0 == cand.0 && b.1 < cand.1));
        if pos < k {
            best.insert(pos, cand);
            best.truncate(k);
        }
        let axis = depth % 3;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, depth + 1, k, best);
        if best.len() < k || diff * diff <= best[best.len() - 1].0 {
            self.search(q, far.0, far.1, depth + 1, k, best);
        }
    }
}

fn build(points: &[[f64; 3]], order: &mut [usize], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut right[1..], depth + 1);
}
