//! Scale-aware clustering of points on the line.
//!
//! Points are greedily merged while any two clusters come within
//! `2C sqrt(n) ln(n)` of each other (minimum distance over member pairs).
//! The result is exactly the set of connected components of the threshold
//! graph, which gives the separation guarantees: distinct clusters are more
//! than one threshold apart, and a cluster of size s has diameter at most
//! `(s - 1)` thresholds, so at most `2Ck sqrt(n) ln(n)` for k points.
//!
//! Cluster ids are assigned 1..=m in increasing order of the smallest member
//! value, and arbitrary reals are assigned to the cluster of their nearest
//! point (ties prefer the lower point value, then the lower point index).

use std::collections::BTreeMap;

/// A clustering of points with the threshold-separation property.
#[derive(Debug, Clone)]
pub struct SeparatedPartition {
    points: Vec<f64>,
    cluster_of_point: Vec<usize>,
    cluster_count: usize,
    threshold: f64,
    c_param: f64,
    n: u64,
}

/// Merge threshold `2C sqrt(n) ln(n)` (natural logarithm).
pub fn merge_threshold(c_param: f64, n: u64) -> f64 {
    2.0 * c_param * (n as f64).sqrt() * (n as f64).ln()
}

/// Cluster the points at the scale set by C and n.
pub fn build_partition(points: &[f64], c_param: f64, n: u64) -> SeparatedPartition {
    assert!(!points.is_empty(), "cannot partition zero points");
    assert!(c_param > 0.0 && c_param.is_finite());
    assert!(n >= 2, "scale parameter n must be at least 2");
    assert!(points.iter().all(|v| v.is_finite()));

    let threshold = merge_threshold(c_param, n);
    let m = points.len();
    // slot of each point; slots are merged downward, lower slot wins
    let mut slot_of_point: Vec<usize> = (0..m).collect();

    'merge: loop {
        let mut slots: Vec<usize> = slot_of_point.to_vec();
        slots.sort_unstable();
        slots.dedup();
        for (a, &si) in slots.iter().enumerate() {
            for &sj in slots.iter().skip(a + 1) {
                let close = points
                    .iter()
                    .zip(&slot_of_point)
                    .filter(|&(_, &s)| s == si)
                    .any(|(pi, _)| {
                        points
                            .iter()
                            .zip(&slot_of_point)
                            .filter(|&(_, &s)| s == sj)
                            .any(|(pj, _)| (pi - pj).abs() <= threshold)
                    });
                if close {
                    for s in slot_of_point.iter_mut() {
                        if *s == sj {
                            *s = si;
                        }
                    }
                    continue 'merge;
                }
            }
        }
        break;
    }

    // relabel 1..=m by ascending minimum member value
    let mut min_by_slot: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, &s) in slot_of_point.iter().enumerate() {
        let entry = min_by_slot.entry(s).or_insert(f64::INFINITY);
        if points[i] < *entry {
            *entry = points[i];
        }
    }
    let mut order: Vec<(f64, usize)> = min_by_slot.iter().map(|(&s, &v)| (v, s)).collect();
    order.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    let id_of_slot: BTreeMap<usize, usize> = order
        .iter()
        .enumerate()
        .map(|(rank, &(_, slot))| (slot, rank + 1))
        .collect();
    let cluster_of_point = slot_of_point.iter().map(|s| id_of_slot[s]).collect();

    SeparatedPartition {
        points: points.to_vec(),
        cluster_of_point,
        cluster_count: order.len(),
        threshold,
        c_param,
        n,
    }
}

impl SeparatedPartition {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Cluster id (1-based) of each input point, in input order.
    pub fn cluster_of_point(&self) -> &[usize] {
        &self.cluster_of_point
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn c_param(&self) -> f64 {
        self.c_param
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Indices of the points in one cluster.
    pub fn members(&self, id: usize) -> Vec<usize> {
        self.cluster_of_point
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == id)
            .map(|(i, _)| i)
            .collect()
    }

    /// Cluster id of the nearest input point; ties prefer the lower point
    /// value, then the lower point index.
    pub fn assign(&self, value: f64) -> usize {
        let mut best = 0usize;
        for i in 1..self.points.len() {
            let (di, db) = ((self.points[i] - value).abs(), (self.points[best] - value).abs());
            if di < db || (di == db && self.points[i] < self.points[best]) {
                best = i;
            }
        }
        self.cluster_of_point[best]
    }

    /// Arithmetic mean of the member points of each cluster.
    pub fn cluster_means(&self) -> BTreeMap<usize, f64> {
        let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for (&c, &v) in self.cluster_of_point.iter().zip(&self.points) {
            let e = sums.entry(c).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        sums.into_iter()
            .map(|(c, (sum, count))| (c, sum / count as f64))
            .collect()
    }
}
