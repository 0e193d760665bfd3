//! k-nearest-neighbour scorer over a k-d tree.
//!
//! Neighbours are ordered by `(squared Euclidean distance, training index)`,
//! so equidistant points resolve to the earlier training example.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::features::SupervisedSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 15 }
    }
}

const LEAF_SIZE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "KnnData", into = "KnnData")]
pub struct NearestNeighbors {
    k: usize,
    data: KnnData,
    tree: KdTree,
}

/// Persisted form; the tree is rebuilt on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct KnnData {
    k: usize,
    dim: usize,
    points: Vec<f64>,
    targets: Vec<u8>,
}

impl From<KnnData> for NearestNeighbors {
    fn from(data: KnnData) -> Self {
        let tree = KdTree::build(&data.points, data.dim);
        Self {
            k: data.k.min(data.targets.len()).max(1),
            data,
            tree,
        }
    }
}

impl From<NearestNeighbors> for KnnData {
    fn from(model: NearestNeighbors) -> Self {
        model.data
    }
}

impl NearestNeighbors {
    pub fn fit(data: &SupervisedSet, params: &KnnParams) -> Self {
        KnnData {
            k: params.k,
            dim: data.dim(),
            points: data.raw_inputs().to_vec(),
            targets: data.targets().to_vec(),
        }
        .into()
    }

    /// Training indices of the `k` nearest neighbours, nearest first.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let mut heap = BinaryHeap::with_capacity(self.k + 1);
        self.tree
            .search(&self.data.points, self.data.dim, x, self.k, 0, &mut heap);
        let mut found: Vec<Candidate> = heap.into_vec();
        found.sort();
        found.into_iter().map(|c| c.index).collect()
    }

    /// Fraction of positive labels among the `k` nearest neighbours.
    pub fn score(&self, x: &[f64]) -> f64 {
        let neighbors = self.neighbors(x);
        let pos = neighbors
            .iter()
            .filter(|&&i| self.data.targets[i] == 1)
            .count();
        pos as f64 / neighbors.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum KdNode {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
struct KdTree {
    /// Point indices, grouped by leaf.
    indices: Vec<usize>,
    nodes: Vec<KdNode>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KdTree {
    fn build(points: &[f64], dim: usize) -> Self {
        let n = if dim == 0 { 0 } else { points.len() / dim };
        let mut tree = Self {
            indices: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build_node(points, dim, 0, n);
        }
        tree
    }

    fn build_node(&mut self, points: &[f64], dim: usize, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode::Leaf { start, end });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let coord = |i: usize, a: usize| points[i * dim + a];
        // Split on the axis of widest spread at the median.
        let axis = (0..dim)
            .map(|a| {
                let (lo, hi) = self.indices[start..end]
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(coord(i, a)), hi.max(coord(i, a)))
                    });
                (a, hi - lo)
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        let mid = start + (end - start) / 2;
        self.indices[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coord(a, axis).total_cmp(&coord(b, axis)).then(a.cmp(&b))
        });
        let value = coord(self.indices[mid], axis);
        let left = self.build_node(points, dim, start, mid);
        let right = self.build_node(points, dim, mid, end);
        self.nodes[id] = KdNode::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Left subtree holds coordinates `<= value`, right holds `>= value`.
    fn search(
        &self,
        points: &[f64],
        dim: usize,
        x: &[f64],
        k: usize,
        node: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        match self.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &index in &self.indices[start..end] {
                    let cand = Candidate {
                        dist: squared_distance(&points[index * dim..(index + 1) * dim], x),
                        index,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if heap.peek().is_some_and(|worst| cand < *worst) {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = x[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(points, dim, x, k, near, heap);
                let bound = diff * diff;
                if heap.len() < k || heap.peek().is_some_and(|worst| bound <= worst.dist) {
                    self.search(points, dim, x, k, far, heap);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(points: &[Vec<f64>], x: &[f64], k: usize) -> Vec<usize> {
        let mut order: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (squared_distance(p, x), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order.into_iter().take(k).map(|(_, i)| i).collect()
    }

    #[test]
    fn three_positive_neighbours() {
        let rows = vec![
            vec![1.0, 1.0],
            vec![1.01, 1.0],
            vec![1.0, 1.01],
            vec![0.9, 0.9],
            vec![0.91, 0.9],
            vec![0.9, 0.91],
        ];
        let data = SupervisedSet::from_rows(1, &rows, vec![1, 1, 1, 0, 0, 0]).unwrap();
        let model = NearestNeighbors::fit(&data, &KnnParams { k: 3 });
        assert_eq!(model.score(&[1.0, 1.0]), 1.0);
        assert_eq!(model.score(&[0.9, 0.9]), 0.0);
    }

    #[test]
    fn matches_brute_force_with_ties() {
        // Many duplicated points on a coarse lattice force distance ties.
        let rows: Vec<Vec<f64>> = (0..500)
            .map(|i| vec![((i * 7) % 11) as f64, ((i * 3) % 5) as f64])
            .collect();
        let targets = (0..500).map(|i| (i % 3 == 0) as u8).collect();
        let data = SupervisedSet::from_rows(1, &rows, targets).unwrap();
        for k in [1, 4, 15, 60] {
            let model = NearestNeighbors::fit(&data, &KnnParams { k });
            for q in [[0.0, 0.0], [5.5, 2.0], [3.0, 4.5], [10.0, 1.0], [-3.0, 9.0]] {
                assert_eq!(model.neighbors(&q), brute_force(&rows, &q, k), "k={k} q={q:?}");
            }
        }
    }

    #[test]
    fn k_larger_than_training_set() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
        let data = SupervisedSet::from_rows(1, &rows, vec![1, 0, 0]).unwrap();
        let model = NearestNeighbors::fit(&data, &KnnParams { k: 10 });
        assert!((model.score(&[7.0]) - 1.0 / 3.0).abs() < 1e-15);
    }
}
