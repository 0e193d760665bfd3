//! Binary decision tree with axis-aligned splits chosen by Gini impurity.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::SupervisedSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_leaf: 5,
        }
    }
}

impl CartParams {
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.min_leaf == 0 {
            return Err("min_leaf must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        positives: u32,
        total: u32,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn fit(data: &SupervisedSet, params: &CartParams) -> Self {
        let rows: Vec<usize> = (0..data.len()).collect();
        Self::fit_rows(data, params, &rows, None)
    }

    /// Fits on `rows` (repeats allowed). With `features = Some((rng, m))` and
    /// `m < dim`, each node considers a random subset of `m` features.
    pub(crate) fn fit_rows(
        data: &SupervisedSet,
        params: &CartParams,
        rows: &[usize],
        features: Option<(&mut ChaCha8Rng, usize)>,
    ) -> Self {
        let mut builder = Builder::new(data, params, rows, features);
        let n = rows.len();
        builder.grow(0, n, 0);
        Self {
            nodes: builder.nodes,
        }
    }

    /// `(positives, total)` of the leaf reached by `x`.
    pub fn leaf(&self, x: &[f64]) -> (u32, u32) {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { positives, total } => return (positives, total),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature] <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    /// Positive proportion of the reached leaf.
    pub fn score(&self, x: &[f64]) -> f64 {
        let (pos, total) = self.leaf(x);
        if total == 0 {
            0.0
        } else {
            pos as f64 / total as f64
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Builder<'a> {
    data: &'a SupervisedSet,
    params: &'a CartParams,
    rows: &'a [usize],
    rng: Option<(&'a mut ChaCha8Rng, usize)>,
    /// For each feature, sample positions sorted by value; every node owns
    /// the same contiguous range in all of them.
    order: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    cost: f64,
}

impl<'a> Builder<'a> {
    fn new(
        data: &'a SupervisedSet,
        params: &'a CartParams,
        rows: &'a [usize],
        rng: Option<(&'a mut ChaCha8Rng, usize)>,
    ) -> Self {
        let dim = data.dim();
        let order = (0..dim)
            .map(|f| {
                let mut pos: Vec<u32> = (0..rows.len() as u32).collect();
                pos.sort_by(|&a, &b| {
                    let va = data.input(rows[a as usize])[f];
                    let vb = data.input(rows[b as usize])[f];
                    va.total_cmp(&vb).then(a.cmp(&b))
                });
                pos
            })
            .collect();
        Self {
            data,
            params,
            rows,
            rng,
            order,
            goes_left: vec![false; rows.len()],
            scratch: Vec::with_capacity(rows.len()),
            nodes: Vec::new(),
        }
    }

    fn value(&self, pos: u32, feature: usize) -> f64 {
        self.data.input(self.rows[pos as usize])[feature]
    }

    fn target(&self, pos: u32) -> bool {
        self.data.targets()[self.rows[pos as usize]] == 1
    }

    fn grow(&mut self, lo: usize, hi: usize, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let total = hi - lo;
        let positives = self.order[0][lo..hi]
            .iter()
            .filter(|&&p| self.target(p))
            .count();
        self.nodes.push(Node::Leaf {
            positives: positives as u32,
            total: total as u32,
        });
        if depth >= self.params.max_depth
            || total < 2 * self.params.min_leaf
            || positives == 0
            || positives == total
        {
            return id;
        }
        let Some(best) = self.best_split(lo, hi, positives) else {
            return id;
        };
        for &p in &self.order[best.feature][lo..hi] {
            self.goes_left[p as usize] = self.value(p, best.feature) <= best.threshold;
        }
        let mut n_left = 0;
        for f in 0..self.order.len() {
            self.scratch.clear();
            let seg = &mut self.order[f][lo..hi];
            let mut w = 0;
            for i in 0..seg.len() {
                let p = seg[i];
                if self.goes_left[p as usize] {
                    seg[w] = p;
                    w += 1;
                } else {
                    self.scratch.push(p);
                }
            }
            seg[w..].copy_from_slice(&self.scratch);
            n_left = w;
        }
        let left = self.grow(lo, lo + n_left, depth + 1);
        let right = self.grow(lo + n_left, hi, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let dim = self.order.len();
        match self.rng.as_mut() {
            Some((rng, m)) if *m < dim => {
                let mut picked = index::sample(*rng, dim, *m).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..dim).collect(),
        }
    }

    /// Lowest weighted Gini `n_l * gini_l + n_r * gini_r`, strictly below the parent's.
    fn best_split(&mut self, lo: usize, hi: usize, positives: usize) -> Option<BestSplit> {
        let n = (hi - lo) as f64;
        let pos = positives as f64;
        let parent = n - (pos * pos + (n - pos) * (n - pos)) / n;
        let min_leaf = self.params.min_leaf;
        let mut best: Option<BestSplit> = None;
        for f in self.candidate_features() {
            let seg = &self.order[f][lo..hi];
            let mut left_pos = 0usize;
            for i in 0..seg.len() - 1 {
                if self.target(seg[i]) {
                    left_pos += 1;
                }
                let n_left = i + 1;
                let n_right = seg.len() - n_left;
                if n_left < min_leaf {
                    continue;
                }
                if n_right < min_leaf {
                    break;
                }
                let a = self.value(seg[i], f);
                let b = self.value(seg[i + 1], f);
                if a == b {
                    continue;
                }
                let (nl, nr) = (n_left as f64, n_right as f64);
                let pl = left_pos as f64;
                let pr = pos - pl;
                let cost = nl - (pl * pl + (nl - pl) * (nl - pl)) / nl + nr
                    - (pr * pr + (nr - pr) * (nr - pr)) / nr;
                if cost < parent - 1e-12 * n && best.as_ref().is_none_or(|b| cost < b.cost) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid >= b { a } else { mid };
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        cost,
                    });
                }
            }
        }
        best
    }
}
