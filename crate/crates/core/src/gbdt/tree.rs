//! Regression trees on gradient statistics: Newton leaf weights, split gain
//! and exact greedy split search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Rows with `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Calls `f` with the feature index of every internal node.
    pub fn for_each_split(&self, f: &mut impl FnMut(usize)) {
        if let TreeNode::Internal {
            feature, left, right, ..
        } = self
        {
            f(*feature);
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }

    pub fn leaf_weights(&self) -> Vec<f64> {
        let mut out = Vec::new();
        fn walk(n: &TreeNode, out: &mut Vec<f64>) {
            match n {
                TreeNode::Leaf { weight } => out.push(*weight),
                TreeNode::Internal { left, right, .. } => {
                    walk(left, out);
                    walk(right, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Newton step `-G / (H + lambda)` for a leaf.
pub fn leaf_weight(g: f64, h: f64, lambda_l2: f64) -> Result<f64> {
    let denom = h + lambda_l2;
    if !(denom > 0.0) {
        return Err(Error::numeric(format!("leaf hessian sum {h} + lambda {lambda_l2} is not positive")));
    }
    Ok(-g / denom)
}

/// Reduction of the second-order objective from splitting a leaf.
pub fn split_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda_l2: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda_l2);
    0.5 * (score(g_left, h_left) + score(g_right, h_right)
        - score(g_left + g_right, h_left + h_right))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub g_left: f64,
    pub h_left: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    pub lambda_l2: f64,
    pub min_child_weight: f64,
}

/// Threshold strictly above `lo` and at most `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// True if `cand` should replace `best` under the (gain desc, feature asc,
/// threshold asc) order.
fn better(cand: &Split, best: &Option<Split>) -> bool {
    match best {
        None => true,
        Some(b) => {
            cand.gain > b.gain
                || (cand.gain == b.gain
                    && (cand.feature, cand.threshold).partial_cmp(&(b.feature, b.threshold))
                        == Some(std::cmp::Ordering::Less))
        }
    }
}

/// Running left-side statistics while scanning one feature of one node.
#[derive(Clone)]
struct Scan {
    g_total: f64,
    h_total: f64,
    g_left: f64,
    h_left: f64,
    last: Option<f64>,
    best: Option<Split>,
}

impl Scan {
    fn new(g_total: f64, h_total: f64) -> Self {
        Self {
            g_total,
            h_total,
            g_left: 0.0,
            h_left: 0.0,
            last: None,
            best: None,
        }
    }

    fn push(&mut self, feature: usize, value: f64, g: f64, h: f64, params: &SplitParams) {
        if let Some(prev) = self.last {
            if value > prev {
                let g_right = self.g_total - self.g_left;
                let h_right = self.h_total - self.h_left;
                if self.h_left >= params.min_child_weight && h_right >= params.min_child_weight {
                    let gain = split_gain(self.g_left, self.h_left, g_right, h_right, params.lambda_l2);
                    if gain > 0.0 && self.best.is_none_or(|b| gain > b.gain) {
                        self.best = Some(Split {
                            feature,
                            threshold: midpoint(prev, value),
                            gain,
                            g_left: self.g_left,
                            h_left: self.h_left,
                        });
                    }
                }
            }
        }
        self.g_left += g;
        self.h_left += h;
        self.last = Some(value);
    }
}

/// Exact greedy search over all midpoints between consecutive distinct
/// values of each listed feature, for the node holding `rows`.
///
/// Node totals are summed in ascending row order and the left side is
/// accumulated in (value, row) order, so the result does not depend on
/// the order of `rows`.
pub fn find_best_split(
    rows: &[usize],
    matrix: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    features: &[usize],
    params: &SplitParams,
) -> Option<Split> {
    let mut rows = rows.to_vec();
    rows.sort_unstable();
    let g_total: f64 = rows.iter().map(|&r| grad[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| hess[r]).sum();
    let mut features = features.to_vec();
    features.sort_unstable();
    let mut best = None;
    for &f in &features {
        let mut order = rows.clone();
        order.sort_by(|&a, &b| matrix.get(a, f).total_cmp(&matrix.get(b, f)).then(a.cmp(&b)));
        let mut scan = Scan::new(g_total, h_total);
        for &r in &order {
            scan.push(f, matrix.get(r, f), grad[r], hess[r], params);
        }
        if let Some(s) = scan.best {
            if better(&s, &best) {
                best = Some(s);
            }
        }
    }
    best
}

/// Row order of each column, sorted by (value, row index).
pub(crate) fn presort(matrix: &FeatureMatrix) -> Vec<Vec<u32>> {
    (0..matrix.n_cols())
        .into_par_iter()
        .map(|f| {
            let mut order: Vec<u32> = (0..matrix.n_rows() as u32).collect();
            order.sort_by(|&a, &b| {
                matrix
                    .get(a as usize, f)
                    .total_cmp(&matrix.get(b as usize, f))
                    .then(a.cmp(&b))
            });
            order
        })
        .collect()
}

struct BuildNode {
    g: f64,
    h: f64,
    split: Option<(Split, usize, usize)>,
}

const NO_NODE: u32 = u32::MAX;

/// Grows one tree depth-wise. `in_sample` marks the rows the tree is fit
/// on; `features` lists the columns it may split on.
#[allow(clippy::too_many_arguments)]
pub(crate) fn grow_tree(
    matrix: &FeatureMatrix,
    sorted: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    in_sample: &[bool],
    features: &[usize],
    max_depth: usize,
    params: &SplitParams,
) -> Result<TreeNode> {
    let n = matrix.n_rows();
    let mut node_of: Vec<u32> = in_sample.iter().map(|&s| if s { 0 } else { NO_NODE }).collect();
    let (mut g, mut h) = (0.0, 0.0);
    for r in (0..n).filter(|&r| in_sample[r]) {
        g += grad[r];
        h += hess[r];
    }
    let mut nodes = vec![BuildNode { g, h, split: None }];
    let mut frontier: Vec<usize> = vec![0];

    for _ in 0..max_depth {
        if frontier.is_empty() {
            break;
        }
        let mut slot_of = vec![usize::MAX; nodes.len()];
        for (slot, &node) in frontier.iter().enumerate() {
            slot_of[node] = slot;
        }
        let per_feature: Vec<Vec<Option<Split>>> = features
            .par_iter()
            .map(|&f| {
                let mut scans: Vec<Scan> = frontier.iter().map(|&id| Scan::new(nodes[id].g, nodes[id].h)).collect();
                for &r in &sorted[f] {
                    let r = r as usize;
                    let node = node_of[r];
                    if node == NO_NODE {
                        continue;
                    }
                    let slot = slot_of[node as usize];
                    if slot == usize::MAX {
                        continue;
                    }
                    scans[slot].push(f, matrix.get(r, f), grad[r], hess[r], params);
                }
                scans.into_iter().map(|s| s.best).collect()
            })
            .collect();

        let mut next = Vec::new();
        for (slot, &id) in frontier.iter().enumerate() {
            let mut best: Option<Split> = None;
            for cand in per_feature.iter().filter_map(|v| v[slot]) {
                if better(&cand, &best) {
                    best = Some(cand);
                }
            }
            if let Some(split) = best {
                let left = nodes.len();
                nodes.push(BuildNode { g: 0.0, h: 0.0, split: None });
                nodes.push(BuildNode { g: 0.0, h: 0.0, split: None });
                nodes[id].split = Some((split, left, left + 1));
                next.push(left);
                next.push(left + 1);
            }
        }
        // route rows and sum child statistics in row order
        for r in 0..n {
            let node = node_of[r];
            if node == NO_NODE {
                continue;
            }
            if let Some((split, left, right)) = nodes[node as usize].split {
                let child = if matrix.get(r, split.feature) < split.threshold { left } else { right };
                node_of[r] = child as u32;
                nodes[child].g += grad[r];
                nodes[child].h += hess[r];
            }
        }
        frontier = next;
    }

    fn build(nodes: &[BuildNode], id: usize, lambda: f64) -> Result<TreeNode> {
        match nodes[id].split {
            Some((split, left, right)) => Ok(TreeNode::Internal {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(build(nodes, left, lambda)?),
                right: Box::new(build(nodes, right, lambda)?),
            }),
            None => Ok(TreeNode::Leaf {
                weight: leaf_weight(nodes[id].g, nodes[id].h, lambda)?,
            }),
        }
    }
    build(&nodes, 0, params.lambda_l2)
}
