//! Regression trees and exact-greedy, level-wise tree construction.

use super::params::HyperParams;
use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::parallel::Parallelism;

/// Closed-form minimiser of `G·w + ½(H+λ)w²`.
pub fn leaf_weight(grad_sum: f64, hess_sum: f64, lambda: f64) -> Result<f64> {
    let denom = hess_sum + lambda;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Domain(format!(
            "leaf weight needs H + lambda > 0, got {hess_sum} + {lambda}"
        )));
    }
    Ok(-grad_sum / denom)
}

/// Objective reduction of splitting a leaf into (left, right), minus `gamma`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> Result<f64> {
    if !(hl + lambda > 0.0 && hr + lambda > 0.0 && hl + hr + lambda > 0.0) {
        return Err(Error::Domain(format!(
            "split gain needs positive denominators, got HL={hl}, HR={hr}, lambda={lambda}"
        )));
    }
    Ok(raw_gain(gl, hl, gr, hr, lambda) - gamma)
}

#[inline]
fn raw_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> f64 {
    let g = gl + gr;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (hl + hr + lambda))
}

pub const LEAF: u32 = u32::MAX;

/// One entry of a flat tree. Leaves have `feature == LEAF`; rows with
/// `value < threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub feature: u32,
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    pub weight: f64,
    pub gain: f64,
}

impl Node {
    pub fn leaf(weight: f64) -> Self {
        Node {
            feature: LEAF,
            threshold: 0.0,
            left: LEAF,
            right: LEAF,
            weight,
            gain: 0.0,
        }
    }

    #[inline]
    pub fn is_leaf(&self) -> bool {
        self.feature == LEAF
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn single_leaf(weight: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::leaf(weight)],
        }
    }

    /// Index of the leaf a row lands in.
    #[inline]
    pub fn leaf_index(&self, row: &[f32]) -> usize {
        let mut i = 0usize;
        loop {
            let n = &self.nodes[i];
            if n.is_leaf() {
                return i;
            }
            i = if f64::from(row[n.feature as usize]) < n.threshold {
                n.left as usize
            } else {
                n.right as usize
            };
        }
    }

    #[inline]
    pub fn predict_row(&self, row: &[f32]) -> f64 {
        self.nodes[self.leaf_index(row)].weight
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            let n = &nodes[i];
            if n.is_leaf() {
                0
            } else {
                1 + walk(nodes, n.left as usize).max(walk(nodes, n.right as usize))
            }
        }
        walk(&self.nodes, 0)
    }

    /// Checks that the nodes form a proper binary tree rooted at 0 whose
    /// splits reference existing features and whose depth is bounded.
    pub fn validate(&self, n_features: usize, max_depth: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Consistency(m));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            if std::mem::replace(&mut visited[i], true) {
                return bad(format!("node {i} is reachable twice"));
            }
            let n = &self.nodes[i];
            if n.is_leaf() {
                if !n.weight.is_finite() {
                    return bad(format!("leaf {i} has non-finite weight"));
                }
                continue;
            }
            if n.feature as usize >= n_features {
                return bad(format!(
                    "node {i} splits on feature {} but the model has {n_features}",
                    n.feature
                ));
            }
            if !n.threshold.is_finite() {
                return bad(format!("node {i} has non-finite threshold"));
            }
            if depth + 1 > max_depth {
                return bad(format!("tree exceeds max depth {max_depth}"));
            }
            for child in [n.left, n.right] {
                if child as usize >= self.nodes.len() {
                    return bad(format!("node {i} points to missing child {child}"));
                }
                stack.push((child as usize, depth + 1));
            }
        }
        if let Some(orphan) = visited.iter().position(|v| !v) {
            return bad(format!("node {orphan} is unreachable"));
        }
        Ok(())
    }
}

/// For every feature, the training rows ordered by ascending value (ties by
/// row index). Computed once per training run and shared by every tree.
#[derive(Debug, Clone)]
pub struct SortedColumns {
    columns: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(features: &FeatureMatrix, rows: &[usize], par: Parallelism) -> Self {
        let mut base: Vec<u32> = rows.iter().map(|&r| r as u32).collect();
        base.sort_unstable();
        let columns = par.map(features.n_cols(), |f| {
            let mut col = base.clone();
            col.sort_by(|&a, &b| {
                features
                    .get(a as usize, f)
                    .total_cmp(&features.get(b as usize, f))
                    .then(a.cmp(&b))
            });
            col
        });
        SortedColumns { columns }
    }

    pub fn column(&self, feature: usize) -> &[u32] {
        &self.columns[feature]
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left_grad: f64,
    pub left_hess: f64,
}

impl SplitCandidate {
    /// Higher gain wins; equal gains go to the lower feature, then the lower
    /// threshold.
    fn beats(&self, other: &SplitCandidate) -> bool {
        self.gain > other.gain
            || (self.gain == other.gain
                && (self.feature, self.threshold) < (other.feature, other.threshold))
    }
}

fn pick(best: &mut Option<SplitCandidate>, cand: SplitCandidate) {
    if best.as_ref().is_none_or(|b| cand.beats(b)) {
        *best = Some(cand);
    }
}

const NOT_IN_FRONTIER: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct ScanState {
    grad: f64,
    hess: f64,
    last: f32,
    seen: bool,
}

/// Best split per frontier node along one feature. `slot[r]` is the frontier
/// slot holding row `r`, or `NOT_IN_FRONTIER`.
#[allow(clippy::too_many_arguments)]
fn scan_feature(
    features: &FeatureMatrix,
    feature: usize,
    column: &[u32],
    slot: &[u32],
    totals: &[(f64, f64)],
    g: &[f64],
    h: &[f64],
    params: &HyperParams,
) -> Vec<Option<SplitCandidate>> {
    let lambda = params.lambda;
    let mut state = vec![
        ScanState {
            grad: 0.0,
            hess: 0.0,
            last: 0.0,
            seen: false,
        };
        totals.len()
    ];
    let mut best: Vec<Option<SplitCandidate>> = vec![None; totals.len()];
    for &r in column {
        let r = r as usize;
        let s = slot[r];
        if s == NOT_IN_FRONTIER {
            continue;
        }
        let s = s as usize;
        let v = features.get(r, feature);
        let st = &mut state[s];
        if st.seen && v > st.last {
            let (gt, ht) = totals[s];
            let (gl, hl) = (st.grad, st.hess);
            let (gr, hr) = (gt - gl, ht - hl);
            if hl >= params.min_child_weight
                && hr >= params.min_child_weight
                && hl + lambda > 0.0
                && hr + lambda > 0.0
                && ht + lambda > 0.0
            {
                let cand = SplitCandidate {
                    feature,
                    threshold: midpoint(st.last, v),
                    gain: raw_gain(gl, hl, gr, hr, lambda) - params.gamma,
                    left_grad: gl,
                    left_hess: hl,
                };
                pick(&mut best[s], cand);
            }
        }
        st.grad += g[r];
        st.hess += h[r];
        st.last = v;
        st.seen = true;
    }
    best
}

/// Threshold strictly between two distinct `f32` values. Exact in `f64`.
#[inline]
pub fn midpoint(lo: f32, hi: f32) -> f64 {
    (f64::from(lo) + f64::from(hi)) * 0.5
}

/// Grows one tree by exact greedy search, one depth level at a time.
///
/// `g` and `h` are indexed by row of `features`; only rows in `rows` are
/// used. A node splits when its best candidate has gain above
/// `params.min_gain_eps`, both children carry hessian mass of at least
/// `params.min_child_weight`, and the node sits above `params.max_depth`.
pub fn build_tree(
    features: &FeatureMatrix,
    rows: &[usize],
    g: &[f64],
    h: &[f64],
    params: &HyperParams,
    sorted: &SortedColumns,
    par: Parallelism,
) -> RegressionTree {
    assert_eq!(g.len(), features.n_rows());
    assert_eq!(h.len(), features.n_rows());
    assert_eq!(sorted.n_features(), features.n_cols());

    let mut rows: Vec<usize> = rows.to_vec();
    rows.sort_unstable();

    let mut nodes = vec![Node::leaf(0.0)];
    // Tree node currently holding each row.
    let mut position = vec![NOT_IN_FRONTIER; features.n_rows()];
    for &r in &rows {
        position[r] = 0;
    }
    let mut frontier: Vec<u32> = vec![0];

    for depth in 0..=params.max_depth {
        if frontier.is_empty() {
            break;
        }
        // Gradient totals, summed in ascending row order.
        let mut slot_of_node = vec![NOT_IN_FRONTIER; nodes.len()];
        for (s, &n) in frontier.iter().enumerate() {
            slot_of_node[n as usize] = s as u32;
        }
        let mut totals = vec![(0.0f64, 0.0f64); frontier.len()];
        let mut slot = vec![NOT_IN_FRONTIER; features.n_rows()];
        for &r in &rows {
            let s = slot_of_node[position[r] as usize];
            if s != NOT_IN_FRONTIER {
                slot[r] = s;
                totals[s as usize].0 += g[r];
                totals[s as usize].1 += h[r];
            }
        }

        let best: Vec<Option<SplitCandidate>> = if depth < params.max_depth {
            let per_feature = par.map(features.n_cols(), |f| {
                scan_feature(features, f, sorted.column(f), &slot, &totals, g, h, params)
            });
            let mut best = vec![None; frontier.len()];
            for feature_best in per_feature {
                for (b, cand) in best.iter_mut().zip(feature_best) {
                    if let Some(c) = cand {
                        pick(b, c);
                    }
                }
            }
            best
        } else {
            vec![None; frontier.len()]
        };

        let mut next = Vec::new();
        for (s, &n) in frontier.iter().enumerate() {
            let (gt, ht) = totals[s];
            match best[s] {
                Some(c) if c.gain > params.min_gain_eps => {
                    let left = nodes.len() as u32;
                    nodes.push(Node::leaf(0.0));
                    nodes.push(Node::leaf(0.0));
                    nodes[n as usize] = Node {
                        feature: c.feature as u32,
                        threshold: c.threshold,
                        left,
                        right: left + 1,
                        weight: 0.0,
                        gain: c.gain,
                    };
                    next.push(left);
                    next.push(left + 1);
                }
                _ => {
                    nodes[n as usize].weight = leaf_weight(gt, ht, params.lambda).unwrap_or(0.0);
                }
            }
        }
        for &r in &rows {
            let node = &nodes[position[r] as usize];
            if !node.is_leaf() {
                position[r] = if f64::from(features.get(r, node.feature as usize)) < node.threshold
                {
                    node.left
                } else {
                    node.right
                };
            }
        }
        frontier = next;
    }
    debug_assert!(frontier.is_empty());
    RegressionTree { nodes }
}
