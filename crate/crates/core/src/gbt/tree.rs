use serde::{Deserialize, Serialize};

use super::split::{by_value_then_row, leaf_weight, scan_feature, totals, Split, SplitParams};
use super::TrainParams;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Flat tree node. Internal nodes route `x[feature] < threshold` to `left`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf_weight: f64,
    },
}

/// Regression tree stored as a node array rooted at index 0. Leaf weights are
/// unscaled; shrinkage is applied by the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Wraps and validates a node array.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Result<Self> {
        let tree = Tree { nodes };
        tree.validate(n_features)?;
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { leaf_weight } => return leaf_weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn leaf_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Leaf { leaf_weight } => Some(leaf_weight),
            Node::Split { .. } => None,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.leaf_weights().count()
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Internal nodes in array order.
    pub fn splits(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        })
    }

    /// Checks that the nodes form one proper binary tree rooted at 0 and that
    /// every split refers to an existing feature.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::InvalidTree("tree has no nodes".into()));
        }
        let mut has_parent = vec![false; n];
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { leaf_weight } => {
                    if !leaf_weight.is_finite() {
                        return Err(Error::InvalidTree(format!("node {i}: non-finite leaf weight")));
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(Error::InvalidTree(format!(
                            "node {i}: feature {feature} out of range for {n_features} features"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::InvalidTree(format!("node {i}: non-finite threshold")));
                    }
                    for child in [left, right] {
                        if child >= n {
                            return Err(Error::InvalidTree(format!(
                                "node {i}: dangling child index {child}"
                            )));
                        }
                        if child == 0 || has_parent[child] {
                            return Err(Error::InvalidTree(format!(
                                "node {child} has more than one parent"
                            )));
                        }
                        has_parent[child] = true;
                    }
                }
            }
        }
        // Single parents plus full reachability from the root rule out cycles.
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push(left);
                stack.push(right);
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidTree(format!("node {orphan} is unreachable from the root")));
        }
        Ok(())
    }
}

/// Exact greedy tree growth with per-feature row orders computed once and
/// reused for every tree fitted on the same matrix.
pub struct TreeBuilder<'a> {
    values: &'a Matrix,
    sorted: Vec<Vec<usize>>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(values: &'a Matrix) -> Self {
        let sorted = (0..values.cols())
            .map(|f| {
                let mut rows: Vec<usize> = (0..values.rows()).collect();
                rows.sort_by(by_value_then_row(values, f));
                rows
            })
            .collect();
        Self { values, sorted }
    }

    /// Fits one tree to per-row `grad`/`hess`, growing depth-first (left
    /// subtree before right) so node numbering is deterministic.
    pub fn build(&self, grad: &[f64], hess: &[f64], params: &TrainParams) -> Tree {
        assert_eq!(grad.len(), self.values.rows());
        assert_eq!(hess.len(), self.values.rows());
        let mut grower = Grower {
            values: self.values,
            grad,
            hess,
            max_depth: params.max_depth,
            split: params.split_params(),
            goes_left: vec![false; self.values.rows()],
            nodes: Vec::new(),
        };
        let rows: Vec<usize> = (0..self.values.rows()).collect();
        grower.grow(rows, self.sorted.clone(), 0);
        Tree {
            nodes: grower.nodes,
        }
    }
}

struct Grower<'a> {
    values: &'a Matrix,
    grad: &'a [f64],
    hess: &'a [f64],
    max_depth: usize,
    split: SplitParams,
    goes_left: Vec<bool>,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn find_split(&self, sorted: &[Vec<usize>], sums: (f64, f64)) -> Option<Split> {
        let mut best = None;
        for (feature, rows) in sorted.iter().enumerate() {
            scan_feature(
                feature,
                rows,
                self.values,
                self.grad,
                self.hess,
                sums,
                &self.split,
                &mut best,
            );
        }
        best
    }

    /// `rows` ascending; `sorted[f]` holds the same rows ordered by feature `f`.
    fn grow(&mut self, rows: Vec<usize>, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let index = self.nodes.len();
        self.nodes.push(Node::Leaf { leaf_weight: 0.0 });
        let sums = totals(&rows, self.grad, self.hess);

        let split = if depth < self.max_depth && rows.len() >= 2 {
            self.find_split(&sorted, sums)
        } else {
            None
        };
        let Some(split) = split else {
            self.nodes[index] = Node::Leaf {
                leaf_weight: leaf_weight(sums.0, sums.1, self.split.lambda),
            };
            return index;
        };

        for &r in &rows {
            self.goes_left[r] = self.values.get(r, split.feature) < split.threshold;
        }
        let mask = &self.goes_left;
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| mask[r]);
        let (left_sorted, right_sorted): (Vec<Vec<usize>>, Vec<Vec<usize>>) = sorted
            .into_iter()
            .map(|col| col.into_iter().partition::<Vec<usize>, _>(|&r| mask[r]))
            .unzip();

        let left = self.grow(left_rows, left_sorted, depth + 1);
        let right = self.grow(right_rows, right_sorted, depth + 1);
        self.nodes[index] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        index
    }
}

/// Fits a single tree on every row of `values`.
pub fn build_tree(grad: &[f64], hess: &[f64], values: &Matrix, params: &TrainParams) -> Result<Tree> {
    if grad.len() != values.rows() || hess.len() != values.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} gradient entries", values.rows()),
            found: format!("{} / {}", grad.len(), hess.len()),
        });
    }
    params.validate()?;
    Ok(TreeBuilder::new(values).build(grad, hess, params))
}
