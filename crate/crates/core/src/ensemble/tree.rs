//! CART classification trees with Gini impurity.

use super::{FeatureMatrix, TreeParams};
use crate::error::{Error, Result};
use crate::sampling::Label;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Leaf {
        leaf: Label,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    fn max_feature(&self) -> Option<usize> {
        match self {
            Node::Leaf { .. } => None,
            Node::Split {
                feature,
                left,
                right,
                ..
            } => Some(
                (*feature)
                    .max(left.max_feature().unwrap_or(0))
                    .max(right.max_feature().unwrap_or(0)),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub input_dim: usize,
    pub root: Node,
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaves(&self) -> usize {
        self.root.leaves()
    }

    /// Every split must index a feature below `input_dim`.
    pub fn validate(&self) -> Result<()> {
        match self.root.max_feature() {
            Some(f) if f >= self.input_dim => Err(Error::InvariantViolation(format!(
                "tree splits on feature {f} but input_dim is {}",
                self.input_dim
            ))),
            _ => Ok(()),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "tree expects {} inputs, got {}",
                self.input_dim,
                x.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { leaf } => return Ok(*leaf),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

/// Trains on all rows of `data`.
pub fn train_tree(data: &FeatureMatrix, params: &TreeParams) -> Result<DecisionTree> {
    let rows: Vec<usize> = (0..data.len()).collect();
    train_tree_on(data, &rows, params)
}

/// Trains on the multiset of rows `sample` (duplicates allowed).
pub fn train_tree_on(
    data: &FeatureMatrix,
    sample: &[usize],
    params: &TreeParams,
) -> Result<DecisionTree> {
    params.validate()?;
    if sample.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = data.dim();
    let s = sample.len();
    let positive: Vec<bool> = sample
        .iter()
        .map(|&r| data.label(r) == Label::Entangled)
        .collect();
    // For each feature, sample positions sorted by value (stable, so ties
    // keep sample order).
    let mut sorted: Vec<Vec<u32>> = (0..dim)
        .map(|f| {
            let mut idx: Vec<u32> = (0..s as u32).collect();
            idx.sort_by(|&a, &b| {
                data.value(sample[a as usize], f)
                    .total_cmp(&data.value(sample[b as usize], f))
            });
            idx
        })
        .collect();
    let mut builder = Builder {
        data,
        sample,
        positive: &positive,
        params,
        goes_left: vec![false; s],
        scratch: vec![0; s],
    };
    let root = builder.build(&mut sorted, 0, s, 0);
    Ok(DecisionTree {
        input_dim: dim,
        root,
    })
}

struct Builder<'a> {
    data: &'a FeatureMatrix,
    sample: &'a [usize],
    positive: &'a [bool],
    params: &'a TreeParams,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    /// Weighted Gini numerator `n_L g_L + n_R g_R`.
    impurity: f64,
}

/// `n * gini` for a node with `pos` positives out of `n`.
fn weighted_gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let neg = n - pos;
    2.0 * pos as f64 * neg as f64 / n as f64
}

impl Builder<'_> {
    fn value(&self, pos: u32, f: usize) -> f64 {
        self.data.value(self.sample[pos as usize], f)
    }

    fn leaf(pos: usize, n: usize) -> Node {
        // Majority, ties to entangled.
        let leaf = if 2 * pos >= n {
            Label::Entangled
        } else {
            Label::Separable
        };
        Node::Leaf { leaf }
    }

    fn build(&mut self, sorted: &mut [Vec<u32>], lo: usize, hi: usize, depth: usize) -> Node {
        let n = hi - lo;
        let pos = sorted[0][lo..hi]
            .iter()
            .filter(|&&i| self.positive[i as usize])
            .count();
        let min_leaf = self.params.min_leaf;
        if depth >= self.params.max_depth || pos == 0 || pos == n || n < 2 * min_leaf {
            return Self::leaf(pos, n);
        }
        let parent = weighted_gini(pos, n);
        let Some(best) = self.best_split(sorted, lo, hi, pos) else {
            return Self::leaf(pos, n);
        };
        if best.impurity >= parent - 1e-12 {
            return Self::leaf(pos, n);
        }
        // Partition every feature's range stably into left | right.
        let mut n_left = 0;
        for &i in &sorted[best.feature][lo..hi] {
            let left = self.value(i, best.feature) <= best.threshold;
            self.goes_left[i as usize] = left;
            n_left += left as usize;
        }
        for column in sorted.iter_mut() {
            let range = &mut column[lo..hi];
            let (mut l, mut r) = (0, n_left);
            for &i in range.iter() {
                if self.goes_left[i as usize] {
                    self.scratch[l] = i;
                    l += 1;
                } else {
                    self.scratch[r] = i;
                    r += 1;
                }
            }
            range.copy_from_slice(&self.scratch[..n]);
        }
        let mid = lo + n_left;
        let left = self.build(sorted, lo, mid, depth + 1);
        let right = self.build(sorted, mid, hi, depth + 1);
        Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn best_split(
        &self,
        sorted: &[Vec<u32>],
        lo: usize,
        hi: usize,
        pos: usize,
    ) -> Option<BestSplit> {
        let n = hi - lo;
        let min_leaf = self.params.min_leaf;
        let mut best: Option<BestSplit> = None;
        for (f, order) in sorted.iter().enumerate() {
            let range = &order[lo..hi];
            let mut pos_left = 0;
            for k in 0..n - 1 {
                pos_left += self.positive[range[k] as usize] as usize;
                let n_left = k + 1;
                if n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let v = self.value(range[k], f);
                let v_next = self.value(range[k + 1], f);
                if v_next <= v {
                    continue;
                }
                let impurity =
                    weighted_gini(pos_left, n_left) + weighted_gini(pos - pos_left, n - n_left);
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mut threshold = 0.5 * (v + v_next);
                    if threshold >= v_next {
                        threshold = v;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }
}
