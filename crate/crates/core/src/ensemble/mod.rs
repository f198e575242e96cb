//! Supervised learners over state features: CART trees, bagged committees,
//! and the hull-augmented committee that also sees `alpha(C, p)`.

mod bagging;
mod bcha;
mod tree;

pub use bagging::{predict_committee, train_bagging, BaggedCommittee};
pub use bcha::{predict_bcha, train_bcha, BchaModel};
pub use tree::{train_tree, train_tree_on, DecisionTree, Node};

use crate::cha::{self, ConvexHull};
use crate::error::{Error, Result};
use crate::sampling::{Label, LabeledDataset, Record};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;

pub const DEFAULT_COMMITTEE_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitCriterion {
    Gini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub split_criterion: SplitCriterion,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 24,
            min_leaf: 5,
            split_criterion: SplitCriterion::Gini,
        }
    }
}

impl TreeParams {
    /// No depth limit and single-sample leaves: the unpruned CART tree.
    pub fn fully_grown() -> Self {
        TreeParams {
            max_depth: usize::MAX,
            min_leaf: 1,
            split_criterion: SplitCriterion::Gini,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_leaf == 0 {
            return Err(Error::InvariantViolation(
                "max_depth and min_leaf must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Dense row-major design matrix with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dim: usize,
    values: Vec<f64>,
    labels: Vec<Label>,
}

impl FeatureMatrix {
    pub fn new(dim: usize, values: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if dim == 0 || values.len() != dim * labels.len() {
            return Err(Error::LengthMismatch {
                expected: dim * labels.len(),
                got: values.len(),
            });
        }
        Ok(FeatureMatrix {
            dim,
            values,
            labels,
        })
    }

    /// Rows are the coordinates, followed by alpha when `with_alpha`.
    pub fn from_dataset(ds: &LabeledDataset, with_alpha: bool) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dim = ds.dims.feature_dim() + with_alpha as usize;
        let mut values = Vec::with_capacity(dim * ds.len());
        let mut labels = Vec::with_capacity(ds.len());
        for (i, r) in ds.records.iter().enumerate() {
            values.extend_from_slice(&record_input(r, dim, i)?);
            labels.push(r.label.ok_or(Error::MissingLabel(i))?);
        }
        Ok(FeatureMatrix {
            dim,
            values,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, row: usize, f: usize) -> f64 {
        self.values[row * self.dim + f]
    }

    pub fn label(&self, row: usize) -> Label {
        self.labels[row]
    }
}

/// The input vector a model of width `input_dim` sees for `rec`: the
/// coordinates, with alpha appended when the model is one wider.
pub fn record_input(rec: &Record, input_dim: usize, index: usize) -> Result<Cow<'_, [f64]>> {
    let n = rec.coords.len();
    if input_dim == n {
        Ok(Cow::Borrowed(&rec.coords))
    } else if input_dim == n + 1 {
        let a = rec.alpha.ok_or(Error::MissingAlpha(index))?;
        let mut v = Vec::with_capacity(n + 1);
        v.extend_from_slice(&rec.coords);
        v.push(a);
        Ok(Cow::Owned(v))
    } else {
        Err(Error::DimensionMismatch(format!(
            "model expects {input_dim} inputs, record has {n} coordinates"
        )))
    }
}

/// Anything that can label a dataset record.
pub trait Classifier: Sync {
    fn classify(&self, rec: &Record) -> Result<Label>;
}

impl Classifier for DecisionTree {
    fn classify(&self, rec: &Record) -> Result<Label> {
        self.predict(&record_input(rec, self.input_dim, 0)?)
    }
}

impl Classifier for BaggedCommittee {
    fn classify(&self, rec: &Record) -> Result<Label> {
        predict_committee(self, &record_input(rec, self.input_dim, 0)?)
    }
}

/// Plain hull rule: separable iff `alpha >= 1`. Uses the record's stored
/// alpha when present, otherwise solves the LP.
#[derive(Debug, Clone)]
pub struct ChaClassifier<'a> {
    pub hull: &'a ConvexHull,
}

impl Classifier for ChaClassifier<'_> {
    fn classify(&self, rec: &Record) -> Result<Label> {
        let a = match rec.alpha {
            Some(a) => a,
            None => cha::alpha_coords(self.hull, &rec.coords)?.alpha,
        };
        Ok(Label::from_alpha(a))
    }
}

/// Adapts a closure into a [`Classifier`].
pub struct FnClassifier<F>(pub F);

impl<F: Fn(&Record) -> Label + Sync> Classifier for FnClassifier<F> {
    fn classify(&self, rec: &Record) -> Result<Label> {
        Ok((self.0)(rec))
    }
}

/// Empirical 0-1 loss: the fraction of records with `label != h(record)`.
pub fn evaluate<C: Classifier + ?Sized>(h: &C, ds: &LabeledDataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let wrong = ds
        .records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let y = r.label.ok_or(Error::MissingLabel(i))?;
            Ok((h.classify(r)? != y) as usize)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(wrong as f64 / ds.len() as f64)
}

#[cfg(test)]
mod tests;
