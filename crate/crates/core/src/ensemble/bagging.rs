use super::{train_tree_on, DecisionTree, FeatureMatrix, TreeParams};
use crate::error::{Error, Result};
use crate::sampling::{self, Label};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `L` trees voting by majority.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedCommittee {
    pub trees: Vec<DecisionTree>,
    pub input_dim: usize,
    /// Outcome of an exactly split vote.
    pub tie_break: Label,
}

impl BaggedCommittee {
    pub fn size(&self) -> usize {
        self.trees.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvariantViolation("committee has no trees".into()));
        }
        for t in &self.trees {
            if t.input_dim != self.input_dim {
                return Err(Error::InvariantViolation(format!(
                    "tree input_dim {} differs from committee input_dim {}",
                    t.input_dim, self.input_dim
                )));
            }
            t.validate()?;
        }
        Ok(())
    }
}

/// Each tree sees a with-replacement resample of the full data size. Tree
/// `t` draws from stream `t` of a generator seeded from `rng`, so the result
/// does not depend on the thread count.
pub fn train_bagging<R: Rng + ?Sized>(
    data: &FeatureMatrix,
    committee_size: usize,
    params: &TreeParams,
    rng: &mut R,
) -> Result<BaggedCommittee> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if committee_size == 0 {
        return Err(Error::OutOfRange {
            name: "committee size L",
            value: 0.0,
        });
    }
    params.validate()?;
    let base: u64 = rng.random();
    let n = data.len();
    let trees = (0..committee_size)
        .into_par_iter()
        .map(|t| {
            let mut trng = sampling::stream_rng(base, t as u64);
            let sample: Vec<usize> = (0..n).map(|_| trng.random_range(0..n)).collect();
            train_tree_on(data, &sample, params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggedCommittee {
        trees,
        input_dim: data.dim(),
        tie_break: Label::Entangled,
    })
}

pub fn predict_committee(committee: &BaggedCommittee, x: &[f64]) -> Result<Label> {
    let mut votes: i64 = 0;
    for t in &committee.trees {
        votes += t.predict(x)?.as_i8() as i64;
    }
    Ok(match votes.cmp(&0) {
        std::cmp::Ordering::Greater => Label::Entangled,
        std::cmp::Ordering::Less => Label::Separable,
        std::cmp::Ordering::Equal => committee.tie_break,
    })
}
