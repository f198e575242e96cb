use super::{record_input, train_bagging, BaggedCommittee, Classifier, FeatureMatrix, TreeParams};
use crate::cha::{self, ConvexHull};
use crate::error::{Error, Result};
use crate::qstate::{self, DensityMatrix};
use crate::sampling::{Label, LabeledDataset, Record};
use rand::Rng;

/// A committee over `(p, alpha(C, p))` together with the hull `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct BchaModel {
    pub committee: BaggedCommittee,
    pub hull: ConvexHull,
}

impl BchaModel {
    pub fn new(committee: BaggedCommittee, hull: ConvexHull) -> Result<Self> {
        let want = hull.dims().feature_dim() + 1;
        if committee.input_dim != want {
            return Err(Error::DimensionMismatch(format!(
                "committee input_dim {} but hull needs {want}",
                committee.input_dim
            )));
        }
        Ok(BchaModel { committee, hull })
    }
}

/// Trains on `ds`, computing alpha against `hull` for records that lack it.
pub fn train_bcha<R: Rng + ?Sized>(
    hull: &ConvexHull,
    ds: &LabeledDataset,
    committee_size: usize,
    params: &TreeParams,
    rng: &mut R,
) -> Result<BchaModel> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let extended;
    let ds = if ds.records.iter().all(|r| r.alpha.is_some()) {
        ds
    } else {
        extended = cha::extend_dataset(hull, ds)?;
        &extended
    };
    let data = FeatureMatrix::from_dataset(ds, true)?;
    let committee = train_bagging(&data, committee_size, params, rng)?;
    BchaModel::new(committee, hull.clone())
}

pub fn predict_bcha(model: &BchaModel, rho: &DensityMatrix) -> Result<Label> {
    if rho.dims() != model.hull.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}, model hull is {}",
            rho.dims(),
            model.hull.dims()
        )));
    }
    let p = qstate::featurize(rho);
    let a = cha::alpha(&model.hull, &p)?.alpha;
    let mut x = p.into_coords();
    x.push(a);
    super::predict_committee(&model.committee, &x)
}

impl Classifier for BchaModel {
    fn classify(&self, rec: &Record) -> Result<Label> {
        let x = match rec.alpha {
            Some(_) => record_input(rec, self.committee.input_dim, 0)?.into_owned(),
            None => {
                let mut x = rec.coords.clone();
                x.push(cha::alpha_coords(&self.hull, &rec.coords)?.alpha);
                x
            }
        };
        super::predict_committee(&self.committee, &x)
    }
}
