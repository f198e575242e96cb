//! Seeded drivers for the benchmark tables. Each returns plain rows; the
//! command-line tool writes them out.
//!
//! Hulls of different sizes within one run are prefixes of a single sampled
//! hull, so `alpha` is monotone in `m` by construction.

use crate::cha::{self, build_hull, ConvexHull};
use crate::ensemble::{
    evaluate, train_bagging, train_tree, BaggedCommittee, FeatureMatrix, TreeParams,
    DEFAULT_COMMITTEE_SIZE,
};
use crate::error::{Error, Result};
use crate::kext::{self, BoundaryPoint};
use crate::qstate::{self, Dims};
use crate::sampling::{
    self, build_dataset, random_pure_product, Label, LabelSource, LabeledDataset, Labeler,
    SamplerConfig,
};
use serde::{Deserialize, Serialize};

/// Published `(m, alpha(C_m, p_tiles))` values for nested tiles-state hulls.
pub const TABLE1_REFERENCE: [(usize, f64); 6] = [
    (2000, 0.5264),
    (5000, 0.5868),
    (10000, 0.6387),
    (20000, 0.6759),
    (50000, 0.7150),
    (100000, 0.7459),
];

// Stream ids carved out of the run seed.
const STREAM_DATA: u64 = 0;
const STREAM_HULL: u64 = 1;
const STREAM_SPLIT: u64 = 2;
const STREAM_ORACLE: u64 = 3;
const STREAM_PRODUCTS: u64 = 4;
const STREAM_MODELS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub m: usize,
    pub alpha: f64,
}

/// `alpha(C_m, p_tiles)` for each `m`, all hulls prefixes of one draw.
pub fn table1(seed: u64, ms: &[usize]) -> Result<Vec<AlphaRow>> {
    let max_m = *ms.iter().max().ok_or(Error::EmptyDataset)?;
    let dims = Dims::two_qutrits();
    let hull = build_hull(dims, max_m, &mut sampling::stream_rng(seed, STREAM_HULL))?;
    let p = qstate::featurize(&qstate::tiles_state());
    ms.iter()
        .map(|&m| {
            let a = cha::alpha(&hull.truncated(m)?, &p)?;
            Ok(AlphaRow { m, alpha: a.alpha })
        })
        .collect()
}

/// Fraction of `count` states at the given exponent that pass the PPT test.
pub fn ppt_fraction(dims: Dims, count: usize, dirichlet_exponent: f64, seed: u64) -> Result<f64> {
    let mut cfg = SamplerConfig::new(dims, seed);
    cfg.dirichlet_exponent = dirichlet_exponent;
    cfg.validate()?;
    let mut rng = cfg.rng();
    let mut ppt = 0usize;
    for _ in 0..count {
        if qstate::is_ppt(&sampling::random_density(&cfg, &mut rng)?) {
            ppt += 1;
        }
    }
    Ok(ppt as f64 / count.max(1) as f64)
}

/// Sizes and learner settings for the CHA-versus-BCHA protocols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub seed: u64,
    /// States sampled before splitting.
    pub states: usize,
    /// Fraction of states used for training.
    pub split: f64,
    /// Cap on the training set actually used (`None` = all).
    pub train_limit: Option<usize>,
    /// Cap on the test set actually scored (`None` = all).
    pub test_limit: Option<usize>,
    pub ms: Vec<usize>,
    #[serde(rename = "L")]
    pub committee_size: usize,
    /// Base learner of every committee.
    pub tree: TreeParams,
    /// The stand-alone tree baseline.
    #[serde(default = "TreeParams::fully_grown")]
    pub single_tree: TreeParams,
    pub dirichlet_exponent: f64,
}

impl ProtocolConfig {
    /// Two-qubit defaults: 5·10^4 states split in half, `m = 1000..10000`.
    pub fn two_qubit(seed: u64) -> Self {
        ProtocolConfig {
            seed,
            states: 50_000,
            split: 0.5,
            train_limit: None,
            test_limit: None,
            ms: (1..=10).map(|i| i * 1000).collect(),
            committee_size: DEFAULT_COMMITTEE_SIZE,
            tree: TreeParams::default(),
            single_tree: TreeParams::fully_grown(),
            dirichlet_exponent: sampling::DEFAULT_DIRICHLET_EXPONENT,
        }
    }

    /// Two-qutrit PPT states scored against a larger oracle hull.
    pub fn two_qutrit_scaled(seed: u64) -> Self {
        ProtocolConfig {
            seed,
            states: 4000,
            split: 0.5,
            train_limit: None,
            test_limit: None,
            ms: vec![2500, 5000, 10000],
            committee_size: DEFAULT_COMMITTEE_SIZE,
            tree: TreeParams::default(),
            single_tree: TreeParams::fully_grown(),
            dirichlet_exponent: sampling::DEFAULT_DIRICHLET_EXPONENT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::OutOfRange {
                name: "split",
                value: self.split,
            });
        }
        if self.ms.is_empty() || self.ms.contains(&0) {
            return Err(Error::InvariantViolation(
                "hull sizes must be positive".into(),
            ));
        }
        self.tree.validate()?;
        self.single_tree.validate()
    }

    fn sampler(&self, dims: Dims, ppt_only: bool) -> SamplerConfig {
        let mut cfg = SamplerConfig::new(dims, self.seed);
        cfg.dirichlet_exponent = self.dirichlet_exponent;
        cfg.ppt_only = ppt_only;
        cfg
    }

    fn split(&self, ds: &LabeledDataset) -> (LabeledDataset, LabeledDataset) {
        let (train, test) = ds.split(
            self.split,
            &mut sampling::stream_rng(self.seed, STREAM_SPLIT),
        );
        let cap = |d: LabeledDataset, limit: Option<usize>| match limit {
            Some(n) => d.head(n),
            None => d,
        };
        (cap(train, self.train_limit), cap(test, self.test_limit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub m: usize,
    pub cha_error: f64,
    pub bcha_error: f64,
}

fn with_alpha(ds: &LabeledDataset, alphas: Vec<f64>) -> LabeledDataset {
    let mut out = ds.clone();
    for (r, a) in out.records.iter_mut().zip(alphas) {
        r.alpha = Some(a);
    }
    out
}

fn coords(ds: &LabeledDataset) -> Vec<Vec<f64>> {
    ds.records.iter().map(|r| r.coords.clone()).collect()
}

fn labels(ds: &LabeledDataset) -> Result<Vec<Label>> {
    ds.records
        .iter()
        .enumerate()
        .map(|(i, r)| r.label.ok_or(Error::MissingLabel(i)))
        .collect()
}

fn error_rate(pred: impl Iterator<Item = Label>, truth: &[Label]) -> f64 {
    let wrong = pred.zip(truth).filter(|(p, t)| p != *t).count();
    wrong as f64 / truth.len().max(1) as f64
}

/// CHA and BCHA test error for every prefix hull of `hull`.
pub fn cha_vs_bcha(
    cfg: &ProtocolConfig,
    hull: &ConvexHull,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<Vec<ErrorRow>> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (train_x, test_x) = (coords(train), coords(test));
    let test_y = labels(test)?;
    cfg.ms
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let sub = hull.truncated(m)?;
            let train_a = cha::alpha_batch(&sub, &train_x)?;
            let test_a = cha::alpha_batch(&sub, &test_x)?;
            let cha_error = error_rate(test_a.iter().map(|&a| Label::from_alpha(a)), &test_y);
            let data = FeatureMatrix::from_dataset(&with_alpha(train, train_a), true)?;
            let mut rng = sampling::stream_rng(cfg.seed, STREAM_MODELS + i as u64);
            let committee = train_bagging(&data, cfg.committee_size, &cfg.tree, &mut rng)?;
            let bcha_error = evaluate(&committee, &with_alpha(test, test_a))?;
            Ok(ErrorRow {
                m,
                cha_error,
                bcha_error,
            })
        })
        .collect()
}

/// Two-qubit PPT-labeled states, split, scored with hulls of each size.
pub fn table_s1(cfg: &ProtocolConfig) -> Result<Vec<ErrorRow>> {
    cfg.validate()?;
    let (train, test) = two_qubit_split(cfg)?;
    let max_m = *cfg.ms.iter().max().expect("validated");
    let hull = build_hull(
        Dims::two_qubits(),
        max_m,
        &mut sampling::stream_rng(cfg.seed, STREAM_HULL),
    )?;
    cha_vs_bcha(cfg, &hull, &train, &test)
}

fn two_qubit_split(cfg: &ProtocolConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    let sampler = cfg.sampler(Dims::two_qubits(), false);
    let ds = build_dataset(
        &sampler,
        cfg.states,
        Labeler::Ppt,
        &mut sampling::stream_rng(cfg.seed, STREAM_DATA),
    )?;
    Ok(cfg.split(&ds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub error: f64,
}

/// Learners on raw features only: a bagged committee and a single
/// (by default unpruned) tree.
pub fn table_s2_partial(cfg: &ProtocolConfig) -> Result<Vec<MethodRow>> {
    cfg.validate()?;
    let (train, test) = two_qubit_split(cfg)?;
    let data = FeatureMatrix::from_dataset(&train, false)?;
    let mut rng = sampling::stream_rng(cfg.seed, STREAM_MODELS);
    let committee: BaggedCommittee = train_bagging(&data, cfg.committee_size, &cfg.tree, &mut rng)?;
    let tree = train_tree(&data, &cfg.single_tree)?;
    Ok(vec![
        MethodRow {
            method: "bagging".into(),
            error: evaluate(&committee, &test)?,
        },
        MethodRow {
            method: "decision_tree".into(),
            error: evaluate(&tree, &test)?,
        },
    ])
}

/// Result of the two-qutrit protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub oracle_m: usize,
    /// Fraction of the sampled PPT states inside the oracle hull.
    pub separable_fraction: f64,
    pub rows: Vec<ErrorRow>,
}

/// Two-qutrit PPT states labeled by an `oracle_m`-point hull; the scored hulls
/// are prefixes of the oracle.
pub fn table_s3_scaled(cfg: &ProtocolConfig, oracle_m: usize) -> Result<OracleRun> {
    cfg.validate()?;
    let dims = Dims::two_qutrits();
    if cfg.ms.iter().any(|&m| m > oracle_m) {
        return Err(Error::InvariantViolation(
            "scored hulls must not exceed the oracle".into(),
        ));
    }
    let oracle = build_hull(
        dims,
        oracle_m,
        &mut sampling::stream_rng(cfg.seed, STREAM_ORACLE),
    )?;
    let sampler = cfg.sampler(dims, true);
    let ds = build_dataset(
        &sampler,
        cfg.states,
        Labeler::HullOracle(&oracle),
        &mut sampling::stream_rng(cfg.seed, STREAM_DATA),
    )?;
    debug_assert_eq!(ds.label_source, Some(LabelSource::HullOracle));
    let (train, test) = cfg.split(&ds);
    let rows = cha_vs_bcha(cfg, &oracle, &train, &test)?;
    Ok(OracleRun {
        oracle_m,
        separable_fraction: ds.separable_fraction(),
        rows,
    })
}

/// Boundary projections in the plane of the two figure observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFigure {
    pub num_angles: usize,
    pub ks: Vec<usize>,
    /// One curve per `k`, then the separable estimate (`k = 0`).
    pub points: Vec<BoundaryPoint>,
}

impl BoundaryFigure {
    pub fn curve(&self, k: usize) -> Vec<BoundaryPoint> {
        self.points.iter().copied().filter(|p| p.k == k).collect()
    }

    /// Smallest gap between the `k` support and the separable support.
    pub fn min_gap(&self, k: usize) -> f64 {
        self.curve(k)
            .iter()
            .zip(self.curve(0))
            .map(|(a, s)| a.support() - s.support())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn fig_s1(
    seed: u64,
    ks: &[usize],
    num_angles: usize,
    num_products: usize,
) -> Result<BoundaryFigure> {
    if num_products == 0 || num_angles == 0 {
        return Err(Error::EmptyDataset);
    }
    let dims = Dims::two_qubits();
    let (h1, h2) = kext::figure_observables();
    let mut points = Vec::new();
    for &k in ks {
        points.extend(kext::boundary_projection(dims, &h1, &h2, k, num_angles)?);
    }
    let mut rng = sampling::stream_rng(seed, STREAM_PRODUCTS);
    let products: Vec<_> = (0..num_products)
        .map(|_| random_pure_product(dims, &mut rng))
        .collect();
    points.extend(kext::separable_projection(&h1, &h2, &products, num_angles));
    Ok(BoundaryFigure {
        num_angles,
        ks: ks.to_vec(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_rows_are_monotone_and_seeded() {
        let a = table1(5, &[50, 200, 100]).unwrap();
        assert_eq!(
            a.iter().map(|r| r.m).collect::<Vec<_>>(),
            vec![50, 200, 100]
        );
        assert!(a[0].alpha <= a[2].alpha + 1e-9 && a[2].alpha <= a[1].alpha + 1e-9);
        assert_eq!(a, table1(5, &[50, 200, 100]).unwrap());
    }

    #[test]
    fn tiny_two_qubit_protocol_runs() {
        let mut cfg = ProtocolConfig::two_qubit(9);
        cfg.states = 400;
        cfg.ms = vec![50, 100];
        cfg.committee_size = 5;
        let rows = table_s1(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.cha_error) && (0.0..=1.0).contains(&r.bcha_error));
        }
        // A larger hull only moves CHA predictions towards "separable", and
        // every PPT two-qubit state is separable.
        assert!(rows[1].cha_error <= rows[0].cha_error + 1e-12);
        assert_eq!(rows, table_s1(&cfg).unwrap());
    }

    #[test]
    fn oracle_protocol_scores_the_oracle_itself_perfectly() {
        let mut cfg = ProtocolConfig::two_qutrit_scaled(3);
        cfg.states = 60;
        cfg.ms = vec![100, 300];
        cfg.committee_size = 3;
        let run = table_s3_scaled(&cfg, 300).unwrap();
        assert_eq!(run.rows[1].cha_error, 0.0);
        assert!(run.rows[0].cha_error >= run.rows[1].cha_error);
        assert!(table_s3_scaled(&cfg, 200).is_err());
    }

    #[test]
    fn figure_has_one_point_per_angle_and_curve() {
        let fig = fig_s1(1, &[1, 2], 8, 200).unwrap();
        assert_eq!(fig.points.len(), 3 * 8);
        assert!(fig.min_gap(2) > 0.0);
    }
}
