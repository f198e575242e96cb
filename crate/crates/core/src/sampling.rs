//! Seeded random states: Haar unitaries, Dirichlet spectra, random density
//! matrices under the Haar x Dirichlet measure, and random product states.

use crate::cha::{self, ConvexHull};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::qstate::{self, DensityMatrix, Dims, FeatureVector, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The generator used everywhere in this crate.
pub type QRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> QRng {
    QRng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> QRng {
    let mut rng = QRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub const DEFAULT_DIRICHLET_EXPONENT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub dims: Dims,
    /// Exponent `lambda` of the spectral density `prod_i d_i^(-lambda)`; the
    /// spectrum is Dirichlet with concentration `1 - lambda`.
    pub dirichlet_exponent: f64,
    pub seed: u64,
    /// Keep only PPT draws (rejection sampling).
    #[serde(default)]
    pub ppt_only: bool,
}

impl SamplerConfig {
    pub fn new(dims: Dims, seed: u64) -> Self {
        SamplerConfig {
            dims,
            dirichlet_exponent: DEFAULT_DIRICHLET_EXPONENT,
            seed,
            ppt_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.dirichlet_exponent)
    }

    pub fn rng(&self) -> QRng {
        rng_from_seed(self.seed)
    }
}

fn check_exponent(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "dirichlet exponent",
            value: lambda,
        })
    }
}

/// Class label: `-1` separable, `+1` entangled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Label {
    Separable,
    Entangled,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Separable => -1,
            Label::Entangled => 1,
        }
    }

    /// The hull decision rule: `alpha >= 1` certifies separability.
    pub fn from_alpha(alpha: f64) -> Self {
        if alpha >= 1.0 {
            Label::Separable
        } else {
            Label::Entangled
        }
    }

    pub fn from_ppt(ppt: bool) -> Self {
        if ppt {
            Label::Separable
        } else {
            Label::Entangled
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Label::Separable),
            1 => Ok(Label::Entangled),
            _ => Err(Error::Format {
                format: "label",
                reason: format!("label must be -1 or +1, got {v}"),
            }),
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.as_i8()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    Ppt,
    HullOracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub coords: Vec<f64>,
    pub alpha: Option<f64>,
    pub label: Option<Label>,
}

impl Record {
    pub fn unlabeled(x: FeatureVector) -> Self {
        Record {
            coords: x.into_coords(),
            alpha: None,
            label: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub dims: Dims,
    pub records: Vec<Record>,
    pub label_source: Option<LabelSource>,
}

impl LabeledDataset {
    pub fn empty(dims: Dims) -> Self {
        LabeledDataset {
            dims,
            records: Vec::new(),
            label_source: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_alpha(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.alpha.is_some())
    }

    pub fn has_labels(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.label.is_some())
    }

    /// Fraction of records labeled separable (records without labels ignored).
    pub fn separable_fraction(&self) -> f64 {
        let labeled: Vec<Label> = self.records.iter().filter_map(|r| r.label).collect();
        if labeled.is_empty() {
            return 0.0;
        }
        labeled.iter().filter(|&&l| l == Label::Separable).count() as f64 / labeled.len() as f64
    }

    /// Checks record lengths and that the alpha/label fields are all-or-nothing.
    pub fn validate(&self) -> Result<()> {
        let fd = self.dims.feature_dim();
        for r in &self.records {
            if r.coords.len() != fd {
                return Err(Error::LengthMismatch {
                    expected: fd,
                    got: r.coords.len(),
                });
            }
        }
        if let Some(first) = self.records.first() {
            let (a, l) = (first.alpha.is_some(), first.label.is_some());
            if self
                .records
                .iter()
                .any(|r| r.alpha.is_some() != a || r.label.is_some() != l)
            {
                return Err(Error::InvariantViolation(
                    "alpha and label fields must be present on all records or none".into(),
                ));
            }
        }
        Ok(())
    }

    /// Splits after the first `round(frac * len)` records of a seeded shuffle.
    pub fn split<R: Rng + ?Sized>(
        &self,
        frac: f64,
        rng: &mut R,
    ) -> (LabeledDataset, LabeledDataset) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let cut = ((frac * self.len() as f64).round() as usize).min(self.len());
        let take = |idx: &[usize]| LabeledDataset {
            dims: self.dims,
            records: idx.iter().map(|&i| self.records[i].clone()).collect(),
            label_source: self.label_source,
        };
        (take(&order[..cut]), take(&order[cut..]))
    }

    pub fn head(&self, count: usize) -> LabeledDataset {
        LabeledDataset {
            dims: self.dims,
            records: self.records.iter().take(count).cloned().collect(),
            label_source: self.label_source,
        }
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| complex_normal(rng))
}

/// Uniform point on the unit sphere of `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = complex_gaussian_vector(n, rng);
        let norm = v.norm();
        if norm > 1e-300 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            linalg::ONE
        };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Dirichlet draw with density `prod_i d_i^(-lambda)`, i.e. concentration `1 - lambda`.
pub fn dirichlet_spectrum<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_exponent(lambda)?;
    let gamma = Gamma::new(1.0 - lambda, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    loop {
        let g: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 {
            return Ok(g.into_iter().map(|x| x / total).collect());
        }
    }
}

/// `U diag(d) U^dagger` with `U` Haar and `d` Dirichlet.
pub fn random_density<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<DensityMatrix> {
    let n = cfg.dims.n();
    let spectrum = dirichlet_spectrum(n, cfg.dirichlet_exponent, rng)?;
    let u = haar_unitary(n, rng);
    let scaled = CMatrix::from_fn(n, n, |r, c| u[(r, c)] * spectrum[c]);
    let m = scaled * u.adjoint();
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(DensityMatrix::from_trusted(cfg.dims, m))
}

/// A pure product state `|a>|b>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub dims: Dims,
    pub a: CVector,
    pub b: CVector,
}

impl ProductState {
    pub fn vector(&self) -> CVector {
        self.a.kronecker(&self.b)
    }

    pub fn state_vector(&self) -> StateVector {
        StateVector::new(self.dims, self.vector())
            .expect("product of unit vectors is a unit vector")
    }

    pub fn density(&self) -> DensityMatrix {
        self.state_vector().to_density()
    }

    pub fn feature(&self) -> FeatureVector {
        qstate::featurize_pure(self.dims, &self.vector())
    }
}

pub fn random_pure_product<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> ProductState {
    let a = random_unit_vector(dims.d_a(), rng);
    let b = random_unit_vector(dims.d_b(), rng);
    ProductState { dims, a, b }
}

/// Rejection-samples `count` PPT states; also returns the number of draws.
pub fn sample_ppt_states_counted<R: Rng + ?Sized>(
    cfg: &SamplerConfig,
    count: usize,
    rng: &mut R,
) -> Result<(Vec<DensityMatrix>, usize)> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        let rho = random_density(cfg, rng)?;
        draws += 1;
        if qstate::is_ppt(&rho) {
            out.push(rho);
        }
    }
    Ok((out, draws))
}

pub fn sample_ppt_states<R: Rng + ?Sized>(
    cfg: &SamplerConfig,
    count: usize,
    rng: &mut R,
) -> Result<Vec<DensityMatrix>> {
    sample_ppt_states_counted(cfg, count, rng).map(|(s, _)| s)
}

#[derive(Debug, Clone, Copy)]
pub enum Labeler<'a> {
    Ppt,
    HullOracle(&'a ConvexHull),
}

/// Samples `count` states (PPT-restricted if `cfg.ppt_only`) and labels them.
/// The alpha field is left empty.
pub fn build_dataset<R: Rng + ?Sized>(
    cfg: &SamplerConfig,
    count: usize,
    labeler: Labeler<'_>,
    rng: &mut R,
) -> Result<LabeledDataset> {
    cfg.validate()?;
    let dims = cfg.dims;
    if let Labeler::Ppt = labeler {
        if dims.n() > 6 {
            return Err(Error::CriterionInsufficient(dims.n()));
        }
    }
    if let Labeler::HullOracle(h) = labeler {
        if h.dims() != dims {
            return Err(Error::DimensionMismatch(format!(
                "oracle hull is {}, dataset is {}",
                h.dims(),
                dims
            )));
        }
    }
    let states = if cfg.ppt_only {
        sample_ppt_states(cfg, count, rng)?
    } else {
        (0..count)
            .map(|_| random_density(cfg, rng))
            .collect::<Result<Vec<_>>>()?
    };
    let (records, source) = match labeler {
        Labeler::Ppt => (
            states
                .iter()
                .map(|rho| Record {
                    coords: qstate::featurize(rho).into_coords(),
                    alpha: None,
                    label: Some(Label::from_ppt(qstate::is_ppt(rho))),
                })
                .collect(),
            LabelSource::Ppt,
        ),
        Labeler::HullOracle(hull) => {
            let feats: Vec<FeatureVector> = states.iter().map(qstate::featurize).collect();
            let records = feats
                .into_par_iter()
                .map(|x| {
                    let a = cha::alpha(hull, &x)?;
                    Ok(Record {
                        coords: x.into_coords(),
                        alpha: None,
                        label: Some(Label::from_alpha(a.alpha)),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (records, LabelSource::HullOracle)
        }
    };
    Ok(LabeledDataset {
        dims,
        records,
        label_source: Some(source),
    })
}
