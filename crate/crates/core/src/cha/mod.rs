//! Inner convex-hull approximation of the separable set.
//!
//! A hull is a list of feature vectors of separable pure states plus
//! (by default) the origin, which is the maximally mixed state. For a state
//! with feature vector `p`, [`alpha`] finds the largest `a` such that `a p`
//! lies in the hull; `a >= 1` certifies that the state is inside.

mod critical;

pub use critical::{critical_point, CriticalPointConfig, CriticalPointResult, StopReason};

use crate::error::{Error, Result};
use crate::lp::{self, LpStatus, StandardForm};
use crate::qstate::{self, DensityMatrix, Dims, FeatureVector};
use crate::sampling::{self, Label, LabeledDataset, ProductState};
use rand::Rng;
use rayon::prelude::*;

/// Value reported for `alpha` on the (unbounded) ray `p = 0`.
pub const ALPHA_CAP: f64 = 1e6;
/// Inputs with `max |p_i|` below this are treated as the origin.
pub const ZERO_FEATURE_TOL: f64 = 1e-12;
/// Weights above this count as active extreme points.
pub const ACTIVE_WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    dims: Dims,
    /// Row-major `m x feature_dim`.
    points: Vec<f64>,
    include_origin: bool,
}

impl ConvexHull {
    pub fn new(dims: Dims, points: Vec<f64>, include_origin: bool) -> Result<Self> {
        let fd = dims.feature_dim();
        if points.is_empty() || !points.len().is_multiple_of(fd) {
            return Err(Error::InvariantViolation(format!(
                "hull needs m >= 1 rows of length {fd}, got {} values",
                points.len()
            )));
        }
        Ok(ConvexHull {
            dims,
            points,
            include_origin,
        })
    }

    /// Hull (with origin) of the given product states; every row is checked
    /// to be a rank-one product state.
    pub fn from_product_states(dims: Dims, states: &[ProductState]) -> Result<Self> {
        let mut points = Vec::with_capacity(states.len() * dims.feature_dim());
        for s in states {
            if s.dims != dims {
                return Err(Error::DimensionMismatch(format!(
                    "product state is {}, hull is {}",
                    s.dims, dims
                )));
            }
            points.extend_from_slice(s.feature().coords());
        }
        let hull = ConvexHull::new(dims, points, true)?;
        hull.verify_product_rows(1e-10)?;
        Ok(hull)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dims.feature_dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn include_origin(&self) -> bool {
        self.include_origin
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let fd = self.dims.feature_dim();
        &self.points[i * fd..(i + 1) * fd]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dims.feature_dim())
    }

    pub fn raw_points(&self) -> &[f64] {
        &self.points
    }

    /// The sub-hull on the first `m` extreme points.
    pub fn truncated(&self, m: usize) -> Result<ConvexHull> {
        if m == 0 || m > self.len() {
            return Err(Error::OutOfRange {
                name: "sub-hull size",
                value: m as f64,
            });
        }
        Ok(ConvexHull {
            dims: self.dims,
            points: self.points[..m * self.dims.feature_dim()].to_vec(),
            include_origin: self.include_origin,
        })
    }

    /// Checks that each row defeaturizes to a pure product state: unit purity
    /// of the whole state and of its A marginal.
    pub fn verify_product_rows(&self, tol: f64) -> Result<()> {
        for (i, row) in self.rows().enumerate() {
            let x = FeatureVector::new(self.dims, row.to_vec())?;
            let op = qstate::defeaturize(&x);
            let m = op.entries();
            let purity: f64 = m.iter().map(|z| z.norm_sqr()).sum();
            let (da, db) = (self.dims.d_a(), self.dims.d_b());
            let mut reduced_purity = 0.0;
            for a in 0..da {
                for a2 in 0..da {
                    let v: num_complex::Complex64 =
                        (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum();
                    reduced_purity += v.norm_sqr();
                }
            }
            if (purity - 1.0).abs() > tol || (reduced_purity - 1.0).abs() > tol {
                return Err(Error::InvariantViolation(format!(
                    "hull row {i} is not a pure product state (purity {purity}, marginal purity {reduced_purity})"
                )));
            }
        }
        Ok(())
    }
}

/// `m` random separable pure states, origin included.
pub fn build_hull<R: Rng + ?Sized>(dims: Dims, m: usize, rng: &mut R) -> Result<ConvexHull> {
    if m == 0 {
        return Err(Error::OutOfRange {
            name: "hull size m",
            value: 0.0,
        });
    }
    let states: Vec<ProductState> = (0..m)
        .map(|_| sampling::random_pure_product(dims, rng))
        .collect();
    ConvexHull::from_product_states(dims, &states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaStatus {
    Optimal,
    CappedUnbounded,
}

/// Optimum of `max a s.t. a p = sum_i w_i c_i, w >= 0, sum w = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaResult {
    pub alpha: f64,
    /// Active convex weights `(extreme point index, w_i)`, excluding the origin.
    pub weights: Vec<(usize, f64)>,
    /// Weight on the origin (zero when the hull excludes it).
    pub origin_weight: f64,
    pub status: AlphaStatus,
}

impl AlphaResult {
    pub fn is_separable(&self) -> bool {
        self.alpha >= 1.0
    }

    /// `max_j |alpha p_j - sum_i w_i c_ij|`.
    pub fn residual(&self, hull: &ConvexHull, p: &[f64]) -> f64 {
        let mut acc: Vec<f64> = p.iter().map(|x| self.alpha * x).collect();
        for &(i, w) in &self.weights {
            for (a, c) in acc.iter_mut().zip(hull.row(i)) {
                *a -= w * c;
            }
        }
        acc.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn alpha(hull: &ConvexHull, p: &FeatureVector) -> Result<AlphaResult> {
    if p.dims() != hull.dims {
        return Err(Error::DimensionMismatch(format!(
            "feature vector is {}, hull is {}",
            p.dims(),
            hull.dims
        )));
    }
    alpha_coords(hull, p.coords())
}

/// [`alpha`] on raw coordinates of length `feature_dim`.
pub fn alpha_coords(hull: &ConvexHull, p: &[f64]) -> Result<AlphaResult> {
    let fd = hull.dims.feature_dim();
    if p.len() != fd {
        return Err(Error::LengthMismatch {
            expected: fd,
            got: p.len(),
        });
    }
    if p.iter().all(|x| x.abs() < ZERO_FEATURE_TOL) {
        return Ok(AlphaResult {
            alpha: ALPHA_CAP,
            weights: Vec::new(),
            origin_weight: 1.0,
            status: AlphaStatus::CappedUnbounded,
        });
    }
    if hull.include_origin {
        alpha_with_origin(hull, p)
    } else {
        alpha_without_origin(hull, p)
    }
}

/// With the origin in the hull, substitute `mu = w / a`: the problem becomes
/// `min sum mu s.t. sum mu_i c_i = p, mu >= 0` and `a = 1 / min`. If `p` is
/// outside the cone of the extreme points only `a = 0` is feasible.
fn alpha_with_origin(hull: &ConvexHull, p: &[f64]) -> Result<AlphaResult> {
    let fd = hull.dims.feature_dim();
    let m = hull.len();
    let cost = vec![1.0; m];
    let sol = lp::solve(&StandardForm {
        rows: fd,
        cols: m,
        a: &hull.points,
        b: p,
        c: &cost,
    })?;
    match sol.status {
        LpStatus::Infeasible => Ok(AlphaResult {
            alpha: 0.0,
            weights: Vec::new(),
            origin_weight: 1.0,
            status: AlphaStatus::Optimal,
        }),
        LpStatus::Unbounded => Err(Error::Numerical(
            "gauge LP reported unbounded with non-negative costs".into(),
        )),
        LpStatus::Optimal => {
            let total = sol.objective;
            if total <= 0.0 {
                return Err(Error::Numerical(
                    "gauge LP returned a non-positive optimum".into(),
                ));
            }
            let a = 1.0 / total;
            let weights: Vec<(usize, f64)> = sol.x.iter().map(|&(i, mu)| (i, mu * a)).collect();
            let used: f64 = weights.iter().map(|w| w.1).sum();
            if a > ALPHA_CAP {
                return Ok(AlphaResult {
                    alpha: ALPHA_CAP,
                    weights,
                    origin_weight: (1.0 - used).max(0.0),
                    status: AlphaStatus::CappedUnbounded,
                });
            }
            Ok(AlphaResult {
                alpha: a,
                weights,
                origin_weight: (1.0 - used).max(0.0),
                status: AlphaStatus::Optimal,
            })
        }
    }
}

/// Without the origin: variables `(a+, a-, w_1..w_m)`, rows
/// `a p - sum w_i c_i = 0` and `sum w_i = 1`.
fn alpha_without_origin(hull: &ConvexHull, p: &[f64]) -> Result<AlphaResult> {
    let fd = hull.dims.feature_dim();
    let m = hull.len();
    let rows = fd + 1;
    let cols = m + 2;
    let mut a = vec![0.0; rows * cols];
    for j in 0..fd {
        a[j] = p[j];
        a[rows + j] = -p[j];
    }
    for (i, c) in hull.rows().enumerate() {
        let col = &mut a[(i + 2) * rows..(i + 3) * rows];
        for j in 0..fd {
            col[j] = -c[j];
        }
        col[fd] = 1.0;
    }
    let mut b = vec![0.0; rows];
    b[fd] = 1.0;
    let mut cost = vec![0.0; cols];
    cost[0] = -1.0;
    cost[1] = 1.0;
    let sol = lp::solve(&StandardForm {
        rows,
        cols,
        a: &a,
        b: &b,
        c: &cost,
    })?;
    match sol.status {
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Ok(AlphaResult {
            alpha: ALPHA_CAP,
            weights: Vec::new(),
            origin_weight: 0.0,
            status: AlphaStatus::CappedUnbounded,
        }),
        LpStatus::Optimal => {
            let mut alpha = 0.0;
            let mut weights = Vec::new();
            for &(j, v) in &sol.x {
                match j {
                    0 => alpha += v,
                    1 => alpha -= v,
                    _ => weights.push((j - 2, v)),
                }
            }
            Ok(AlphaResult {
                alpha,
                weights,
                origin_weight: 0.0,
                status: AlphaStatus::Optimal,
            })
        }
    }
}

/// `-1` (separable) iff `alpha >= 1`.
pub fn classify_cha(hull: &ConvexHull, rho: &DensityMatrix) -> Result<Label> {
    let p = qstate::featurize(rho);
    Ok(Label::from_alpha(alpha(hull, &p)?.alpha))
}

/// `alpha` for every coordinate vector, in parallel; order preserved.
pub fn alpha_batch(hull: &ConvexHull, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|p| alpha_coords(hull, p).map(|r| r.alpha))
        .collect()
}

/// Fills the alpha field of every record.
pub fn extend_dataset(hull: &ConvexHull, ds: &LabeledDataset) -> Result<LabeledDataset> {
    if ds.dims != hull.dims {
        return Err(Error::DimensionMismatch(format!(
            "dataset is {}, hull is {}",
            ds.dims, hull.dims
        )));
    }
    let coords: Vec<Vec<f64>> = ds.records.iter().map(|r| r.coords.clone()).collect();
    let alphas = alpha_batch(hull, &coords)?;
    let mut out = ds.clone();
    for (rec, a) in out.records.iter_mut().zip(alphas) {
        rec.alpha = Some(a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
