//! Iterative refinement of the hull around the boundary point `alpha p`.
//!
//! Each round solves the hull LP, keeps only the extreme points carrying
//! weight in the optimum, and adds random local perturbations
//! `(exp(i xi H1) ⊗ exp(i xi H2)) |a>|b>` of those points with `xi <= eps`.
//! `eps` shrinks geometrically between rounds.

use super::{alpha, ConvexHull, ACTIVE_WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qstate::{self, DensityMatrix};
use crate::sampling::{self, ProductState};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalPointConfig {
    pub initial_points: usize,
    pub epsilon0: f64,
    pub gamma: f64,
    pub neighbors_per_point: usize,
    pub max_iters: usize,
    pub convergence_tol: f64,
    pub convergence_window: usize,
}

impl Default for CriticalPointConfig {
    fn default() -> Self {
        CriticalPointConfig {
            initial_points: 1000,
            epsilon0: 1.0,
            gamma: 0.95,
            neighbors_per_point: 10,
            max_iters: 200,
            convergence_tol: 1e-4,
            convergence_window: 5,
        }
    }
}

impl CriticalPointConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.initial_points > 0
            && self.epsilon0 > 0.0
            && self.neighbors_per_point > 0
            && self.max_iters > 0
            && self.convergence_tol > 0.0
            && self.convergence_window > 0;
        if !positive {
            return Err(Error::InvariantViolation(
                "critical-point parameters must all be positive".into(),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: self.gamma,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// `alpha >= 1`: the state is certified separable.
    Separable,
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct CriticalPointResult {
    pub alpha: f64,
    pub hull: ConvexHull,
    /// Best alpha after each round; non-decreasing.
    pub trace: Vec<f64>,
    pub stop: StopReason,
}

/// Random Hermitian matrix with Gaussian entries, unit Frobenius norm.
pub fn random_unit_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    loop {
        let z = CMatrix::from_fn(d, d, |_, _| {
            let v = sampling::complex_gaussian_vector(1, rng);
            v[0]
        });
        let h = (&z + z.adjoint()) * Complex64::new(0.5, 0.0);
        let norm = h.norm();
        if norm > 1e-12 {
            return h / Complex64::new(norm, 0.0);
        }
    }
}

fn perturb<R: Rng + ?Sized>(s: &ProductState, eps: f64, rng: &mut R) -> ProductState {
    let h1 = random_unit_hermitian(s.dims.d_a(), rng);
    let h2 = random_unit_hermitian(s.dims.d_b(), rng);
    let xi = rng.random_range(0.0..=eps);
    ProductState {
        dims: s.dims,
        a: linalg::expm_i_hermitian(&h1, xi) * &s.a,
        b: linalg::expm_i_hermitian(&h2, xi) * &s.b,
    }
}

fn hull_of(points: &[ProductState]) -> Result<ConvexHull> {
    let dims = points[0].dims;
    let mut data = Vec::with_capacity(points.len() * dims.feature_dim());
    for s in points {
        data.extend_from_slice(s.feature().coords());
    }
    ConvexHull::new(dims, data, true)
}

pub fn critical_point<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    cfg: &CriticalPointConfig,
    rng: &mut R,
) -> Result<CriticalPointResult> {
    cfg.validate()?;
    let dims = rho.dims();
    let p = qstate::featurize(rho);
    let mut points: Vec<ProductState> = (0..cfg.initial_points)
        .map(|_| sampling::random_pure_product(dims, rng))
        .collect();
    let mut eps = cfg.epsilon0;
    let mut trace: Vec<f64> = Vec::new();
    let mut best = f64::NEG_INFINITY;

    for _ in 0..cfg.max_iters {
        let hull = hull_of(&points)?;
        let res = alpha(&hull, &p)?;
        best = best.max(res.alpha);
        trace.push(best);
        if best >= 1.0 {
            return Ok(CriticalPointResult {
                alpha: best,
                hull,
                trace,
                stop: StopReason::Separable,
            });
        }
        let w = cfg.convergence_window;
        if trace.len() > w {
            let recent = &trace[trace.len() - w..];
            if recent[w - 1] - recent[0] < cfg.convergence_tol {
                return Ok(CriticalPointResult {
                    alpha: best,
                    hull,
                    trace,
                    stop: StopReason::Converged,
                });
            }
        }
        let mut active: Vec<ProductState> = res
            .weights
            .iter()
            .filter(|&&(_, wt)| wt > ACTIVE_WEIGHT_TOL)
            .map(|&(i, _)| points[i].clone())
            .collect();
        if active.is_empty() {
            // Only the origin is feasible: p is outside the cone of the
            // current points. Keep them and add a fresh uniform batch.
            active = std::mem::take(&mut points);
            active
                .extend((0..cfg.initial_points).map(|_| sampling::random_pure_product(dims, rng)));
            points = active;
            eps *= cfg.gamma;
            continue;
        }
        let mut next = Vec::with_capacity(active.len() * (cfg.neighbors_per_point + 1));
        for s in &active {
            for _ in 0..cfg.neighbors_per_point {
                next.push(perturb(s, eps, rng));
            }
        }
        active.extend(next);
        points = active;
        eps *= cfg.gamma;
    }
    let hull = hull_of(&points)?;
    Ok(CriticalPointResult {
        alpha: best,
        hull,
        trace,
        stop: StopReason::MaxIterations,
    })
}
