//! Extreme points of the k-symmetric-extendible set and the witnesses they
//! give.
//!
//! For a traceless 2-local term `H_AB` the Hamiltonian `H = sum_i H_AB_i` on
//! `A ⊗ B_1 ⊗ ... ⊗ B_k` has a ground state whose `AB_i` marginals all agree;
//! that marginal `rho_H` minimizes `tr(rho H_AB)` over k-extendible states,
//! and the minimum is `E_0 / k`. Any state with `tr(rho H_AB) < E_0 / k` has
//! no k-symmetric extension and is therefore entangled.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::qstate::{self, DensityMatrix, Dims, GellMannBasis};
use crate::sampling::ProductState;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Largest `d_A d_B^k` handled by the dense full-space construction.
pub const FULL_SPACE_LIMIT: usize = 128;
/// Largest `d_A * binom(k + d_B - 1, d_B - 1)` handled by the
/// symmetric-subspace construction.
pub const SYMMETRIC_SPACE_LIMIT: usize = 1024;
/// Eigenvalues within this of the minimum belong to the ground space.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Margin below `E_0 / k` required to flag a state.
pub const WITNESS_MARGIN: f64 = 1e-10;

/// `H_AB = sum_i a_i O_i` over the orthonormal traceless basis
/// `O_i = lambda_i / sqrt 2`, with `sum_i a_i^2 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLocalHamiltonian {
    dims: Dims,
    coeffs: Vec<f64>,
}

fn orthonormal_basis(dims: Dims) -> GellMannBasis {
    qstate::gellmann_basis(dims.n()).expect("bipartite dimension is at least 4")
}

impl TwoLocalHamiltonian {
    /// Normalizes `coeffs` to unit length.
    pub fn from_coeffs(dims: Dims, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dims.feature_dim() {
            return Err(Error::LengthMismatch {
                expected: dims.feature_dim(),
                got: coeffs.len(),
            });
        }
        let norm = coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(Error::InvariantViolation(
                "2-local Hamiltonian has no traceless part".into(),
            ));
        }
        Ok(TwoLocalHamiltonian {
            dims,
            coeffs: coeffs.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Coefficients of the traceless part of a Hermitian `h`, normalized.
    /// The ground states of the result are those of `h`.
    pub fn from_matrix(dims: Dims, h: &CMatrix) -> Result<Self> {
        if h.nrows() != dims.n() || h.ncols() != dims.n() {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} operator",
                dims.n()
            )));
        }
        if linalg::hermiticity_defect(h) > 1e-12 {
            return Err(Error::InvariantViolation(
                "2-local term must be Hermitian".into(),
            ));
        }
        let basis = orthonormal_basis(dims);
        let coeffs = basis
            .matrices()
            .iter()
            .map(|l| linalg::trace_product_re(h, l) / std::f64::consts::SQRT_2)
            .collect();
        Self::from_coeffs(dims, coeffs)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The operator `H_AB` on `A ⊗ B`.
    pub fn matrix(&self) -> CMatrix {
        let basis = orthonormal_basis(self.dims);
        let n = self.dims.n();
        let mut h = CMatrix::from_element(n, n, ZERO);
        for (a, l) in self.coeffs.iter().zip(basis.matrices()) {
            h += l * Complex64::new(a / std::f64::consts::SQRT_2, 0.0);
        }
        h
    }
}

/// Coefficients uniform on the unit sphere.
pub fn random_two_local<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> TwoLocalHamiltonian {
    loop {
        let coeffs: Vec<f64> = (0..dims.feature_dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        if let Ok(h) = TwoLocalHamiltonian::from_coeffs(dims, coeffs) {
            return h;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    /// Dense `H` on the full `d_A d_B^k` space.
    Full,
    /// `H` restricted to `A ⊗ Sym^k(B)` in the occupation-number basis.
    Symmetric,
}

impl Construction {
    pub fn auto(dims: Dims, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange {
                name: "k",
                value: 0.0,
            });
        }
        if full_dim(dims, k).is_some_and(|d| d <= FULL_SPACE_LIMIT) {
            return Ok(Construction::Full);
        }
        let sym = dims.d_a() * binomial(k + dims.d_b() - 1, dims.d_b() - 1);
        if sym <= SYMMETRIC_SPACE_LIMIT {
            Ok(Construction::Symmetric)
        } else {
            Err(Error::SizeLimit(format!(
                "k = {k} on {dims} needs a {sym}-dimensional symmetric space (limit {SYMMETRIC_SPACE_LIMIT})"
            )))
        }
    }
}

fn full_dim(dims: Dims, k: usize) -> Option<usize> {
    dims.d_b()
        .checked_pow(k as u32)
        .and_then(|p| p.checked_mul(dims.d_a()))
}

fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// A boundary point of the k-extendible set.
#[derive(Debug, Clone)]
pub struct ThetaKPoint {
    pub k: usize,
    /// `rho_H`, the `AB_1` marginal of the ground state.
    pub marginal: DensityMatrix,
    /// `b_i = tr(rho_H O_i)`.
    pub coords: Vec<f64>,
    /// Ground energy `E_0 = <psi_g| H |psi_g>` of the full k-party Hamiltonian.
    pub energy: f64,
    pub degeneracy: usize,
    pub construction: Construction,
}

impl ThetaKPoint {
    /// `E_0 / k`, the minimum of `tr(rho H_AB)` over this construction's set.
    pub fn energy_per_pair(&self) -> f64 {
        self.energy / self.k as f64
    }
}

pub fn ground_marginal(h: &TwoLocalHamiltonian, k: usize) -> Result<ThetaKPoint> {
    ground_marginal_with(h, k, Construction::auto(h.dims, k)?)
}

pub fn ground_marginal_with(
    h: &TwoLocalHamiltonian,
    k: usize,
    construction: Construction,
) -> Result<ThetaKPoint> {
    if k == 0 {
        return Err(Error::OutOfRange {
            name: "k",
            value: 0.0,
        });
    }
    let hab = h.matrix();
    let (marginal, energy, degeneracy) = match construction {
        Construction::Full => {
            let space = FullSpace::new(h.dims, k)?;
            let big = space.hamiltonian(&hab);
            let (energy, ground) = ground_space(&big);
            let marginal = space.average_marginal(&ground, 0);
            (marginal, energy, ground.ncols())
        }
        Construction::Symmetric => {
            let space = SymmetricSpace::new(h.dims, k)?;
            let big = space.hamiltonian(&hab);
            let (energy, ground) = ground_space(&big);
            let marginal = space.average_marginal(&ground);
            (marginal, energy, ground.ncols())
        }
    };
    let marginal = hermitize_unit_trace(marginal);
    let basis = orthonormal_basis(h.dims);
    let coords = basis
        .matrices()
        .iter()
        .map(|l| linalg::trace_product_re(&marginal, l) / std::f64::consts::SQRT_2)
        .collect();
    let marginal = DensityMatrix::new(h.dims, marginal)?;
    Ok(ThetaKPoint {
        k,
        marginal,
        coords,
        energy,
        degeneracy,
        construction,
    })
}

fn hermitize_unit_trace(m: CMatrix) -> CMatrix {
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = linalg::trace(&m).re;
    m / Complex64::new(tr, 0.0)
}

/// Lowest eigenvalue and an orthonormal basis (columns) of its eigenspace.
fn ground_space(h: &CMatrix) -> (f64, CMatrix) {
    let (values, vectors) = linalg::hermitian_eigh(h);
    let e0 = values[0];
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let deg = values
        .iter()
        .take_while(|&&v| v - e0 < DEGENERACY_TOL * scale)
        .count();
    (e0, vectors.columns(0, deg).into_owned())
}

/// `A ⊗ B^{⊗k}` with index `a d_B^k + b_1 d_B^{k-1} + ... + b_k`.
struct FullSpace {
    dims: Dims,
    k: usize,
    dim: usize,
}

impl FullSpace {
    fn new(dims: Dims, k: usize) -> Result<Self> {
        let dim = full_dim(dims, k).filter(|&d| d <= 4096).ok_or_else(|| {
            Error::SizeLimit(format!("full space for k = {k} on {dims} is too large"))
        })?;
        Ok(FullSpace { dims, k, dim })
    }

    fn stride(&self, party: usize) -> usize {
        self.dims.d_b().pow((self.k - 1 - party) as u32)
    }

    fn hamiltonian(&self, hab: &CMatrix) -> CMatrix {
        let (da, db) = (self.dims.d_a(), self.dims.d_b());
        let bdim = self.dim / da;
        let mut big = CMatrix::from_element(self.dim, self.dim, ZERO);
        for col in 0..self.dim {
            let (a, rest) = (col / bdim, col % bdim);
            for party in 0..self.k {
                let stride = self.stride(party);
                let b = (rest / stride) % db;
                let base = rest - b * stride;
                for a2 in 0..da {
                    for b2 in 0..db {
                        let v = hab[(a2 * db + b2, a * db + b)];
                        if v != ZERO {
                            big[(a2 * bdim + base + b2 * stride, col)] += v;
                        }
                    }
                }
            }
        }
        big
    }

    /// `AB_party` marginal of the uniform mixture over the columns of `states`.
    fn average_marginal(&self, states: &CMatrix, party: usize) -> CMatrix {
        let (da, db) = (self.dims.d_a(), self.dims.d_b());
        let bdim = self.dim / da;
        let stride = self.stride(party);
        let n = da * db;
        let mut rho = CMatrix::from_element(n, n, ZERO);
        for s in 0..states.ncols() {
            let psi = states.column(s);
            for row in 0..self.dim {
                let (a, rest) = (row / bdim, row % bdim);
                let b = (rest / stride) % db;
                let base = rest - b * stride;
                let amp = psi[row];
                if amp == ZERO {
                    continue;
                }
                for a2 in 0..da {
                    for b2 in 0..db {
                        let other = psi[a2 * bdim + base + b2 * stride];
                        rho[(a * db + b, a2 * db + b2)] += amp * other.conj();
                    }
                }
            }
        }
        rho / Complex64::new(states.ncols() as f64, 0.0)
    }
}

/// `A ⊗ Sym^k(B)` in the occupation-number basis of the `k` B parties.
struct SymmetricSpace {
    dims: Dims,
    k: usize,
    occupations: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<u16>> {
    if parts == 1 {
        return vec![vec![total as u16]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first as u16);
            out.push(rest);
        }
    }
    out
}

impl SymmetricSpace {
    fn new(dims: Dims, k: usize) -> Result<Self> {
        let count = binomial(k + dims.d_b() - 1, dims.d_b() - 1);
        if dims.d_a() * count > 4 * SYMMETRIC_SPACE_LIMIT {
            return Err(Error::SizeLimit(format!(
                "symmetric space for k = {k} on {dims} has dimension {}",
                dims.d_a() * count
            )));
        }
        let occupations = compositions(k, dims.d_b());
        let index = occupations
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clone(), i))
            .collect();
        Ok(SymmetricSpace {
            dims,
            k,
            occupations,
            index,
        })
    }

    fn dim(&self) -> usize {
        self.dims.d_a() * self.occupations.len()
    }

    /// Target state and amplitude of `c_to^dagger c_from` on occupation `occ`.
    fn hop(&self, occ: &[u16], from: usize, to: usize) -> Option<(usize, f64)> {
        if occ[from] == 0 {
            return None;
        }
        let mut next = occ.to_vec();
        let amp_from = (next[from] as f64).sqrt();
        next[from] -= 1;
        let amp_to = (next[to] as f64 + 1.0).sqrt();
        next[to] += 1;
        Some((self.index[&next], amp_from * amp_to))
    }

    fn hamiltonian(&self, hab: &CMatrix) -> CMatrix {
        let (da, db) = (self.dims.d_a(), self.dims.d_b());
        let s = self.occupations.len();
        let mut big = CMatrix::from_element(self.dim(), self.dim(), ZERO);
        for a in 0..da {
            for (ni, occ) in self.occupations.iter().enumerate() {
                let col = a * s + ni;
                for b in 0..db {
                    for b2 in 0..db {
                        let Some((mi, amp)) = self.hop(occ, b, b2) else {
                            continue;
                        };
                        for a2 in 0..da {
                            let v = hab[(a2 * db + b2, a * db + b)];
                            if v != ZERO {
                                big[(a2 * s + mi, col)] += v * amp;
                            }
                        }
                    }
                }
            }
        }
        big
    }

    /// `rho[(a,b),(a',b')] = <phi| |a'><a| ⊗ c_b'^dagger c_b |phi> / k`,
    /// averaged over the columns of `states`.
    fn average_marginal(&self, states: &CMatrix) -> CMatrix {
        let (da, db) = (self.dims.d_a(), self.dims.d_b());
        let s = self.occupations.len();
        let n = da * db;
        let mut rho = CMatrix::from_element(n, n, ZERO);
        for col in 0..states.ncols() {
            let phi = states.column(col);
            for a in 0..da {
                for (ni, occ) in self.occupations.iter().enumerate() {
                    let amp_in = phi[a * s + ni];
                    if amp_in == ZERO {
                        continue;
                    }
                    for b in 0..db {
                        for b2 in 0..db {
                            let Some((mi, amp)) = self.hop(occ, b, b2) else {
                                continue;
                            };
                            for a2 in 0..da {
                                rho[(a * db + b, a2 * db + b2)] +=
                                    phi[a2 * s + mi].conj() * amp_in * amp;
                            }
                        }
                    }
                }
            }
        }
        rho / Complex64::new((self.k * states.ncols()) as f64, 0.0)
    }

    /// Isometry from the occupation basis into the full space.
    #[cfg(test)]
    fn embedding(&self) -> CMatrix {
        let full = FullSpace::new(self.dims, self.k).unwrap();
        let (da, db) = (self.dims.d_a(), self.dims.d_b());
        let bdim = full.dim / da;
        let s = self.occupations.len();
        let mut v = CMatrix::from_element(full.dim, self.dim(), ZERO);
        for rest in 0..bdim {
            let mut occ = vec![0u16; db];
            for party in 0..self.k {
                occ[(rest / full.stride(party)) % db] += 1;
            }
            let ni = self.index[&occ];
            let count = multinomial(self.k, &occ);
            for a in 0..da {
                v[(a * bdim + rest, a * s + ni)] = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
            }
        }
        v
    }
}

#[cfg(test)]
fn multinomial(k: usize, occ: &[u16]) -> usize {
    let fact = |n: usize| (1..=n).product::<usize>();
    fact(k) / occ.iter().map(|&o| fact(o as usize)).product::<usize>()
}

/// True iff `tr(rho H_AB) < E_0 / k - WITNESS_MARGIN`, which rules out a
/// k-symmetric extension.
pub fn witness_check(rho: &DensityMatrix, h: &TwoLocalHamiltonian, k: usize) -> Result<bool> {
    if rho.dims() != h.dims {
        return Err(Error::DimensionMismatch(format!(
            "state is {}, Hamiltonian is {}",
            rho.dims(),
            h.dims
        )));
    }
    let point = ground_marginal(h, k)?;
    Ok(expectation(rho.entries(), &h.matrix()) < point.energy_per_pair() - WITNESS_MARGIN)
}

fn expectation(rho: &CMatrix, h: &CMatrix) -> f64 {
    linalg::trace_product_re(rho, h)
}

/// One projected boundary point; `k = 0` marks the separable-set estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub x1: f64,
    pub x2: f64,
    pub k: usize,
}

impl BoundaryPoint {
    /// Support value `max_rho -(cos t x1 + sin t x2)` realized by this point.
    pub fn support(&self) -> f64 {
        -(self.theta.cos() * self.x1 + self.theta.sin() * self.x2)
    }
}

pub fn angles(num_angles: usize) -> Vec<f64> {
    (0..num_angles)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / num_angles as f64)
        .collect()
}

/// For each direction `t`, the ground-state marginal of `cos t H1 + sin t H2`
/// projected onto `(tr rho H1, tr rho H2)`.
pub fn boundary_projection(
    dims: Dims,
    h1: &CMatrix,
    h2: &CMatrix,
    k: usize,
    num_angles: usize,
) -> Result<Vec<BoundaryPoint>> {
    use rayon::prelude::*;
    angles(num_angles)
        .into_par_iter()
        .map(|theta| {
            let h = h1 * Complex64::new(theta.cos(), 0.0) + h2 * Complex64::new(theta.sin(), 0.0);
            let two_local = TwoLocalHamiltonian::from_matrix(dims, &h)?;
            let point = ground_marginal(&two_local, k)?;
            Ok(BoundaryPoint {
                theta,
                x1: expectation(point.marginal.entries(), h1),
                x2: expectation(point.marginal.entries(), h2),
                k,
            })
        })
        .collect()
}

/// Same projection for the convex hull of the given product states: per
/// direction, the sample minimizing `tr(rho H_t)`.
pub fn separable_projection(
    h1: &CMatrix,
    h2: &CMatrix,
    states: &[ProductState],
    num_angles: usize,
) -> Vec<BoundaryPoint> {
    let projected: Vec<(f64, f64)> = states
        .iter()
        .map(|s| {
            let v: CVector = s.vector();
            let rho = linalg::outer(&v);
            (expectation(&rho, h1), expectation(&rho, h2))
        })
        .collect();
    angles(num_angles)
        .into_iter()
        .map(|theta| {
            let (c, s) = (theta.cos(), theta.sin());
            let &(x1, x2) = projected
                .iter()
                .min_by(|p, q| (c * p.0 + s * p.1).total_cmp(&(c * q.0 + s * q.1)))
                .expect("at least one product state");
            BoundaryPoint {
                theta,
                x1,
                x2,
                k: 0,
            }
        })
        .collect()
}

/// The two observables of the qubit-qubit boundary figure:
/// `|0><0| ⊗ Z / sqrt 2` and `(Y ⊗ X - X ⊗ Y) / 2`.
pub fn figure_observables() -> (CMatrix, CMatrix) {
    use crate::linalg::{I, ONE};
    let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let y = CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    let p0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
    let h1 = p0.kronecker(&z) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let h2 = (y.kronecker(&x) - x.kronecker(&y)) * Complex64::new(0.5, 0.0);
    (h1, h2)
}
