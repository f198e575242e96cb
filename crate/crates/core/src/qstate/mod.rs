//! Bipartite density matrices, Gell-Mann featurization, and the PPT test.

mod gellmann;

pub use gellmann::{basis_labels, gellmann_basis, gellmann_matrix, GellMannBasis, GellMannKind};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Maximum entrywise deviation from Hermiticity accepted for a state.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum |tr - 1| accepted for a state.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as "non-negative".
pub const PSD_TOL: f64 = -1e-10;

/// Local dimensions of a bipartite system `A ⊗ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DimsRepr", into = "DimsRepr")]
pub struct Dims {
    d_a: usize,
    d_b: usize,
}

#[derive(Serialize, Deserialize)]
struct DimsRepr {
    d_a: usize,
    d_b: usize,
}

impl TryFrom<DimsRepr> for Dims {
    type Error = Error;
    fn try_from(r: DimsRepr) -> Result<Self> {
        Dims::new(r.d_a, r.d_b)
    }
}

impl From<Dims> for DimsRepr {
    fn from(d: Dims) -> Self {
        DimsRepr {
            d_a: d.d_a,
            d_b: d.d_b,
        }
    }
}

impl Dims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a < 2 || d_b < 2 {
            return Err(Error::InvalidDimension(format!(
                "subsystem dimensions must be >= 2, got ({d_a}, {d_b})"
            )));
        }
        Ok(Dims { d_a, d_b })
    }

    pub const fn two_qubits() -> Self {
        Dims { d_a: 2, d_b: 2 }
    }

    pub const fn two_qutrits() -> Self {
        Dims { d_a: 3, d_b: 3 }
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// Total Hilbert-space dimension `d_A d_B`.
    pub fn n(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Length of a feature vector, `n^2 - 1`.
    pub fn feature_dim(&self) -> usize {
        self.n() * self.n() - 1
    }

    fn check_square(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.n() || m.ncols() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "expected {0}x{0} matrix, got {1}x{2}",
                self.n(),
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.d_a, self.d_b)
    }
}

/// A validated bipartite density matrix: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Dims,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: Dims, entries: CMatrix) -> Result<Self> {
        dims.check_square(&entries)?;
        check_hermitian_unit_trace(&entries)?;
        let min = linalg::min_eigenvalue(&entries);
        if min < PSD_TOL {
            return Err(Error::InvariantViolation(format!(
                "matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(DensityMatrix { dims, entries })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_trusted(dims: Dims, entries: CMatrix) -> Self {
        debug_assert!(dims.check_square(&entries).is_ok());
        debug_assert!(check_hermitian_unit_trace(&entries).is_ok());
        DensityMatrix { dims, entries }
    }

    pub fn maximally_mixed(dims: Dims) -> Self {
        let n = dims.n();
        let entries = CMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0);
        DensityMatrix { dims, entries }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        linalg::trace_product_re(&self.entries, &self.entries)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }

    /// Reduced state on subsystem A (partial trace over B).
    pub fn reduced_a(&self) -> CMatrix {
        let (da, db) = (self.dims.d_a, self.dims.d_b);
        CMatrix::from_fn(da, da, |a, a2| {
            (0..db)
                .map(|b| self.entries[(a * db + b, a2 * db + b)])
                .sum()
        })
    }

    /// Reduced state on subsystem B (partial trace over A).
    pub fn reduced_b(&self) -> CMatrix {
        let (da, db) = (self.dims.d_a, self.dims.d_b);
        CMatrix::from_fn(db, db, |b, b2| {
            (0..da)
                .map(|a| self.entries[(a * db + b, a * db + b2)])
                .sum()
        })
    }
}

fn check_hermitian_unit_trace(m: &CMatrix) -> Result<()> {
    let defect = linalg::hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::InvariantViolation(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let tr = linalg::trace(m);
    if (tr - ONE).norm() > TRACE_TOL {
        return Err(Error::InvariantViolation(format!(
            "trace is {tr}, expected 1"
        )));
    }
    Ok(())
}

/// A Hermitian unit-trace operator whose positivity has not been enforced.
///
/// This is what comes back from [`defeaturize`]: arbitrary points of feature
/// space map to operators that may have negative eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitTraceOperator {
    dims: Dims,
    entries: CMatrix,
}

impl UnitTraceOperator {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.entries)
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= PSD_TOL
    }

    pub fn into_density(self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.dims, self.entries)
    }
}

/// Gell-Mann coordinates of a state; the maximally mixed state is the origin
/// and pure states lie on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    dims: Dims,
    coords: Vec<f64>,
}

impl FeatureVector {
    pub fn new(dims: Dims, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != dims.feature_dim() {
            return Err(Error::LengthMismatch {
                expected: dims.feature_dim(),
                got: coords.len(),
            });
        }
        Ok(FeatureVector { dims, coords })
    }

    pub fn zeros(dims: Dims) -> Self {
        FeatureVector {
            dims,
            coords: vec![0.0; dims.feature_dim()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn scaled(&self, t: f64) -> FeatureVector {
        FeatureVector {
            dims: self.dims,
            coords: self.coords.iter().map(|x| x * t).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

fn featurize_scale(n: usize) -> f64 {
    (n as f64 / (2.0 * (n as f64 - 1.0))).sqrt()
}

/// Coordinates `x_i = sqrt(n / (2(n-1))) tr(rho lambda_i)` of an arbitrary
/// matrix, after checking that it is Hermitian.
pub fn featurize_matrix(dims: Dims, m: &CMatrix) -> Result<FeatureVector> {
    dims.check_square(m)?;
    let defect = linalg::hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::InvariantViolation(format!(
            "cannot featurize a non-Hermitian matrix (defect {defect:e})"
        )));
    }
    Ok(featurize_unchecked(dims, m))
}

pub(crate) fn featurize_unchecked(dims: Dims, m: &CMatrix) -> FeatureVector {
    FeatureVector {
        dims,
        coords: gellmann_coordinates(m),
    }
}

/// Scaled Gell-Mann coordinates of any `n x n` Hermitian matrix, `n >= 2`.
///
/// Uses the closed forms `tr(rho s_jk) = 2 Re rho_jk`, `tr(rho a_jk) = -2 Im rho_jk`
/// and the diagonal partial sums instead of forming the basis.
pub fn gellmann_coordinates(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let s = featurize_scale(n);
    let pairs = n * (n - 1) / 2;
    let mut coords = vec![0.0; n * n - 1];
    let mut idx = 0;
    for j in 0..n {
        for k in j + 1..n {
            coords[idx] = s * (m[(j, k)] + m[(k, j)]).re;
            coords[pairs + idx] = s * (m[(k, j)] - m[(j, k)]).im;
            idx += 1;
        }
    }
    let mut partial = 0.0;
    for l in 1..n {
        partial += m[(l - 1, l - 1)].re;
        let d = gellmann::diagonal_scale(l) * (partial - l as f64 * m[(l, l)].re);
        coords[2 * pairs + l - 1] = s * d;
    }
    coords
}

/// Inverse of [`gellmann_coordinates`]: `(I + sqrt(n(n-1)/2) x.lambda) / n`.
pub fn from_gellmann_coordinates(n: usize, x: &[f64]) -> CMatrix {
    debug_assert_eq!(x.len(), n * n - 1);
    let c = (n as f64 * (n as f64 - 1.0) / 2.0).sqrt() / n as f64;
    let pairs = n * (n - 1) / 2;
    let mut m = CMatrix::from_element(n, n, ZERO);
    let mut idx = 0;
    for j in 0..n {
        for k in j + 1..n {
            let (xs, xa) = (x[idx], x[pairs + idx]);
            m[(j, k)] = Complex64::new(c * xs, -c * xa);
            m[(k, j)] = Complex64::new(c * xs, c * xa);
            idx += 1;
        }
    }
    let mut diag = vec![1.0 / n as f64; n];
    for l in 1..n {
        let w = c * x[2 * pairs + l - 1] * gellmann::diagonal_scale(l);
        for d in diag.iter_mut().take(l) {
            *d += w;
        }
        diag[l] -= l as f64 * w;
    }
    for (j, d) in diag.into_iter().enumerate() {
        m[(j, j)] = Complex64::new(d, 0.0);
    }
    m
}

pub fn featurize(rho: &DensityMatrix) -> FeatureVector {
    featurize_unchecked(rho.dims, &rho.entries)
}

/// Feature vector of the pure state `|psi><psi|` (psi must be normalized).
pub fn featurize_pure(dims: Dims, psi: &CVector) -> FeatureVector {
    featurize_unchecked(dims, &linalg::outer(psi))
}

pub fn defeaturize(x: &FeatureVector) -> UnitTraceOperator {
    UnitTraceOperator {
        dims: x.dims,
        entries: from_gellmann_coordinates(x.dims.n(), &x.coords),
    }
}

/// A normalized pure state on `A ⊗ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Dims,
    amps: CVector,
}

impl StateVector {
    pub fn new(dims: Dims, amps: CVector) -> Result<Self> {
        if amps.len() != dims.n() {
            return Err(Error::LengthMismatch {
                expected: dims.n(),
                got: amps.len(),
            });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "state vector has norm {norm}, expected 1"
            )));
        }
        Ok(StateVector { dims, amps })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn to_density(&self) -> DensityMatrix {
        let mut m = linalg::outer(&self.amps);
        // Kill the O(eps) anti-Hermitian part of the outer product.
        m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        DensityMatrix::from_trusted(self.dims, m)
    }
}

/// A single-party state used as a tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalState {
    Pure(CVector),
    Mixed(CMatrix),
}

/// Result of [`tensor`]: pure inputs give a pure product, mixed give mixed.
#[derive(Debug, Clone, PartialEq)]
pub enum Bipartite {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl Bipartite {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            Bipartite::Pure(v) => v.to_density(),
            Bipartite::Mixed(m) => m.clone(),
        }
    }
}

pub fn tensor(a: &LocalState, b: &LocalState) -> Result<Bipartite> {
    match (a, b) {
        (LocalState::Pure(va), LocalState::Pure(vb)) => {
            let dims = Dims::new(va.len(), vb.len())?;
            StateVector::new(dims, va.kronecker(vb)).map(Bipartite::Pure)
        }
        (LocalState::Mixed(ma), LocalState::Mixed(mb)) => {
            let dims = Dims::new(ma.nrows(), mb.nrows())?;
            DensityMatrix::new(dims, linalg::kron(ma, mb)).map(Bipartite::Mixed)
        }
        _ => Err(Error::KindMismatch(
            "tensor needs two pure or two mixed factors".into(),
        )),
    }
}

/// Transpose on the B factor: `(a b | a' b') -> (a b' | a' b)`.
pub fn partial_transpose(rho: &DensityMatrix) -> CMatrix {
    partial_transpose_matrix(rho.dims, &rho.entries)
}

pub fn partial_transpose_matrix(dims: Dims, m: &CMatrix) -> CMatrix {
    let (da, db) = (dims.d_a, dims.d_b);
    let n = dims.n();
    CMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        debug_assert!(a < da && a2 < da);
        m[(a * db + b2, a2 * db + b)]
    })
}

pub fn is_ppt(rho: &DensityMatrix) -> bool {
    linalg::min_eigenvalue(&partial_transpose(rho)) >= PSD_TOL
}

/// `alpha rho + (1 - alpha) I / n`.
pub fn depolarize(rho: &DensityMatrix, alpha: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
        });
    }
    let n = rho.dims.n();
    let mixed = (1.0 - alpha) / n as f64;
    let mut m = &rho.entries * Complex64::new(alpha, 0.0);
    for i in 0..n {
        m[(i, i)] += mixed;
    }
    Ok(DensityMatrix::from_trusted(rho.dims, m))
}

fn basis_ket(n: usize, i: usize) -> CVector {
    let mut v = CVector::from_element(n, ZERO);
    v[i] = ONE;
    v
}

/// The five product vectors of the two-qutrit "tiles" unextendible product basis.
pub fn tiles_upb() -> [CVector; 5] {
    let ket = |j: usize, k: usize| basis_ket(9, 3 * j + k);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [
        (ket(0, 0) - ket(0, 1)) * h,
        (ket(2, 1) - ket(2, 2)) * h,
        (ket(0, 2) - ket(1, 2)) * h,
        (ket(1, 0) - ket(2, 0)) * h,
        CVector::from_element(9, Complex64::new(1.0 / 3.0, 0.0)),
    ]
}

/// `(I - sum_i |v_i><v_i|) / 4` for the tiles UPB; PPT but entangled.
pub fn tiles_state() -> DensityMatrix {
    let mut m = CMatrix::identity(9, 9);
    for v in tiles_upb() {
        m -= linalg::outer(&v);
    }
    m *= Complex64::new(0.25, 0.0);
    DensityMatrix::from_trusted(Dims::two_qutrits(), m)
}

/// The two-qubit singlet `(|01> - |10>) / sqrt 2`.
pub fn singlet() -> DensityMatrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let v = (basis_ket(4, 1) - basis_ket(4, 2)) * h;
    StateVector {
        dims: Dims::two_qubits(),
        amps: v,
    }
    .to_density()
}
