use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};
use num_complex::Complex64;

/// Which family a generalized Gell-Mann matrix belongs to, with 0-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GellMannKind {
    /// `E_jk + E_kj`, `j < k`.
    Symmetric { j: usize, k: usize },
    /// `-i (E_jk - E_kj)`, `j < k`.
    Antisymmetric { j: usize, k: usize },
    /// `sqrt(2 / (l (l + 1))) (sum_{j<l} E_jj - l E_ll)`, `1 <= l < n`.
    Diagonal { l: usize },
}

/// Ordered labels of the `n^2 - 1` basis elements: all symmetric pairs in
/// lexicographic order, then all antisymmetric pairs, then the diagonals.
pub fn basis_labels(n: usize) -> Vec<GellMannKind> {
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            out.push(GellMannKind::Symmetric { j, k });
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            out.push(GellMannKind::Antisymmetric { j, k });
        }
    }
    for l in 1..n {
        out.push(GellMannKind::Diagonal { l });
    }
    out
}

pub(crate) fn diagonal_scale(l: usize) -> f64 {
    (2.0 / (l * (l + 1)) as f64).sqrt()
}

pub fn gellmann_matrix(n: usize, kind: GellMannKind) -> CMatrix {
    let mut m = CMatrix::from_element(n, n, ZERO);
    match kind {
        GellMannKind::Symmetric { j, k } => {
            m[(j, k)] = ONE;
            m[(k, j)] = ONE;
        }
        GellMannKind::Antisymmetric { j, k } => {
            m[(j, k)] = -I;
            m[(k, j)] = I;
        }
        GellMannKind::Diagonal { l } => {
            let s = diagonal_scale(l);
            for j in 0..l {
                m[(j, j)] = Complex64::new(s, 0.0);
            }
            m[(l, l)] = Complex64::new(-(l as f64) * s, 0.0);
        }
    }
    m
}

/// The generalized Gell-Mann matrices of dimension `n`.
#[derive(Debug, Clone)]
pub struct GellMannBasis {
    n: usize,
    matrices: Vec<CMatrix>,
}

impl GellMannBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

pub fn gellmann_basis(n: usize) -> Result<GellMannBasis> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "Gell-Mann basis needs n >= 2, got {n}"
        )));
    }
    let matrices = basis_labels(n)
        .into_iter()
        .map(|kind| gellmann_matrix(n, kind))
        .collect();
    Ok(GellMannBasis { n, matrices })
}
