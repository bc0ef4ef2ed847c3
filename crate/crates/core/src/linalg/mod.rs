//! Dense real matrix kernel.
//!
//! General matrices are plain [`nalgebra::DMatrix`] values. Symmetric and
//! skew-symmetric matrices get their own packed types which store only the
//! independent entries, so (skew-)symmetry holds exactly by construction
//! rather than up to rounding.
//!
//! Besides the factorizations needed to reduce a positive definite form to
//! the identity, this module holds the exponential / logarithm pair between
//! skew-symmetric matrices and the rotation group.

mod expm;
mod factor;
mod logm;
pub mod rows;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expm::expm_skew;
pub use factor::{cholesky_upper, invert_triangular, nullspace};
pub use logm::logm_special_orthogonal;

pub(crate) use expm::expm_dense;
pub(crate) use factor::{cholesky_with_min_pivot, nullspace_above};
pub(crate) use logm::principal_log;

/// Dense real matrix.
pub type Matrix = DMatrix<f64>;

/// Numerical thresholds shared by every stage of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Frobenius-norm acceptance threshold for residuals.
    pub residual_tol: f64,
    /// Smallest acceptable Cholesky pivot relative to the largest diagonal entry.
    pub pd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-10,
            residual_tol: 1e-8,
            pd_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(rank_tol: f64, residual_tol: f64, pd_tol: f64) -> Result<Self> {
        let tol = Tolerances {
            rank_tol,
            residual_tol,
            pd_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
            ("pd_tol", self.pd_tol),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}

/// Real symmetric matrix stored as its upper triangle (row-major, diagonal included).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    packed: Vec<f64>,
}

#[inline]
fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            packed: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut s = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            s.set(i, i, d);
        }
        s
    }

    /// Builds from a dense matrix that is already symmetric; only the upper
    /// triangle is read.
    pub fn from_upper(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                s.set(i, j, m[(i, j)]);
            }
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[sym_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = sym_index(self.n, i, j);
        self.packed[k] = value;
    }

    /// Upper-triangle entries in row-major order.
    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                acc += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.packed.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            packed: self
                .packed
                .iter()
                .zip(&other.packed)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Eigenvalues sorted ascending.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.to_dense());
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Value of the quadratic form `xᵀ·self·x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += self.get(i, i) * x[i] * x[i];
            for j in i + 1..self.n {
                acc += 2.0 * self.get(i, j) * x[i] * x[j];
            }
        }
        acc
    }
}

/// Real skew-symmetric matrix stored as its strictly-upper entries,
/// enumerated `(0,1), (0,2), …, (n-2,n-1)`.
///
/// The stored entries double as coordinates in the basis returned by
/// [`skew_basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn skew_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Number of independent entries of an `n×n` skew-symmetric matrix.
pub fn skew_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        SkewMatrix {
            n,
            upper: vec![0.0; skew_dim(n)],
        }
    }

    pub fn from_coords(n: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != skew_dim(n) {
            return Err(Error::Dimension(format!(
                "{} coordinates given for a {n}x{n} skew matrix (expected {})",
                coords.len(),
                skew_dim(n)
            )));
        }
        Ok(SkewMatrix { n, upper: coords })
    }

    /// Skew-symmetric part `(m − mᵀ)/2` of a square matrix.
    pub fn skew_part(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut upper = Vec::with_capacity(skew_dim(n));
        for i in 0..n {
            for j in i + 1..n {
                upper.push(0.5 * (m[(i, j)] - m[(j, i)]));
            }
        }
        Ok(SkewMatrix { n, upper })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.upper[skew_index(self.n, i, j)],
            Greater => -self.upper[skew_index(self.n, j, i)],
            Equal => 0.0,
        }
    }

    /// Coordinates with respect to [`skew_basis`].
    pub fn coords(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn scale(&self, factor: f64) -> SkewMatrix {
        SkewMatrix {
            n: self.n,
            upper: self.upper.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &SkewMatrix) -> SkewMatrix {
        assert_eq!(self.n, other.n);
        SkewMatrix {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        (2.0 * self.upper.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

/// Square, finite check shared by the public entry points.
pub(crate) fn ensure_square_finite(m: &Matrix) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Symmetric part `(m + mᵀ)/2`; preserves every quadratic-form value.
pub fn symmetrize(m: &Matrix) -> Result<SymMatrix> {
    ensure_square_finite(m)?;
    let n = m.nrows();
    let mut s = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            s.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    Ok(s)
}

/// Unit-entry basis of the skew-symmetric matrices, in lexicographic order of
/// the `+1` position above the diagonal.
pub fn skew_basis(n: usize) -> Vec<SkewMatrix> {
    let dim = skew_dim(n);
    (0..dim)
        .map(|k| {
            let mut coords = vec![0.0; dim];
            coords[k] = 1.0;
            SkewMatrix { n, upper: coords }
        })
        .collect()
}

/// `‖qᵀq − E‖_F`.
pub fn orthogonality_defect(q: &Matrix) -> f64 {
    let n = q.ncols();
    (q.transpose() * q - Matrix::identity(n, n)).norm()
}

/// `diag(-1, 1, …, 1)`.
pub(crate) fn first_axis_reflection(n: usize) -> Matrix {
    let mut d = Matrix::identity(n, n);
    d[(0, 0)] = -1.0;
    d
}

/// Orthogonal factor `U·Vᵀ` of the polar decomposition (nearest orthogonal
/// matrix in Frobenius norm).
pub(crate) fn polar_factor(m: &Matrix) -> Matrix {
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

/// Lexicographic comparison of the row-major entry sequences.
pub(crate) fn lex_cmp(a: &Matrix, b: &Matrix) -> std::cmp::Ordering {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let ord = a[(i, j)].total_cmp(&b[(i, j)]);
            if ord.is_ne() {
                return ord;
            }
        }
    }
    std::cmp::Ordering::Equal
}
