use nalgebra::{DVector, SVD};

use super::{Matrix, SymMatrix, Tolerances};
use crate::error::{Error, Result};

/// Upper Cholesky factor `U` with `b = UᵀU`.
///
/// A pivot at or below `pd_tol · max_i b_ii` is reported as
/// [`Error::NotPositiveDefinite`].
pub fn cholesky_upper(b: &SymMatrix, tol: &Tolerances) -> Result<Matrix> {
    cholesky_with_min_pivot(b, tol).map(|(u, _)| u)
}

/// Same as [`cholesky_upper`] but also returns the smallest pivot met.
pub(crate) fn cholesky_with_min_pivot(b: &SymMatrix, tol: &Tolerances) -> Result<(Matrix, f64)> {
    if !b.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = b.dim();
    let max_diag = (0..n)
        .map(|i| b.get(i, i))
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = tol.pd_tol * max_diag.max(0.0);

    let mut u = Matrix::zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let mut pivot = b.get(k, k);
        for i in 0..k {
            pivot -= u[(i, k)] * u[(i, k)];
        }
        min_pivot = min_pivot.min(pivot);
        if pivot.is_nan() || pivot <= threshold || max_diag <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot, index: k });
        }
        let d = pivot.sqrt();
        u[(k, k)] = d;
        for j in k + 1..n {
            let mut s = b.get(k, j);
            for i in 0..k {
                s -= u[(i, k)] * u[(i, j)];
            }
            u[(k, j)] = s / d;
        }
    }
    Ok((u, min_pivot))
}

/// Inverse of an upper-triangular matrix by back substitution.
pub fn invert_triangular(u: &Matrix) -> Result<Matrix> {
    super::ensure_square_finite(u)?;
    let n = u.nrows();
    for i in 0..n {
        for j in 0..i {
            if u[(i, j)] != 0.0 {
                return Err(Error::Dimension(format!(
                    "matrix is not upper triangular (entry ({i},{j}) = {})",
                    u[(i, j)]
                )));
            }
        }
    }
    if let Some(index) = (0..n).find(|&i| u[(i, i)] == 0.0) {
        return Err(Error::SingularMatrix { index });
    }

    let mut inv = Matrix::zeros(n, n);
    for col in 0..n {
        // solve U x = e_col; x is zero below `col`
        for row in (0..=col).rev() {
            let mut s = if row == col { 1.0 } else { 0.0 };
            for k in row + 1..=col {
                s -= u[(row, k)] * inv[(k, col)];
            }
            inv[(row, col)] = s / u[(row, row)];
        }
    }
    Ok(inv)
}

/// Orthonormal basis of the numerical kernel of `a`.
///
/// Singular values at or below `rank_tol · σ_max` count as zero. Each returned
/// vector has its first non-negligible entry made positive so the output is
/// reproducible.
pub fn nullspace(a: &Matrix, tol: &Tolerances) -> Vec<DVector<f64>> {
    nullspace_above(a, tol, 0.0)
}

/// [`nullspace`] with the cutoff `rank_tol · max(σ_max, floor)`, for systems
/// whose entries are all rounding noise of data of size `floor`.
pub(crate) fn nullspace_above(a: &Matrix, tol: &Tolerances, floor: f64) -> Vec<DVector<f64>> {
    let cols = a.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // pad with zero rows so the SVD returns a full set of right singular vectors
    let rows = a.nrows().max(cols);
    let mut padded = Matrix::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);

    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.rank_tol * sigma_max.max(floor);

    let mut kernel: Vec<(usize, DVector<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| (k, v_t.row(k).transpose()))
        .collect();
    kernel.sort_by_key(|(k, _)| *k);
    kernel
        .into_iter()
        .map(|(_, mut v)| {
            if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
                if first < 0.0 {
                    v.neg_mut();
                }
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn cholesky_examples() {
        let u = cholesky_upper(&SymMatrix::identity(2), &tol()).unwrap();
        assert_eq!(u, Matrix::identity(2, 2));

        let u = cholesky_upper(&SymMatrix::from_diagonal(&[4.0, 9.0]), &tol()).unwrap();
        assert_eq!(u, Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));

        let b =
            SymMatrix::from_upper(&Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let u = cholesky_upper(&b, &tol()).unwrap();
        // direct multiplication check
        let back = u.transpose() * &u;
        assert!((back - b.to_dense()).norm() < 1e-14);
        let expected =
            Matrix::from_row_slice(2, 2, &[2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0, 1.5f64.sqrt()]);
        assert!((u - expected).norm() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let b = SymMatrix::from_diagonal(&[1.0, -1.0]);
        match cholesky_upper(&b, &tol()) {
            Err(Error::NotPositiveDefinite { pivot, index }) => {
                assert_eq!(index, 1);
                assert_eq!(pivot, -1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let tiny = SymMatrix::from_diagonal(&[1.0, 1e-14]);
        assert!(cholesky_upper(&tiny, &tol()).is_err());
        assert!(cholesky_upper(&SymMatrix::zeros(2), &tol()).is_err());
    }

    #[test]
    fn cholesky_min_pivot() {
        let b = SymMatrix::from_diagonal(&[4.0, 0.5, 2.0]);
        let (_, p) = cholesky_with_min_pivot(&b, &tol()).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn triangular_inverse_examples() {
        let i3 = Matrix::identity(3, 3);
        assert_eq!(invert_triangular(&i3).unwrap(), i3);
        let d = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        assert_eq!(
            invert_triangular(&d).unwrap(),
            Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25])
        );
        let unip = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(
            invert_triangular(&unip).unwrap(),
            Matrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0])
        );
        let u = Matrix::from_row_slice(3, 3, &[2.0, -1.0, 3.0, 0.0, 0.5, 4.0, 0.0, 0.0, -3.0]);
        let inv = invert_triangular(&u).unwrap();
        assert!((&u * inv - Matrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn triangular_inverse_errors() {
        let sing = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(
            invert_triangular(&sing),
            Err(Error::SingularMatrix { index: 1 })
        );
        let lower = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        assert!(matches!(
            invert_triangular(&lower),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn nullspace_examples() {
        let z = nullspace(&Matrix::zeros(2, 2), &tol());
        assert_eq!(z.len(), 2);
        assert!((z[0].dot(&z[1])).abs() < 1e-15);
        assert!(z.iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));

        assert!(nullspace(&Matrix::identity(3, 3), &tol()).is_empty());

        let line = nullspace(&Matrix::from_row_slice(1, 2, &[1.0, 1.0]), &tol());
        assert_eq!(line.len(), 1);
        let h = 1.0 / 2f64.sqrt();
        assert!((line[0][0] - h).abs() < 1e-15 && (line[0][1] + h).abs() < 1e-15);
    }

    #[test]
    fn nullspace_floor_absorbs_noise() {
        let noise = Matrix::from_row_slice(2, 2, &[1e-17, 0.0, 0.0, 2e-17]);
        assert!(nullspace(&noise, &tol()).is_empty());
        assert_eq!(nullspace_above(&noise, &tol(), 1.0).len(), 2);
    }

    #[test]
    fn nullspace_rank_deficient_tall() {
        // rank 2, 4 columns
        let a = Matrix::from_row_slice(
            5,
            4,
            &[
                1.0, 2.0, 3.0, 4.0, //
                2.0, 4.0, 6.0, 8.0, //
                0.0, 1.0, 0.0, 1.0, //
                1.0, 3.0, 3.0, 5.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        let t = tol();
        let k = nullspace(&a, &t);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!((&a * v).norm() <= t.rank_tol * a.norm() * 2.0);
        }
    }
}
