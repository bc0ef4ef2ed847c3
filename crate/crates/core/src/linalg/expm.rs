use super::{Matrix, SkewMatrix};

const MAX_TERMS: usize = 40;

/// Exponential of a skew-symmetric matrix; the result lies in SO(n).
pub fn expm_skew(x: &SkewMatrix) -> Matrix {
    expm_dense(&x.to_dense())
}

/// Scaling and squaring on the truncated Taylor series: scale until
/// `‖A/2^k‖_F ≤ 0.5`, sum the series until terms drop below machine
/// precision, then square `k` times.
pub(crate) fn expm_dense(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let norm = a.norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 0.5f64.powi(squarings);

    let mut sum = Matrix::identity(n, n);
    let mut term = Matrix::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.norm() <= f64::EPSILON * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
