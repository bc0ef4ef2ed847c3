//! Principal logarithm of a special orthogonal matrix.
//!
//! An orthogonal `Q` is normal, so it is orthogonally similar to a block
//! diagonal matrix of planar rotations `[[cos φ, sin φ], [−sin φ, cos φ]]`
//! and `±1` scalars; with `det Q = 1` the `−1` scalars come in an even number
//! and are paired into rotations by `π`. The log is `φ·G` on each plane.
//!
//! The planes are not extracted one by one. With `S = (Q+Qᵀ)/2` and
//! `K = (Q−Qᵀ)/2` (which commute), each plane has `S = cos φ·E` and
//! `K = sin φ·G`, hence `log Q = f(S)·K` with `f = φ/sin φ`, where
//! `|sin φ| = ‖K v‖` for an eigenvector `v` of `S`. `f` is smooth except at
//! `c = −1`; eigenvectors of `S` with `c` near `−1` are handled by explicit
//! pairing.

use nalgebra::SymmetricEigen;
use std::f64::consts::PI;

use super::{orthogonality_defect, Matrix, SkewMatrix, Tolerances};
use crate::error::{Error, Result};

/// Eigenvalues of the symmetric part below `−1 + PI_BAND` are treated as
/// rotations by (nearly) `π`.
const PI_BAND: f64 = 1e-10;

/// Principal logarithm (all planar angles in `(−π, π]`) of `q ∈ SO(n)`.
pub fn logm_special_orthogonal(q: &Matrix, tol: &Tolerances) -> Result<SkewMatrix> {
    principal_log(q, tol).map(|(x, _)| x)
}

/// Principal log together with the dimension of the (near) `−1` eigenspace.
/// When that dimension is 4 or more the pairing of `π` planes is not unique.
pub(crate) fn principal_log(q: &Matrix, tol: &Tolerances) -> Result<(SkewMatrix, usize)> {
    super::ensure_square_finite(q)?;
    let defect = orthogonality_defect(q);
    if defect > tol.residual_tol {
        return Err(Error::NotOrthogonal { defect });
    }
    if q.determinant() < 0.0 {
        return Err(Error::WrongComponent);
    }
    let n = q.nrows();
    if n == 1 {
        return Ok((SkewMatrix::zeros(1), 0));
    }

    // polar factor removes the admissible orthogonality defect
    let q = super::polar_factor(q);

    let sym = (&q + q.transpose()) * 0.5;
    let skew = (&q - q.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut pi_count = order
        .iter()
        .take_while(|&&k| eig.eigenvalues[k] < -1.0 + PI_BAND)
        .count();
    if pi_count % 2 == 1 {
        // a rotation plane straddling the band edge
        pi_count += 1;
    }
    let (near_pi, regular) = order.split_at(pi_count);

    let mut log = Matrix::zeros(n, n);

    // f(S)·K restricted to the regular eigenvectors
    if !regular.is_empty() {
        let mut weighted = Matrix::zeros(n, n);
        for &k in regular {
            let v = eig.eigenvectors.column(k);
            let sine = (&skew * v).norm();
            weighted += v * v.transpose() * angle_over_sine(eig.eigenvalues[k], sine);
        }
        log += weighted * &skew;
    }

    // pair the near −1 eigenvectors in the order met
    for pair in near_pi.chunks(2) {
        let a = eig.eigenvectors.column(pair[0]);
        let b = eig.eigenvectors.column(pair[1]);
        let num = (a.transpose() * &q * b)[(0, 0)] - (b.transpose() * &q * a)[(0, 0)];
        let den = (a.transpose() * &q * a)[(0, 0)] + (b.transpose() * &q * b)[(0, 0)];
        let mut phi = num.atan2(den);
        if phi <= -PI + 1e-12 {
            phi = PI;
        }
        log += (a * b.transpose() - b * a.transpose()) * phi;
    }

    Ok((SkewMatrix::skew_part(&log)?, pi_count))
}

/// `φ / sin φ` for the plane with cosine `c` and sine magnitude `s`.
/// Taking `s` from `K` keeps the ratio accurate near `c = −1`.
fn angle_over_sine(c: f64, s: f64) -> f64 {
    if s < 1e-150 {
        1.0
    } else {
        s.atan2(c) / s
    }
}
