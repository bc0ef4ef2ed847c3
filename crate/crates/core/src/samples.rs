//! Small ready-made problems used by the examples and tests.

use crate::linalg::{Matrix, Tolerances};
use crate::problem::{build_problem, QcqpProblem};

/// Two crossed ellipses in the plane, objective `diag(1, 0.8)`.
///
/// `B₁ = [[0.5, 2], [2, 0.5]]`, `B₂ = [[0.5, −2], [−2, 0.5]]`, `B₁ + B₂ = E`.
/// The continuous symmetry group is trivial; with the objective the full
/// group has four elements, without it eight.
pub fn crossed_ellipses() -> QcqpProblem {
    build_problem(
        &Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.8]),
        &[
            Matrix::from_row_slice(2, 2, &[0.5, 2.0, 2.0, 0.5]),
            Matrix::from_row_slice(2, 2, &[0.5, -2.0, -2.0, 0.5]),
        ],
        &Tolerances::default(),
    )
    .expect("valid problem")
}

/// Three-dimensional problem with a one-parameter rotation symmetry about
/// the third axis: `A = E`, `B₁ = diag(2, 2, 0)`, `B₂ = diag(−1, −1, 1)`.
pub fn axial_rotation() -> QcqpProblem {
    build_problem(
        &Matrix::identity(3, 3),
        &[diag(&[2.0, 2.0, 0.0]), diag(&[-1.0, -1.0, 1.0])],
        &Tolerances::default(),
    )
    .expect("valid problem")
}

/// Dense diagonal matrix.
pub fn diag(entries: &[f64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries))
}

/// Plane rotation `[[cos a, sin a], [−sin a, cos a]] = exp(a·G)` with
/// `G = [[0, 1], [−1, 0]]`.
pub fn rotation2(a: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a.cos(), a.sin(), -a.sin(), a.cos()])
}

/// The problem with every matrix replaced by `TᵀMT`.
pub fn congruent(p: &QcqpProblem, t: &Matrix) -> QcqpProblem {
    let tt = t.transpose();
    let a = &tt * p.objective().to_dense() * t;
    let bs: Vec<Matrix> = p
        .constraints()
        .iter()
        .map(|b| &tt * b.to_dense() * t)
        .collect();
    build_problem(&a, &bs, &Tolerances::default()).expect("congruence keeps B_Σ positive definite")
}
