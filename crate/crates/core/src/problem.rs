//! Problem model and its canonical (congruence-reduced) form.
//!
//! A [`QcqpProblem`] is `max xᵀAx` subject to `xᵀBᵢx ≤ 1`, with the standing
//! assumption that `B_Σ = Σ Bᵢ` is positive definite. Writing `B_Σ = SᵀS`
//! (Cholesky, `S` upper triangular) every symmetry `P` corresponds to the
//! orthogonal matrix `Q = S·P·S⁻¹`, which is a symmetry of the tilde problem
//! `Ã = S⁻ᵀAS⁻¹`, `B̃ᵢ = S⁻ᵀBᵢS⁻¹`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_with_min_pivot, invert_triangular, symmetrize, Matrix, SymMatrix, Tolerances,
};

/// Relabelling of the constraints: `perm[i] = j` means a symmetry maps
/// constraint `i` onto constraint `j` (`PᵀBᵢP = B_j`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation((0..m).collect())
    }

    pub fn new(targets: Vec<usize>) -> Result<Self> {
        let m = targets.len();
        let mut seen = vec![false; m];
        for &t in &targets {
            if t >= m || seen[t] {
                return Err(Error::InvalidPermutation(format!("{targets:?}")));
            }
            seen[t] = true;
        }
        Ok(Permutation(targets))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &t)| i == t)
    }

    /// Permutation realized by `Q₁·Q₂` when `Q₁` realizes `self` and `Q₂`
    /// realizes `then`: `i ↦ then(self(i))`.
    pub fn then(&self, then: &Permutation) -> Permutation {
        Permutation(self.0.iter().map(|&t| then.0[t]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &t) in self.0.iter().enumerate() {
            inv[t] = i;
        }
        Permutation(inv)
    }

    /// The 0/1 matrix `L` with `L[i][perm(i)] = 1`.
    pub fn to_matrix(&self) -> Matrix {
        let m = self.0.len();
        let mut l = Matrix::zeros(m, m);
        for (i, &t) in self.0.iter().enumerate() {
            l[(i, t)] = 1.0;
        }
        l
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (k, t) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "]")
    }
}

/// Validated problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct QcqpProblem {
    objective: SymMatrix,
    constraints: Vec<SymMatrix>,
    min_pivot: f64,
}

impl QcqpProblem {
    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &SymMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[SymMatrix] {
        &self.constraints
    }

    pub fn constraint_sum(&self) -> SymMatrix {
        let mut sum = SymMatrix::zeros(self.dim());
        for b in &self.constraints {
            sum = sum.add(b);
        }
        sum
    }

    /// Smallest Cholesky pivot of `B_Σ`.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Same constraints, objective replaced by zero (symmetries of the
    /// feasible set described by the constraints alone).
    pub fn without_objective(&self) -> QcqpProblem {
        QcqpProblem {
            objective: SymMatrix::zeros(self.dim()),
            ..self.clone()
        }
    }

    /// `max(1, ‖A‖_F, maxᵢ ‖Bᵢ‖_F)`, the reference magnitude for residuals.
    pub fn scale(&self) -> f64 {
        self.constraints
            .iter()
            .map(SymMatrix::frobenius_norm)
            .fold(self.objective.frobenius_norm().max(1.0), f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.quadratic_form(x)
    }

    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|b| b.quadratic_form(x))
            .collect()
    }

    /// SHA-256 over the dimension, the constraint count and the bit patterns
    /// of every stored entry, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"quadsym-problem-v1");
        h.update((self.dim() as u64).to_le_bytes());
        h.update((self.num_constraints() as u64).to_le_bytes());
        for m in std::iter::once(&self.objective).chain(&self.constraints) {
            for v in m.packed() {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Symmetrizes the inputs and checks that `B_Σ` is positive definite.
pub fn build_problem(a_raw: &Matrix, b_raw: &[Matrix], tol: &Tolerances) -> Result<QcqpProblem> {
    tol.validate()?;
    if b_raw.is_empty() {
        return Err(Error::Dimension(
            "at least one constraint is required".into(),
        ));
    }
    let objective = symmetrize(a_raw)?;
    let n = objective.dim();
    let constraints = b_raw
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let s = symmetrize(b)?;
            if s.dim() != n {
                return Err(Error::Dimension(format!(
                    "constraint {i} is {}x{}, objective is {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut problem = QcqpProblem {
        objective,
        constraints,
        min_pivot: 0.0,
    };
    match cholesky_with_min_pivot(&problem.constraint_sum(), tol) {
        Ok((_, min_pivot)) => problem.min_pivot = min_pivot,
        Err(Error::NotPositiveDefinite { pivot, .. }) => {
            return Err(Error::AssumptionViolated { min_pivot: pivot })
        }
        Err(e) => return Err(e),
    }
    Ok(problem)
}

/// Congruence-reduced problem: `B_Σ = SᵀS` and the tilde matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub s: Matrix,
    pub s_inv: Matrix,
    pub a_tilde: SymMatrix,
    pub b_tilde: Vec<SymMatrix>,
    pub source: QcqpProblem,
    /// `(max Sᵢᵢ / min Sᵢᵢ)²`, a cheap lower bound on the condition number of `B_Σ`.
    pub condition_estimate: f64,
}

impl CanonicalForm {
    pub fn dim(&self) -> usize {
        self.a_tilde.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.b_tilde.len()
    }

    /// `max(1, ‖Ã‖_F, maxᵢ ‖B̃ᵢ‖_F)`.
    pub fn scale(&self) -> f64 {
        self.b_tilde
            .iter()
            .map(SymMatrix::frobenius_norm)
            .fold(self.a_tilde.frobenius_norm().max(1.0), f64::max)
    }

    /// Same form with `Ã` replaced by zero.
    pub fn without_objective(&self) -> CanonicalForm {
        CanonicalForm {
            a_tilde: SymMatrix::zeros(self.dim()),
            source: self.source.without_objective(),
            ..self.clone()
        }
    }

    /// `Q = S·P·S⁻¹`.
    pub fn to_canonical(&self, p: &Matrix) -> Matrix {
        &self.s * p * &self.s_inv
    }
}

fn congruence(m: &SymMatrix, s_inv: &Matrix) -> SymMatrix {
    let dense = s_inv.transpose() * m.to_dense() * s_inv;
    // average the two triangles; exact when `dense` is already symmetric
    symmetrize(&dense).expect("square finite product")
}

pub fn canonicalize(p: &QcqpProblem, tol: &Tolerances) -> Result<CanonicalForm> {
    let (s, _) = cholesky_with_min_pivot(&p.constraint_sum(), tol)?;
    let s_inv = invert_triangular(&s)?;
    let a_tilde = congruence(&p.objective, &s_inv);
    let b_tilde = p
        .constraints
        .iter()
        .map(|b| congruence(b, &s_inv))
        .collect();
    let diag: Vec<f64> = (0..s.nrows()).map(|i| s[(i, i)]).collect();
    let hi = diag.iter().copied().fold(0.0, f64::max);
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CanonicalForm {
        s,
        s_inv,
        a_tilde,
        b_tilde,
        source: p.clone(),
        condition_estimate: (hi / lo).powi(2),
    })
}

/// `P = S⁻¹·Q·S`, the symmetry in the original coordinates.
pub fn back_transform(q: &Matrix, c: &CanonicalForm) -> Matrix {
    &c.s_inv * q * &c.s
}

/// `‖PᵀAP − A‖_F + Σᵢ ‖PᵀBᵢP − B_perm(i)‖_F`.
pub fn invariance_residual(p_mat: &Matrix, prob: &QcqpProblem, perm: &Permutation) -> f64 {
    assert_eq!(perm.len(), prob.num_constraints());
    let pt = p_mat.transpose();
    let a = prob.objective.to_dense();
    let mut r = (&pt * &a * p_mat - &a).norm();
    let dense: Vec<Matrix> = prob.constraints.iter().map(SymMatrix::to_dense).collect();
    for (i, b) in dense.iter().enumerate() {
        r += (&pt * b * p_mat - &dense[perm.apply(i)]).norm();
    }
    r
}
