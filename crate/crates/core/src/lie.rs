//! Lie algebra of the continuous symmetry subgroup.
//!
//! A skew-symmetric `X` generates symmetries `exp(tX)` for every `t` iff it
//! commutes with `Ã` and every `B̃ᵢ`. Expanding `X = Σ aₖGₖ` over the unit
//! basis of skew matrices turns this into a homogeneous linear system for the
//! coefficients; its kernel is the Lie algebra.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{
    expm_skew, nullspace_above, orthogonality_defect, principal_log, skew_basis, skew_dim, Matrix,
    SkewMatrix, Tolerances,
};
use crate::problem::CanonicalForm;

/// Coefficient matrix of the commutation conditions.
///
/// Column `k` holds the upper triangle (diagonal included) of `[Ã, Gₖ]`
/// followed by those of `[B̃ᵢ, Gₖ]`; the commutator of a symmetric and a
/// skew matrix is symmetric, so the lower triangle carries no information.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutantSystem {
    pub matrix: Matrix,
}

pub fn build_commutant_system(c: &CanonicalForm) -> CommutantSystem {
    let n = c.dim();
    let tri = n * (n + 1) / 2;
    let mats: Vec<Matrix> = std::iter::once(&c.a_tilde)
        .chain(&c.b_tilde)
        .map(|m| m.to_dense())
        .collect();
    let mut matrix = Matrix::zeros(mats.len() * tri, skew_dim(n));
    for (k, g) in skew_basis(n).iter().enumerate() {
        let g = g.to_dense();
        let mut row = 0;
        for m in &mats {
            let comm = m * &g - &g * m;
            for i in 0..n {
                for j in i..n {
                    matrix[(row, k)] = comm[(i, j)];
                    row += 1;
                }
            }
        }
    }
    CommutantSystem { matrix }
}

/// Basis of the Lie algebra of the continuous symmetry subgroup.
///
/// Generators are orthonormal in skew-basis coordinates, i.e. under
/// `⟨X, Y⟩ = ½·tr(XᵀY)`. With this normalization a generator made of a single
/// unit pair is itself a basis element, so its coefficient is a rotation angle.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBasis {
    n: usize,
    generators: Vec<SkewMatrix>,
}

impl LieBasis {
    pub fn trivial(n: usize) -> Self {
        LieBasis {
            n,
            generators: Vec::new(),
        }
    }

    /// Orthonormalizes (modified Gram–Schmidt) the given generators, dropping
    /// numerically dependent ones.
    pub fn from_generators(n: usize, generators: &[SkewMatrix]) -> Result<Self> {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for g in generators {
            if g.dim() != n {
                return Err(Error::Dimension(format!(
                    "generator of size {} in a basis of size {n}",
                    g.dim()
                )));
            }
            let mut v = DVector::from_row_slice(g.coords());
            let original = v.norm();
            for b in &basis {
                let d = b.dot(&v);
                v.axpy(-d, b, 1.0);
            }
            let norm = v.norm();
            if norm > 1e-10 * original.max(1e-300) && norm > 0.0 {
                basis.push(v / norm);
            }
        }
        let generators = basis
            .into_iter()
            .map(|v| SkewMatrix::from_coords(n, v.iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(LieBasis { n, generators })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of generators `K`.
    pub fn coeff_dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[SkewMatrix] {
        &self.generators
    }

    /// `Σ coeffs[k]·Ĝₖ`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<SkewMatrix> {
        if coeffs.len() != self.generators.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} generators",
                coeffs.len(),
                self.generators.len()
            )));
        }
        let mut x = SkewMatrix::zeros(self.n);
        for (g, &c) in self.generators.iter().zip(coeffs) {
            x = x.add(&g.scale(c));
        }
        Ok(x)
    }

    /// Coefficients of the orthogonal projection of `x` onto the algebra.
    pub fn coordinates(&self, x: &SkewMatrix) -> Vec<f64> {
        self.generators
            .iter()
            .map(|g| g.coords().iter().zip(x.coords()).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn project(&self, x: &SkewMatrix) -> SkewMatrix {
        self.combine(&self.coordinates(x))
            .expect("coordinate count matches")
    }
}

/// Kernel of the commutant system, as skew matrices. Singular values up to
/// `rank_tol · max(σ_max, scale)` count as zero.
pub fn lie_basis(c: &CanonicalForm, tol: &Tolerances) -> LieBasis {
    let n = c.dim();
    let system = build_commutant_system(c);
    let generators = nullspace_above(&system.matrix, tol, c.scale())
        .into_iter()
        .map(|v| SkewMatrix::from_coords(n, v.iter().copied().collect()).expect("column count"))
        .collect();
    LieBasis { n, generators }
}

/// `exp(Σ coeffs[k]·Ĝₖ)`.
pub fn sample_continuous(basis: &LieBasis, coeffs: &[f64]) -> Result<Matrix> {
    Ok(expm_skew(&basis.combine(coeffs)?))
}

/// `‖ÃX − XÃ‖_F + Σᵢ ‖B̃ᵢX − XB̃ᵢ‖_F`.
pub fn commutant_residual(x: &Matrix, c: &CanonicalForm) -> f64 {
    std::iter::once(&c.a_tilde)
        .chain(&c.b_tilde)
        .map(|m| {
            let m = m.to_dense();
            (&m * x - x * &m).norm()
        })
        .sum()
}

/// Whether `q` lies in the connected component of the identity of the
/// group generated by `basis`.
///
/// The principal log of `q` is projected onto the algebra; `q` belongs to the
/// component when the log lies in the algebra and the projection
/// re-exponentiates to `q`. When the `−1` eigenspace of `q` has dimension four
/// or more, the principal log is not unique and a direct fit of the
/// coefficients decides instead.
pub fn in_identity_component(q: &Matrix, basis: &LieBasis, tol: &Tolerances) -> Result<bool> {
    if q.nrows() != basis.dim() || q.ncols() != basis.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix against a basis of size {}",
            q.nrows(),
            q.ncols(),
            basis.dim()
        )));
    }
    let defect = orthogonality_defect(q);
    if defect > tol.residual_tol {
        return Err(Error::NotOrthogonal { defect });
    }
    if q.determinant() <= 0.0 {
        return Ok(false);
    }
    let (x, pi_dim) = principal_log(q, tol)?;
    let proj = basis.project(&x);
    let remainder = x.add(&proj.scale(-1.0)).frobenius_norm();
    if remainder <= tol.residual_tol * x.frobenius_norm().max(1.0)
        && (expm_skew(&proj) - q).norm() <= tol.residual_tol
    {
        return Ok(true);
    }
    if pi_dim >= 4 && basis.coeff_dim() > 0 {
        let start = basis.coordinates(&x);
        let residual = |c: &[f64]| -> DVector<f64> {
            let e = expm_skew(&basis.combine(c).expect("length")) - q;
            DVector::from_iterator(e.len(), e.iter().copied())
        };
        let (_, r) = multistart_fit(&start, 8, 0x0051_ab1e, &residual);
        return Ok(r <= tol.residual_tol);
    }
    Ok(false)
}

/// Least-squares fit from `start` and from `extra_starts` random points in
/// `[−π, π]ᴷ`; returns the best coefficients and residual norm.
pub(crate) fn multistart_fit<F>(
    start: &[f64],
    extra_starts: usize,
    seed: u64,
    residual: &F,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = levenberg_marquardt(start.to_vec(), residual, 200);
    for _ in 0..extra_starts {
        if best.1 < 1e-14 {
            break;
        }
        let s: Vec<f64> = (0..start.len())
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        let cand = levenberg_marquardt(s, residual, 200);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

/// Levenberg–Marquardt with a central-difference Jacobian.
pub(crate) fn levenberg_marquardt<F>(
    mut c: Vec<f64>,
    residual: &F,
    max_iter: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let k = c.len();
    let mut r = residual(&c);
    let mut cost = r.norm_squared();
    if k == 0 {
        return (c, cost.sqrt());
    }
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if cost.sqrt() < 1e-15 {
            break;
        }
        let mut jac = Matrix::zeros(r.len(), k);
        for j in 0..k {
            let h = 1e-6 * c[j].abs().max(1.0);
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[j] += h;
            cm[j] -= h;
            let col = (residual(&cp) - residual(&cm)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..20 {
            let mut lhs = jtj.clone();
            for d in 0..k {
                lhs[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = lhs.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
            let rt = residual(&trial);
            let ct = rt.norm_squared();
            if ct < cost {
                let small_step =
                    step.norm() <= 1e-15 * (1.0 + c.iter().map(|v| v * v).sum::<f64>().sqrt());
                c = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-12);
                improved = !small_step;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (c, cost.sqrt())
}
