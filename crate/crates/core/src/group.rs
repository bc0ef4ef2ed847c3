//! Full symmetry report in original coordinates.

use serde::{Deserialize, Serialize};

use crate::discrete::{
    commutation_residual, search_cosets, DetSign, DiscreteCoset, SearchOptions, SearchStatistics,
};
use crate::error::Result;
use crate::lie::{in_identity_component, lie_basis, LieBasis};
use crate::linalg::{orthogonality_defect, rows, Matrix, SkewMatrix, Tolerances};
use crate::problem::{
    back_transform, canonicalize, invariance_residual, CanonicalForm, Permutation, QcqpProblem,
};

/// A coset representative in both coordinate systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCoset {
    pub id: usize,
    #[serde(flatten)]
    pub canonical: DiscreteCoset,
    /// `P = S⁻¹·Q·S`.
    #[serde(with = "rows")]
    pub original: Matrix,
    /// `invariance_residual` of `original`.
    pub original_residual: f64,
}

impl ReportCoset {
    pub fn permutation(&self) -> &Permutation {
        &self.canonical.permutation
    }

    pub fn det_sign(&self) -> DetSign {
        self.canonical.det_sign
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub problem_digest: String,
    pub n: usize,
    pub m: usize,
    pub constraints_only: bool,
    pub lie_dim: usize,
    /// Orthonormal generators in canonical coordinates.
    #[serde(with = "rows::list")]
    pub lie_generators: Vec<Matrix>,
    /// `S⁻¹·Ĝ·S` for every generator.
    #[serde(with = "rows::list")]
    pub lie_generators_original: Vec<Matrix>,
    #[serde(with = "rows")]
    pub s: Matrix,
    #[serde(with = "rows")]
    pub s_inv: Matrix,
    pub cosets: Vec<ReportCoset>,
    pub tolerances: Tolerances,
    pub search: SearchOptions,
    pub statistics: SearchStatistics,
}

/// Outcome of re-checking one coset against the problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetCheck {
    pub id: usize,
    pub invariance_residual: f64,
    pub penalty_residual: f64,
    /// `‖Q − S·P·S⁻¹‖_F`.
    pub conjugation_residual: f64,
    /// `|det(P)² − 1|`.
    pub det_defect: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub digest_matches: bool,
    pub identity_present: bool,
    pub lie_dim_consistent: bool,
    pub cosets: Vec<CosetCheck>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.digest_matches
            && self.identity_present
            && self.lie_dim_consistent
            && self.cosets.iter().all(|c| c.passed)
    }
}

impl SymmetryReport {
    pub fn lie_basis(&self) -> LieBasis {
        let gens: Vec<SkewMatrix> = self
            .lie_generators
            .iter()
            .filter_map(|g| SkewMatrix::skew_part(g).ok())
            .collect();
        LieBasis::from_generators(self.n, &gens).unwrap_or_else(|_| LieBasis::trivial(self.n))
    }

    pub fn det_count(&self, sign: DetSign) -> usize {
        self.cosets.iter().filter(|c| c.det_sign() == sign).count()
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "continuous dim K={}; det+1 cosets: {}; det-1 cosets: {}",
            self.lie_dim,
            self.det_count(DetSign::Positive),
            self.det_count(DetSign::Negative)
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn matches(&self, problem: &QcqpProblem) -> bool {
        self.problem_digest == problem.digest()
    }

    /// Re-checks every stored representative against `problem`.
    pub fn verify(&self, problem: &QcqpProblem) -> Result<Verification> {
        let data = if self.constraints_only {
            problem.without_objective()
        } else {
            problem.clone()
        };
        let c = canonicalize(&data, &self.tolerances)?;
        let basis = self.lie_basis();
        let tol = self.tolerances.residual_tol;
        let p_limit = tol * data.scale();
        let q_limit = tol * c.scale();

        let cosets = self
            .cosets
            .iter()
            .map(|rc| {
                let perm = rc.permutation();
                let q = &rc.canonical.representative;
                let invariance = invariance_residual(&rc.original, &data, perm);
                let penalty = penalty_residual(q, &c, perm);
                let conjugation = (q - c.to_canonical(&rc.original)).norm();
                let det = rc.original.determinant();
                let det_defect = (det * det - 1.0).abs();
                CosetCheck {
                    id: rc.id,
                    invariance_residual: invariance,
                    penalty_residual: penalty,
                    conjugation_residual: conjugation,
                    det_defect,
                    passed: invariance <= p_limit
                        && penalty <= q_limit
                        && conjugation <= q_limit
                        && det_defect <= 1e-8
                        && DetSign::of(q) == rc.det_sign(),
                }
            })
            .collect();

        let identity_present = self.cosets.iter().any(|rc| {
            rc.permutation().is_identity()
                && in_identity_component(&rc.canonical.representative, &basis, &self.tolerances)
                    .unwrap_or(false)
        });
        Ok(Verification {
            digest_matches: self.matches(problem),
            identity_present,
            lie_dim_consistent: self.lie_dim == self.lie_generators.len()
                && self.lie_dim == self.lie_generators_original.len()
                && basis.coeff_dim() == self.lie_dim,
            cosets,
        })
    }
}

/// `‖ÃQ − QÃ‖_F + Σᵢ ‖B̃ᵢQ − Q·B̃_{perm(i)}‖_F + ‖QQᵀ − E‖_F`.
pub fn penalty_residual(q: &Matrix, c: &CanonicalForm, perm: &Permutation) -> f64 {
    let n = q.nrows();
    commutation_residual(q, c, perm) + (q * q.transpose() - Matrix::identity(n, n)).norm()
}

/// Computes the symmetry group of `p`. With `constraints_only` the objective
/// is replaced by zero, which leaves only the symmetries of the feasible set.
pub fn analyze(
    p: &QcqpProblem,
    opts: &SearchOptions,
    tol: &Tolerances,
    constraints_only: bool,
) -> Result<SymmetryReport> {
    tol.validate()?;
    opts.validate()?;
    let data = if constraints_only {
        p.without_objective()
    } else {
        p.clone()
    };
    let c = canonicalize(&data, tol)?;
    let basis = lie_basis(&c, tol);
    let (found, statistics) = search_cosets(&c, &basis, opts, tol)?;

    let lie_generators: Vec<Matrix> = basis.generators().iter().map(|g| g.to_dense()).collect();
    let lie_generators_original = lie_generators
        .iter()
        .map(|g| back_transform(g, &c))
        .collect();
    let cosets = found
        .into_iter()
        .enumerate()
        .map(|(id, canonical)| {
            let original = back_transform(&canonical.representative, &c);
            let original_residual = invariance_residual(&original, &data, &canonical.permutation);
            ReportCoset {
                id,
                canonical,
                original,
                original_residual,
            }
        })
        .collect();

    Ok(SymmetryReport {
        problem_digest: p.digest(),
        n: p.dim(),
        m: p.num_constraints(),
        constraints_only,
        lie_dim: basis.coeff_dim(),
        lie_generators,
        lie_generators_original,
        s: c.s.clone(),
        s_inv: c.s_inv.clone(),
        cosets,
        tolerances: *tol,
        search: opts.clone(),
        statistics,
    })
}

/// Whether `q` (canonical coordinates) lies in the coset of `rc`.
pub(crate) fn in_coset(q: &Matrix, rc: &ReportCoset, basis: &LieBasis, tol: &Tolerances) -> bool {
    if orthogonality_defect(q) > tol.residual_tol {
        return false;
    }
    let rel = q * rc.canonical.representative.transpose();
    in_identity_component(&rel, basis, tol).unwrap_or(false)
}

/// The reported coset containing `q` with permutation `perm`, if any.
pub fn locate_coset<'a>(
    report: &'a SymmetryReport,
    q: &Matrix,
    perm: &Permutation,
) -> Option<&'a ReportCoset> {
    let basis = report.lie_basis();
    report
        .cosets
        .iter()
        .filter(|rc| rc.permutation() == perm)
        .find(|rc| in_coset(q, rc, &basis, &report.tolerances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{axial_rotation, crossed_ellipses, diag, rotation2};
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn run(p: &QcqpProblem, constraints_only: bool) -> SymmetryReport {
        analyze(p, &SearchOptions::default(), &tol(), constraints_only).unwrap()
    }

    #[test]
    fn crossed_ellipses_reports() {
        let p = crossed_ellipses();
        let r = run(&p, false);
        assert_eq!(r.lie_dim, 0);
        assert_eq!(r.cosets.len(), 4);
        assert_eq!(
            r.summary(),
            "continuous dim K=0; det+1 cosets: 2; det-1 cosets: 2"
        );
        assert!(r.verify(&p).unwrap().passed());

        let r = run(&p, true);
        assert_eq!(r.lie_dim, 0);
        assert_eq!(r.cosets.len(), 8);
        assert_eq!(r.problem_digest, p.digest());
        assert!(r.verify(&p).unwrap().passed());
    }

    #[test]
    fn axial_report() {
        let p = axial_rotation();
        let r = run(&p, false);
        assert_eq!(r.lie_dim, 1);
        assert_eq!(r.det_count(DetSign::Positive), 2);
        assert!(r.verify(&p).unwrap().passed());
        // S = diag(1, 1, 1) here, so original and canonical generators agree
        assert!((&r.lie_generators[0] - &r.lie_generators_original[0]).norm() < 1e-15);

        let only = run(&p, true);
        assert_eq!(only.lie_dim, r.lie_dim);
        assert_eq!(only.cosets.len(), r.cosets.len());
    }

    #[test]
    fn penalty_examples() {
        let c = canonicalize(&crossed_ellipses(), &tol()).unwrap();
        let id2 = Permutation::identity(2);
        assert_eq!(penalty_residual(&Matrix::identity(2, 2), &c, &id2), 0.0);
        assert!(penalty_residual(&rotation2(PI / 4.0), &c, &id2) > 0.1);

        let c = canonicalize(&axial_rotation(), &tol()).unwrap();
        assert_eq!(penalty_residual(&diag(&[1.0, -1.0, -1.0]), &c, &id2), 0.0);
    }

    #[test]
    fn json_round_trip_keeps_verification() {
        let p = axial_rotation();
        let r = run(&p, false);
        let back = SymmetryReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.verify(&p).unwrap(), r.verify(&p).unwrap());
    }

    #[test]
    fn stale_report_is_detected() {
        let r = run(&crossed_ellipses(), false);
        assert!(!r.matches(&axial_rotation()));
        assert!(r.matches(&crossed_ellipses()));
    }

    #[test]
    fn locating_products() {
        let r = run(&crossed_ellipses(), true);
        let g = rotation2(PI / 2.0);
        let rc = locate_coset(&r, &g, &Permutation::new(vec![1, 0]).unwrap()).unwrap();
        assert!((&rc.canonical.representative - &g).norm() < 1e-8);
        assert!(locate_coset(&r, &g, &Permutation::identity(2)).is_none());
    }
}
