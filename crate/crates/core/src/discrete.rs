//! Discrete part of the symmetry group: one representative per connected
//! component, over every admissible relabelling of the constraints and both
//! determinant signs.
//!
//! For a fixed permutation the invariance conditions are linear in `Q`, so all
//! candidates live in a subspace `V`. Orthogonal points of `V` are found by
//! multi-start descent on `‖QQᵀ − E‖²` inside `V`, finished by the polar
//! factor. Components reachable only with `det Q = −1` are searched through
//! `Q = diag(−1, 1, …, 1)·Q′` with `Q′` started on `SO(n)`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{in_identity_component, LieBasis};
use crate::linalg::{
    first_axis_reflection, lex_cmp, nullspace_above, orthogonality_defect, polar_factor, rows,
    Matrix, Tolerances,
};
use crate::problem::{CanonicalForm, Permutation};

const MAX_DESCENT_ITERATIONS: usize = 10_000;
const GRADIENT_STOP: f64 = 1e-12;
/// Below this orthogonality defect the polar factor takes over from descent.
const POLAR_HANDOFF: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum DetSign {
    Positive,
    Negative,
}

impl DetSign {
    pub fn of(m: &Matrix) -> DetSign {
        if m.determinant() < 0.0 {
            DetSign::Negative
        } else {
            DetSign::Positive
        }
    }

    pub fn value(self) -> f64 {
        match self {
            DetSign::Positive => 1.0,
            DetSign::Negative => -1.0,
        }
    }
}

impl TryFrom<i8> for DetSign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(DetSign::Positive),
            -1 => Ok(DetSign::Negative),
            _ => Err(format!("determinant sign must be 1 or -1, got {v}")),
        }
    }
}

impl From<DetSign> for i8 {
    fn from(d: DetSign) -> i8 {
        match d {
            DetSign::Positive => 1,
            DetSign::Negative => -1,
        }
    }
}

impl std::fmt::Display for DetSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DetSign::Positive => "+1",
            DetSign::Negative => "-1",
        })
    }
}

/// Representative of one connected component of the symmetry group, in
/// canonical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCoset {
    #[serde(with = "rows")]
    pub representative: Matrix,
    pub permutation: Permutation,
    pub det_sign: DetSign,
    pub residual: f64,
}

impl DiscreteCoset {
    /// The identity coset of a problem with `m` constraints in dimension `n`.
    pub fn identity(n: usize, m: usize) -> Self {
        DiscreteCoset {
            representative: Matrix::identity(n, n),
            permutation: Permutation::identity(m),
            det_sign: DetSign::Positive,
            residual: 0.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.is_identity() && self.det_sign == DetSign::Positive && self.residual == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub max_permutations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub min_coset_separation: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_permutations: 40_320,
            restarts: 64,
            seed: 0x5eed,
            min_coset_separation: 1e-6,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_permutations == 0 {
            return Err(Error::InvalidSearchOption {
                name: "max_permutations",
                value: "0".into(),
            });
        }
        if self.restarts == 0 {
            return Err(Error::InvalidSearchOption {
                name: "restarts",
                value: "0".into(),
            });
        }
        let sep = self.min_coset_separation;
        if !(sep.is_finite() && sep > 0.0) {
            return Err(Error::InvalidSearchOption {
                name: "min_coset_separation",
                value: sep.to_string(),
            });
        }
        Ok(())
    }
}

/// Search effort spent on one (permutation, determinant) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    pub permutation: Permutation,
    pub det_sign: DetSign,
    /// Dimension of the linear solution space.
    pub space_dim: usize,
    pub restarts: usize,
    /// Starts ending on an orthogonal matrix.
    pub converged: usize,
    /// Starts ending on a verified symmetry.
    pub accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStatistics {
    pub admissible_permutations: usize,
    pub pairs: Vec<PairStatistics>,
    /// Index pairs of reported cosets whose representatives differ only by
    /// the continuous subgroup while realizing different permutations.
    pub cross_permutation_duplicates: Vec<(usize, usize)>,
}

/// Sum of `‖ÃQ − QÃ‖_F` and `‖B̃ᵢQ − Q·B̃_{perm(i)}‖_F`.
pub fn commutation_residual(q: &Matrix, c: &CanonicalForm, perm: &Permutation) -> f64 {
    let a = c.a_tilde.to_dense();
    let b: Vec<Matrix> = c.b_tilde.iter().map(|m| m.to_dense()).collect();
    let mut r = (&a * q - q * &a).norm();
    for (i, bi) in b.iter().enumerate() {
        r += (bi * q - q * &b[perm.apply(i)]).norm();
    }
    r
}

/// Constraint relabellings compatible with the spectra of the `B̃ᵢ`, in
/// lexicographic order.
pub fn admissible_permutations(
    c: &CanonicalForm,
    tol: &Tolerances,
    max_permutations: usize,
) -> Result<Vec<Permutation>> {
    let m = c.num_constraints();
    let spectra: Vec<Vec<f64>> = c.b_tilde.iter().map(|b| b.sorted_eigenvalues()).collect();
    let norms: Vec<f64> = c.b_tilde.iter().map(|b| b.frobenius_norm()).collect();
    let compatible = |i: usize, j: usize| {
        let threshold = tol.rank_tol * norms[i].max(norms[j]).max(1.0);
        spectra[i]
            .iter()
            .zip(&spectra[j])
            .all(|(x, y)| (x - y).abs() <= threshold)
    };
    let allowed: Vec<Vec<usize>> = (0..m)
        .map(|i| (0..m).filter(|&j| compatible(i, j)).collect())
        .collect();

    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    let mut used = vec![false; m];
    enumerate(
        &allowed,
        &mut current,
        &mut used,
        &mut out,
        max_permutations,
    )?;
    Ok(out)
}

fn enumerate(
    allowed: &[Vec<usize>],
    current: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Permutation>,
    cap: usize,
) -> Result<()> {
    let i = current.len();
    if i == allowed.len() {
        if out.len() == cap {
            return Err(Error::SearchBudgetExceeded {
                count: cap + 1,
                cap,
            });
        }
        out.push(Permutation::new(current.clone())?);
        return Ok(());
    }
    for &j in &allowed[i] {
        if !used[j] {
            used[j] = true;
            current.push(j);
            enumerate(allowed, current, used, out, cap)?;
            current.pop();
            used[j] = false;
        }
    }
    Ok(())
}

/// Orthonormal (Frobenius) basis of the matrices `Q` with `ÃQ = QÃ` and
/// `B̃ᵢQ = Q·B̃_{perm(i)}` for all `i`. Singular values up to
/// `rank_tol · max(σ_max, scale)` count as zero.
pub fn coset_solution_space(
    c: &CanonicalForm,
    perm: &Permutation,
    tol: &Tolerances,
) -> Vec<Matrix> {
    let n = c.dim();
    let a = c.a_tilde.to_dense();
    let b: Vec<Matrix> = c.b_tilde.iter().map(|m| m.to_dense()).collect();
    let blocks = 1 + b.len();
    let mut system = Matrix::zeros(blocks * n * n, n * n);
    for k in 0..n * n {
        let mut unit = Matrix::zeros(n, n);
        unit[(k / n, k % n)] = 1.0;
        let mut push = |block: usize, m: Matrix| {
            for (e, v) in m.iter().enumerate() {
                system[(block * n * n + e, k)] = *v;
            }
        };
        push(0, &a * &unit - &unit * &a);
        for (i, bi) in b.iter().enumerate() {
            push(1 + i, bi * &unit - &unit * &b[perm.apply(i)]);
        }
    }
    nullspace_above(&system, tol, c.scale())
        .into_iter()
        .map(|v| Matrix::from_row_iterator(n, n, v.iter().copied()))
        .collect()
}

/// Representatives of every component found, in canonical coordinates.
pub fn find_cosets(
    c: &CanonicalForm,
    basis: &LieBasis,
    opts: &SearchOptions,
    tol: &Tolerances,
) -> Result<Vec<DiscreteCoset>> {
    search_cosets(c, basis, opts, tol).map(|(cosets, _)| cosets)
}

/// [`find_cosets`] together with the search statistics.
pub fn search_cosets(
    c: &CanonicalForm,
    basis: &LieBasis,
    opts: &SearchOptions,
    tol: &Tolerances,
) -> Result<(Vec<DiscreteCoset>, SearchStatistics)> {
    opts.validate()?;
    tol.validate()?;
    let n = c.dim();
    let m = c.num_constraints();
    let perms = admissible_permutations(c, tol, opts.max_permutations)?;

    let tasks: Vec<(Permutation, DetSign)> = perms
        .iter()
        .flat_map(|p| {
            [
                (p.clone(), DetSign::Positive),
                (p.clone(), DetSign::Negative),
            ]
        })
        .collect();

    let results: Vec<(Vec<DiscreteCoset>, PairStatistics)> = tasks
        .par_iter()
        .enumerate()
        .map(|(index, (perm, det))| search_pair(c, perm, *det, index as u64, opts, tol))
        .collect();

    let mut candidates = vec![DiscreteCoset::identity(n, m)];
    let mut pairs = Vec::with_capacity(results.len());
    for (found, stats) in results {
        candidates.extend(found);
        pairs.push(stats);
    }

    let mut cosets = merge_and_dedup(candidates, basis, tol, opts.min_coset_separation);
    for k in &mut cosets {
        k.representative = tidy_representative(&k.representative, basis, opts.seed);
        k.residual = commutation_residual(&k.representative, c, &k.permutation);
    }
    sort_for_output(&mut cosets, basis, tol);
    let cross_permutation_duplicates = cross_duplicates(&cosets, basis, tol);
    let stats = SearchStatistics {
        admissible_permutations: perms.len(),
        pairs,
        cross_permutation_duplicates,
    };
    Ok((cosets, stats))
}

fn search_pair(
    c: &CanonicalForm,
    perm: &Permutation,
    det: DetSign,
    index: u64,
    opts: &SearchOptions,
    tol: &Tolerances,
) -> (Vec<DiscreteCoset>, PairStatistics) {
    let n = c.dim();
    let space = coset_solution_space(c, perm, tol);
    let mut stats = PairStatistics {
        permutation: perm.clone(),
        det_sign: det,
        space_dim: space.len(),
        restarts: opts.restarts,
        converged: 0,
        accepted: 0,
    };
    if space.is_empty() {
        stats.restarts = 0;
        return (Vec::new(), stats);
    }

    // search for Q' with Q = D·Q'; D = E for the positive component
    let d = match det {
        DetSign::Positive => Matrix::identity(n, n),
        DetSign::Negative => first_axis_reflection(n),
    };
    let shifted: Vec<Matrix> = space.iter().map(|v| &d * v).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index);

    let limit = tol.residual_tol * c.scale();
    let mut found = Vec::new();
    for _ in 0..opts.restarts {
        let start = project(&haar_rotation(n, &mut rng), &shifted);
        let q_prime = orthogonalize_in(&start, &shifted);
        let q = &d * q_prime;
        if orthogonality_defect(&q) > tol.residual_tol {
            continue;
        }
        stats.converged += 1;
        let residual = commutation_residual(&q, c, perm);
        if residual <= limit {
            stats.accepted += 1;
            found.push(DiscreteCoset {
                det_sign: DetSign::of(&q),
                representative: q,
                permutation: perm.clone(),
                residual,
            });
        }
    }
    (found, stats)
}

/// Uniformly distributed element of `SO(n)`.
pub(crate) fn haar_rotation(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

fn coefficients(x: &Matrix, space: &[Matrix]) -> DVector<f64> {
    DVector::from_iterator(space.len(), space.iter().map(|v| v.dot(x)))
}

fn combine(y: &DVector<f64>, space: &[Matrix]) -> Matrix {
    let n = space[0].nrows();
    space
        .iter()
        .zip(y.iter())
        .fold(Matrix::zeros(n, n), |acc, (v, c)| acc + v * *c)
}

fn project(x: &Matrix, space: &[Matrix]) -> Matrix {
    combine(&coefficients(x, space), space)
}

/// Descends `‖QQᵀ − E‖²_F` over the span of `space` from `start`, then
/// replaces the result by its polar factor projected back into the span.
fn orthogonalize_in(start: &Matrix, space: &[Matrix]) -> Matrix {
    let n = start.nrows();
    let eye = Matrix::identity(n, n);
    let objective = |q: &Matrix| (q * q.transpose() - &eye).norm_squared();

    let mut y = coefficients(start, space);
    let mut q = combine(&y, space);
    let mut f = objective(&q);
    let mut step = 1.0;
    for _ in 0..MAX_DESCENT_ITERATIONS {
        if f.sqrt() <= POLAR_HANDOFF {
            break;
        }
        let grad_full = (&q * q.transpose() - &eye) * &q * 4.0;
        let g = coefficients(&grad_full, space);
        let g2 = g.norm_squared();
        if g2.sqrt() <= GRADIENT_STOP {
            break;
        }
        step *= 2.0;
        let mut moved = false;
        while step > 1e-20 {
            let trial_y = &y - &g * step;
            let trial_q = combine(&trial_y, space);
            let trial_f = objective(&trial_q);
            if trial_f <= f - 1e-4 * step * g2 {
                y = trial_y;
                q = trial_q;
                f = trial_f;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }

    // the polar factor of an element of the span stays in the span up to
    // rounding; a second pass removes the rounding again
    let mut out = polar_factor(&q);
    for _ in 0..2 {
        out = polar_factor(&project(&out, space));
    }
    out
}

fn order_key(a: &DiscreteCoset, b: &DiscreteCoset) -> std::cmp::Ordering {
    a.permutation
        .cmp(&b.permutation)
        .then(a.det_sign.cmp(&b.det_sign))
        .then(a.residual.total_cmp(&b.residual))
        .then_with(|| is_eye(&b.representative).cmp(&is_eye(&a.representative)))
        .then_with(|| lex_cmp(&a.representative, &b.representative))
}

fn is_eye(m: &Matrix) -> bool {
    m.is_identity(0.0)
}

fn same_component(
    a: &DiscreteCoset,
    b: &DiscreteCoset,
    basis: &LieBasis,
    tol: &Tolerances,
) -> bool {
    let rel = &b.representative * a.representative.transpose();
    in_identity_component(&rel, basis, tol).unwrap_or(false)
}

fn merge_and_dedup(
    mut candidates: Vec<DiscreteCoset>,
    basis: &LieBasis,
    tol: &Tolerances,
    separation: f64,
) -> Vec<DiscreteCoset> {
    candidates.sort_by(order_key);
    let mut near: Vec<DiscreteCoset> = Vec::new();
    for cand in candidates {
        let close = near.iter().any(|k| {
            k.permutation == cand.permutation
                && k.det_sign == cand.det_sign
                && (&k.representative - &cand.representative).norm() < separation
        });
        if !close {
            near.push(cand);
        }
    }
    dedup_cosets(near, basis, tol)
}

/// Keeps one representative per (permutation, determinant, component):
/// the one with the smallest residual, ties broken in favour of the exact
/// identity and then by the lexicographically smallest entries. The identity coset comes first, the rest follow ordered
/// by permutation, determinant and entries.
pub fn dedup_cosets(
    mut candidates: Vec<DiscreteCoset>,
    basis: &LieBasis,
    tol: &Tolerances,
) -> Vec<DiscreteCoset> {
    candidates.sort_by(order_key);
    let mut kept: Vec<DiscreteCoset> = Vec::new();
    for cand in candidates {
        let duplicate = kept.iter().any(|k| {
            k.permutation == cand.permutation
                && k.det_sign == cand.det_sign
                && same_component(k, &cand, basis, tol)
        });
        if !duplicate {
            kept.push(cand);
        }
    }
    sort_for_output(&mut kept, basis, tol);
    kept
}

fn sort_for_output(cosets: &mut [DiscreteCoset], basis: &LieBasis, tol: &Tolerances) {
    let leads = |k: &DiscreteCoset| {
        k.permutation.is_identity()
            && in_identity_component(&k.representative, basis, tol).unwrap_or(false)
    };
    cosets.sort_by(|a, b| {
        leads(b)
            .cmp(&leads(a))
            .then(a.permutation.cmp(&b.permutation))
            .then(a.det_sign.cmp(&b.det_sign))
            .then_with(|| lex_cmp(&a.representative, &b.representative))
    });
}

/// Moves `q` within its coset `q·exp(span Ĝ)` to a maximizer of the
/// weighted trace `tr(W·R)`, `W = diag(n, n−1, …, 1)`. This picks the
/// identity for the identity coset and a simple matrix for most others.
pub fn tidy_representative(q: &Matrix, basis: &LieBasis, seed: u64) -> Matrix {
    let k = basis.coeff_dim();
    if k == 0 {
        return q.clone();
    }
    let n = q.nrows();
    let w = Matrix::from_fn(n, n, |i, j| if i == j { (n - i) as f64 } else { 0.0 });
    let gens: Vec<Matrix> = basis.generators().iter().map(|g| g.to_dense()).collect();
    let value = |r: &Matrix| (&w * r).trace();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = q.clone();
    let mut best_value = value(q);
    for start in 0..9 {
        let mut r = if start == 0 {
            q.clone()
        } else {
            let coeffs: Vec<f64> = (0..k)
                .map(|_| {
                    rand::Rng::random_range(&mut rng, -std::f64::consts::PI..std::f64::consts::PI)
                })
                .collect();
            q * crate::lie::sample_continuous(basis, &coeffs).expect("length matches")
        };
        for _ in 0..100 {
            let wr = &w * &r;
            let grad = DVector::from_iterator(k, gens.iter().map(|g| (&wr * g).trace()));
            if grad.norm() <= 1e-14 * (n * n) as f64 {
                break;
            }
            let hess = Matrix::from_fn(k, k, |a, b| {
                0.5 * (&wr * (&gens[a] * &gens[b] + &gens[b] * &gens[a])).trace()
            });
            let newton = (-&hess).cholesky().map(|ch| ch.solve(&grad));
            let current = value(&r);
            let mut step = match newton {
                Some(d) => d,
                None => grad.clone(),
            };
            let mut moved = false;
            for _ in 0..40 {
                let x = gens
                    .iter()
                    .zip(step.iter())
                    .fold(Matrix::zeros(n, n), |acc, (g, c)| acc + g * *c);
                let trial = &r * crate::linalg::expm_dense(&x);
                if value(&trial) >= current {
                    r = trial;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let v = value(&r);
        if v > best_value + 1e-12 {
            best_value = v;
            best = r;
        }
    }
    if best_value > value(q) {
        polar_factor(&best)
    } else {
        q.clone()
    }
}

fn cross_duplicates(
    cosets: &[DiscreteCoset],
    basis: &LieBasis,
    tol: &Tolerances,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..cosets.len() {
        for j in i + 1..cosets.len() {
            let (a, b) = (&cosets[i], &cosets[j]);
            if a.permutation != b.permutation
                && a.det_sign == b.det_sign
                && same_component(a, b, basis, tol)
            {
                out.push((i, j));
            }
        }
    }
    out
}
