//! Using a computed symmetry group: images of points, orbits, equivalence
//! classes of local optima and symmetry-breaking cuts.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::group::SymmetryReport;
use crate::lie::{levenberg_marquardt, LieBasis};
use crate::linalg::{expm_skew, nullspace, Matrix, Tolerances};

/// `P·x`.
pub fn map_point(p_mat: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    if p_mat.ncols() != x.len() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix applied to a vector of length {}",
            p_mat.nrows(),
            p_mat.ncols(),
            x.len()
        )));
    }
    Ok((p_mat * DVector::from_row_slice(x))
        .iter()
        .copied()
        .collect())
}

/// Which group element produced an orbit point: the representative of
/// `coset`, times `exp(Σ coefficients[k]·Ĝₖ)` when coefficients are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTag {
    pub coset: usize,
    pub coefficients: Vec<f64>,
}

impl std::fmt::Display for OrbitTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "coset {}", self.coset)?;
        if !self.coefficients.is_empty() {
            let cs: Vec<String> = self
                .coefficients
                .iter()
                .map(|c| format!("{c:.6}"))
                .collect();
            write!(f, " exp[{}]", cs.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub seed: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub generator_tags: Vec<OrbitTag>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Group element `S⁻¹·Q·exp(X)·S` in original coordinates.
fn element(report: &SymmetryReport, basis: &LieBasis, coset: usize, coeffs: &[f64]) -> Matrix {
    let q = &report.cosets[coset].canonical.representative;
    if coeffs.is_empty() {
        return report.cosets[coset].original.clone();
    }
    let x = basis.combine(coeffs).expect("coefficient count matches");
    &report.s_inv * q * expm_skew(&x) * &report.s
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Images of `x` under every coset representative and, per coset, under
/// `continuous_samples` random elements of that coset. Points closer than
/// `1e−9·‖x‖` are merged, keeping the first.
pub fn orbit(x: &[f64], report: &SymmetryReport, continuous_samples: usize) -> Result<Orbit> {
    if x.len() != report.n {
        return Err(Error::Dimension(format!(
            "point of length {} for a problem of dimension {}",
            x.len(),
            report.n
        )));
    }
    let basis = report.lie_basis();
    let k = basis.coeff_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(report.search.seed);
    let merge = 1e-9 * norm(x);

    let mut out = Orbit {
        seed: x.to_vec(),
        points: Vec::new(),
        generator_tags: Vec::new(),
    };
    let push = |point: Vec<f64>, tag: OrbitTag, out: &mut Orbit| {
        if !out.points.iter().any(|p| distance(p, &point) <= merge) {
            out.points.push(point);
            out.generator_tags.push(tag);
        }
    };
    for coset in 0..report.cosets.len() {
        let y = map_point(&report.cosets[coset].original, x)?;
        push(
            y,
            OrbitTag {
                coset,
                coefficients: Vec::new(),
            },
            &mut out,
        );
        if k == 0 {
            continue;
        }
        for _ in 0..continuous_samples {
            let coefficients: Vec<f64> = (0..k).map(|_| rng.random_range(-PI..PI)).collect();
            let y = map_point(&element(report, &basis, coset, &coefficients), x)?;
            push(
                y,
                OrbitTag {
                    coset,
                    coefficients,
                },
                &mut out,
            );
        }
    }
    Ok(out)
}

/// Group element mapping `x` to `y`, if one is found.
pub fn find_mapping(
    x: &[f64],
    y: &[f64],
    report: &SymmetryReport,
    tol: &Tolerances,
) -> Option<OrbitTag> {
    let basis = report.lie_basis();
    let limit = tol.residual_tol * norm(x).max(1.0);
    let sx = &report.s * DVector::from_row_slice(x);
    let sy = &report.s * DVector::from_row_slice(y);
    for (index, rc) in report.cosets.iter().enumerate() {
        let direct = map_point(&rc.original, x).ok()?;
        if distance(&direct, y) <= limit {
            return Some(OrbitTag {
                coset: index,
                coefficients: Vec::new(),
            });
        }
        if basis.coeff_dim() == 0 {
            continue;
        }
        // exp(X)·Sx = Qᵀ·Sy in canonical coordinates
        let target = rc.canonical.representative.transpose() * &sy;
        let Some(coeffs) = fit_coefficients(&basis, &sx, &target, report.search.seed) else {
            continue;
        };
        let mapped = map_point(&element(report, &basis, index, &coeffs), x).ok()?;
        if distance(&mapped, y) <= limit {
            return Some(OrbitTag {
                coset: index,
                coefficients: coeffs,
            });
        }
    }
    None
}

/// Coefficients with `exp(Σ cₖĜₖ)·u ≈ v`: coordinate descent by golden
/// section from the origin and 8 random starts, then a least-squares polish.
fn fit_coefficients(
    basis: &LieBasis,
    u: &DVector<f64>,
    v: &DVector<f64>,
    seed: u64,
) -> Option<Vec<f64>> {
    let k = basis.coeff_dim();
    let residual = |c: &[f64]| -> DVector<f64> {
        expm_skew(&basis.combine(c).expect("length matches")) * u - v
    };
    let cost = |c: &[f64]| residual(c).norm_squared();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in 0..9 {
        let mut c: Vec<f64> = if start == 0 {
            vec![0.0; k]
        } else {
            (0..k).map(|_| rng.random_range(-PI..PI)).collect()
        };
        for _ in 0..6 {
            for j in 0..k {
                let centre = c[j];
                let f = |t: f64| {
                    let mut trial = c.clone();
                    trial[j] = t;
                    cost(&trial)
                };
                c[j] = golden_section(f, centre - PI, centre + PI);
            }
        }
        let (c, r) = levenberg_marquardt(c, &residual, 100);
        if best.as_ref().is_none_or(|(_, b)| r < *b) {
            best = Some((c, r));
        }
        if best.as_ref().is_some_and(|(_, b)| *b < 1e-13) {
            break;
        }
    }
    best.map(|(c, _)| c)
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..60 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

/// Partitions `points` into classes of points mapped onto each other by the
/// group. Classes are listed by their smallest index; members ascend.
pub fn group_local_optima(
    points: &[Vec<f64>],
    report: &SymmetryReport,
    tol: &Tolerances,
) -> Result<Vec<Vec<usize>>> {
    for p in points {
        if p.len() != report.n {
            return Err(Error::Dimension(format!(
                "point of length {} for a problem of dimension {}",
                p.len(),
                report.n
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            if ri == rj {
                continue;
            }
            if find_mapping(&points[i], &points[j], report, tol).is_some() {
                parent[rj.max(ri)] = ri.min(rj);
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot: Vec<Option<usize>> = vec![None; points.len()];
    for i in 0..points.len() {
        let r = root(&mut parent, i);
        match slot[r] {
            Some(c) => classes[c].push(i),
            None => {
                slot[r] = Some(classes.len());
                classes.push(vec![i]);
            }
        }
    }
    Ok(classes)
}

/// Half-space `normal·x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub normal: Vec<f64>,
}

impl Cut {
    pub fn holds(&self, x: &[f64]) -> bool {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() >= 0.0
    }
}

/// A unit `a` with `Pᵀa = −a`, so that `P` swaps the half-spaces `a·x ≥ 0`
/// and `a·x ≤ 0`. Among such vectors the projection of the first standard
/// basis vector not orthogonal to the eigenspace is chosen; entries below
/// `1e−12` are set to zero.
pub fn breaking_cut(p_mat: &Matrix, tol: &Tolerances) -> Option<Cut> {
    let n = p_mat.nrows();
    if n == 0 || p_mat.ncols() != n {
        return None;
    }
    let shifted = p_mat.transpose() + Matrix::identity(n, n);
    let space = nullspace(&shifted, tol);
    if space.is_empty() {
        return None;
    }
    for axis in 0..n {
        let mut proj = DVector::zeros(n);
        for v in &space {
            proj.axpy(v[axis], v, 1.0);
        }
        let len = proj.norm();
        if len > 1e-6 {
            let mut a = proj / len;
            a.apply(|v| {
                if v.abs() <= 1e-12 {
                    *v = 0.0
                }
            });
            let len = a.norm();
            return Some(Cut {
                normal: (a / len).iter().copied().collect(),
            });
        }
    }
    None
}
