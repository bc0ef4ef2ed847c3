use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use quadsym::apply::{breaking_cut, map_point, orbit};
use quadsym::discrete::{find_cosets, SearchOptions};
use quadsym::group::{analyze, penalty_residual, SymmetryReport};
use quadsym::lie::{commutant_residual, lie_basis, sample_continuous};
use quadsym::linalg::{
    cholesky_upper, expm_skew, logm_special_orthogonal, nullspace, orthogonality_defect,
    skew_basis, Matrix, SkewMatrix, SymMatrix, Tolerances,
};
use quadsym::problem::{
    back_transform, build_problem, canonicalize, invariance_residual, QcqpProblem,
};
use quadsym::samples::{axial_rotation, congruent, crossed_ellipses, diag};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn gaussian(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn haar(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    gaussian(n, n, rng).qr().q()
}

/// Random problem whose matrices share a rotation-invariant plane, so that
/// the continuous group is at least one-dimensional.
fn structured_problem(seed: u64) -> QcqpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=5);
    let m = rng.random_range(1..=3);
    let u = haar(n, &mut rng);
    let mut make = || {
        let mut d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        d[1] = d[0];
        u.transpose() * diag(&d) * &u
    };
    let a = make();
    let mut bs: Vec<Matrix> = (0..m).map(|_| make()).collect();
    let sum = bs.iter().fold(Matrix::zeros(n, n), |acc, b| acc + b);
    let min = nalgebra::SymmetricEigen::new(sum).eigenvalues.min();
    bs[0] += Matrix::identity(n, n) * (1.0 - min).max(0.0);
    build_problem(&a, &bs, &tol()).unwrap()
}

fn skew_strategy() -> impl Strategy<Value = SkewMatrix> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, n * (n - 1) / 2).prop_map(move |c| {
            let x = SkewMatrix::from_coords(n, c).unwrap();
            let norm = x.frobenius_norm();
            // spread the norms over (0, 10]
            if norm > 0.0 {
                x.scale(10.0 * (norm / (norm + 1.0)) / norm)
            } else {
                x
            }
        })
    })
}

fn reports() -> Vec<(QcqpProblem, SymmetryReport)> {
    [crossed_ellipses(), axial_rotation()]
        .into_iter()
        .map(|p| {
            let r = analyze(&p, &SearchOptions::default(), &tol(), false).unwrap();
            (p, r)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exponential_is_orthogonal(x in skew_strategy()) {
        let q = expm_skew(&x);
        prop_assert!(orthogonality_defect(&q) < 1e-12);
        prop_assert!(q.determinant() > 0.0);
    }

    #[test]
    fn log_re_exponentiates(x in skew_strategy()) {
        let q = expm_skew(&x);
        let back = expm_skew(&logm_special_orthogonal(&q, &tol()).unwrap());
        prop_assert!((back - q).norm() < 1e-10);
    }

    #[test]
    fn log_inverts_small_rotations(x in skew_strategy()) {
        // norms below π keep every planar angle in the principal branch
        let small = x.scale(3.0 / 10.0);
        let back = logm_special_orthogonal(&expm_skew(&small), &tol()).unwrap();
        prop_assert!(back.add(&small.scale(-1.0)).frobenius_norm() < 1e-8);
    }

    #[test]
    fn skew_basis_reconstructs(x in skew_strategy()) {
        let n = x.dim();
        let sum = skew_basis(n)
            .iter()
            .zip(x.coords())
            .fold(Matrix::zeros(n, n), |acc, (g, c)| acc + g.to_dense() * *c);
        prop_assert_eq!(sum, x.to_dense());
    }

    #[test]
    fn nullspace_is_orthogonal_to_rows(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7, rank in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = rank.min(rows).min(cols);
        let a = gaussian(rows, rank, &mut rng) * gaussian(rank, cols, &mut rng);
        let t = tol();
        let kernel = nullspace(&a, &t);
        prop_assert_eq!(kernel.len(), cols - rank);
        for (i, v) in kernel.iter().enumerate() {
            prop_assert!((&a * v).norm() <= t.rank_tol * a.norm() * (cols as f64).sqrt());
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            for w in &kernel[i + 1..] {
                prop_assert!(v.dot(w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_refactors(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gaussian(n, n, &mut rng);
        let b = SymMatrix::from_upper(&(g.transpose() * &g + Matrix::identity(n, n))).unwrap();
        let u = cholesky_upper(&b, &tol()).unwrap();
        let again = SymMatrix::from_upper(&(u.transpose() * &u)).unwrap();
        let u2 = cholesky_upper(&again, &tol()).unwrap();
        prop_assert!((u2 - u).amax() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tilde_constraints_sum_to_identity(seed in any::<u64>()) {
        let p = structured_problem(seed);
        let c = canonicalize(&p, &tol()).unwrap();
        let n = c.dim();
        let sum = c.b_tilde.iter().fold(Matrix::zeros(n, n), |acc, b| acc + b.to_dense());
        prop_assert!((sum - Matrix::identity(n, n)).norm() <= tol().residual_tol);
    }

    #[test]
    fn lie_algebra_properties(seed in any::<u64>()) {
        let p = structured_problem(seed);
        let c = canonicalize(&p, &tol()).unwrap();
        let basis = lie_basis(&c, &tol());
        prop_assert!(basis.coeff_dim() >= 1);
        let scale = c.scale();
        let gens: Vec<Matrix> = basis.generators().iter().map(|g| g.to_dense()).collect();

        // closed under commutators
        for a in &gens {
            for b in &gens {
                let comm = SkewMatrix::skew_part(&(a * b - b * a)).unwrap();
                let rest = comm.add(&basis.project(&comm).scale(-1.0));
                prop_assert!(rest.frobenius_norm() <= tol().residual_tol);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let id = quadsym::problem::Permutation::identity(p.num_constraints());
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..basis.coeff_dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x = basis.combine(&coeffs).unwrap();
            prop_assert!(commutant_residual(&x.to_dense(), &c) <= 1e-10 * scale);
            let q = sample_continuous(&basis, &coeffs).unwrap();
            let pm = back_transform(&q, &c);
            prop_assert!(invariance_residual(&pm, &p, &id) <= 1e-8);
        }
    }

    #[test]
    fn reported_symmetries_are_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = if seed % 2 == 0 { crossed_ellipses() } else { axial_rotation() };
        let n = base.dim();
        let t = Matrix::identity(n, n) + gaussian(n, n, &mut rng) * 0.3;
        prop_assume!(t.determinant().abs() > 0.05);
        let p = congruent(&base, &t);
        let opts = SearchOptions { restarts: 24, ..SearchOptions::default() };
        let r = analyze(&p, &opts, &tol(), false).unwrap();
        prop_assert!(r.verify(&p).unwrap().passed());

        let c = canonicalize(&p, &tol()).unwrap();
        let limit = tol().residual_tol * c.scale();
        for rc in &r.cosets {
            let q = &rc.canonical.representative;
            // constraint i is carried onto constraint perm(i)
            for (i, b) in c.b_tilde.iter().enumerate() {
                let target = c.b_tilde[rc.permutation().apply(i)].to_dense();
                prop_assert!((q.transpose() * b.to_dense() * q - target).norm() <= limit);
            }
            prop_assert!((q - c.to_canonical(&rc.original)).norm() <= limit);
            let det = rc.original.determinant();
            prop_assert!((det * det - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn symmetries_preserve_values(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (p, r) in reports() {
            let n = p.dim();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let values = p.constraint_values(&x);
            let o = orbit(&x, &r, 4).unwrap();
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let feasible = values.iter().all(|v| *v <= 1.0);
            for y in &o.points {
                prop_assert!((p.objective_value(y) - p.objective_value(&x)).abs() <= 1e-9 * p.scale());
                let mut vy = p.constraint_values(y);
                vy.sort_by(f64::total_cmp);
                for (a, b) in vy.iter().zip(&sorted) {
                    prop_assert!((a - b).abs() <= 1e-9 * p.scale());
                }
                if vy.iter().all(|v| (*v - 1.0).abs() > 1e-8) {
                    prop_assert_eq!(vy.iter().all(|v| *v <= 1.0), feasible);
                }
            }
        }
    }

    #[test]
    fn cuts_swap_half_spaces(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (p, r) in reports() {
            for rc in &r.cosets {
                if let Some(cut) = breaking_cut(&rc.original, &tol()) {
                    let a = DVector::from_row_slice(&cut.normal);
                    prop_assert!((a.norm() - 1.0).abs() < 1e-12);
                    for _ in 0..20 {
                        let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let px = map_point(&rc.original, &x).unwrap();
                        let ax = a.dot(&DVector::from_row_slice(&x));
                        let apx = a.dot(&DVector::from_row_slice(&px));
                        prop_assert!((ax + apx).abs() <= 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn random_rotations_are_not_symmetries() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (p, r) in reports() {
        let c = canonicalize(&p, &tol()).unwrap();
        let limit = 10.0 * tol().residual_tol * c.scale();
        let perms: Vec<_> = r
            .statistics
            .pairs
            .iter()
            .map(|s| s.permutation.clone())
            .collect();
        for _ in 0..100 {
            let mut q = haar(p.dim(), &mut rng);
            if rng.random_bool(0.5) {
                q.column_mut(0).neg_mut();
            }
            for pm in &perms {
                assert!(penalty_residual(&q, &c, pm) > limit);
            }
        }
    }
}

#[test]
fn search_is_reproducible() {
    let p = structured_problem(3);
    let c = canonicalize(&p, &tol()).unwrap();
    let basis = lie_basis(&c, &tol());
    let opts = SearchOptions {
        seed: 11,
        ..SearchOptions::default()
    };
    let a = find_cosets(&c, &basis, &opts, &tol()).unwrap();
    let b = find_cosets(&c, &basis, &opts, &tol()).unwrap();
    assert_eq!(a, b);
}
