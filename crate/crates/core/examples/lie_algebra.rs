//! Continuous symmetries: the algebra of skew matrices commuting with the data.

use quadsym::lie::{build_commutant_system, lie_basis, sample_continuous};
use quadsym::linalg::Tolerances;
use quadsym::problem::{back_transform, canonicalize, invariance_residual, Permutation};
use quadsym::samples::axial_rotation;

fn main() -> quadsym::error::Result<()> {
    let tol = Tolerances::default();
    let p = axial_rotation();
    let c = canonicalize(&p, &tol)?;
    let system = build_commutant_system(&c);
    println!(
        "commutant system: {}x{}",
        system.matrix.nrows(),
        system.matrix.ncols()
    );

    let basis = lie_basis(&c, &tol);
    println!("dimension K = {} (n = {})", basis.coeff_dim(), basis.dim());
    for g in basis.generators() {
        println!("generator\n{:.6}", g.to_dense());
    }

    let id = Permutation::identity(p.num_constraints());
    for t in [0.3, 1.0, std::f64::consts::PI] {
        let q = sample_continuous(&basis, &[t])?;
        let pm = back_transform(&q, &c);
        println!(
            "t = {t:.3}: residual {:.2e}",
            invariance_residual(&pm, &p, &id)
        );
    }
    Ok(())
}
