//! Symmetries transform by conjugation under a change of variables.

use nalgebra::DMatrix;
use quadsym::discrete::SearchOptions;
use quadsym::group::analyze;
use quadsym::linalg::Tolerances;
use quadsym::problem::invariance_residual;
use quadsym::samples::{congruent, crossed_ellipses};

fn main() -> quadsym::error::Result<()> {
    let tol = Tolerances::default();
    let base = crossed_ellipses();
    let t = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, -0.3, 0.8]);
    let moved = congruent(&base, &t);

    let a = analyze(&base, &SearchOptions::default(), &tol, false)?;
    let b = analyze(&moved, &SearchOptions::default(), &tol, false)?;
    println!("original: {}", a.summary());
    println!("transformed: {}", b.summary());

    let t_inv = t.clone().try_inverse().expect("invertible");
    for rc in &a.cosets {
        // x ↦ Px on the original corresponds to y ↦ T⁻¹PT y on the transformed problem
        let conj = &t_inv * &rc.original * &t;
        println!(
            "coset {} conjugated residual {:.2e}",
            rc.id,
            invariance_residual(&conj, &moved, rc.permutation())
        );
    }
    Ok(())
}
