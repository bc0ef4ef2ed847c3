//! Reduce a problem so that the constraint matrices sum to the identity.

use quadsym::linalg::{Matrix, Tolerances};
use quadsym::problem::{build_problem, canonicalize};

fn main() -> quadsym::error::Result<()> {
    let tol = Tolerances::default();
    let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, -1.0]);
    let b = vec![
        Matrix::from_row_slice(2, 2, &[3.0, 0.5, 0.5, 1.0]),
        Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
    ];
    let p = build_problem(&a, &b, &tol)?;
    println!("min pivot of the constraint sum: {:.6}", p.min_pivot());
    println!("digest {}", p.digest());

    let c = canonicalize(&p, &tol)?;
    println!("S =\n{:.6}", c.s);
    println!(
        "objective in canonical coordinates =\n{:.6}",
        c.a_tilde.to_dense()
    );
    let sum = c
        .b_tilde
        .iter()
        .fold(Matrix::zeros(2, 2), |acc, b| acc + b.to_dense());
    println!("sum of canonical constraints =\n{sum:.6}");

    // an indefinite constraint sum is rejected
    let bad = build_problem(
        &a,
        &[Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])],
        &tol,
    );
    println!("indefinite sum: {}", bad.unwrap_err());
    Ok(())
}
