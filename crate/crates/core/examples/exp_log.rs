//! Exponential and principal logarithm on the rotation group.

use quadsym::linalg::{
    expm_skew, logm_special_orthogonal, orthogonality_defect, SkewMatrix, Tolerances,
};

fn main() -> quadsym::error::Result<()> {
    let tol = Tolerances::default();
    let x = SkewMatrix::from_coords(3, vec![0.4, -1.1, 2.0])?;
    let q = expm_skew(&x);
    println!("exp(X) =\n{q:.6}");
    println!(
        "orthogonality defect {:.2e}, det {:.12}",
        orthogonality_defect(&q),
        q.determinant()
    );

    let back = logm_special_orthogonal(&q, &tol)?;
    println!("log(exp(X)) coordinates {:?}", back.coords());
    println!(
        "difference {:.2e}",
        back.add(&x.scale(-1.0)).frobenius_norm()
    );
    Ok(())
}
