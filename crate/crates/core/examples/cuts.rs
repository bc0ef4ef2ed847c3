//! Symmetry-breaking half-spaces from elements with a −1 eigenvalue.

use quadsym::apply::{breaking_cut, map_point};
use quadsym::discrete::SearchOptions;
use quadsym::group::analyze;
use quadsym::linalg::Tolerances;
use quadsym::samples::axial_rotation;

fn main() -> quadsym::error::Result<()> {
    let tol = Tolerances::default();
    let report = analyze(&axial_rotation(), &SearchOptions::default(), &tol, false)?;
    let x = [0.2, -0.4, 0.3];
    for rc in &report.cosets {
        match breaking_cut(&rc.original, &tol) {
            Some(cut) => {
                let y = map_point(&rc.original, &x)?;
                println!(
                    "coset {}: normal {:?}, x kept {}, image kept {}",
                    rc.id,
                    cut.normal,
                    cut.holds(&x),
                    cut.holds(&y)
                );
            }
            None => println!("coset {}: no -1 eigenvalue", rc.id),
        }
    }
    Ok(())
}
