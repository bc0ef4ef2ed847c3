//! Run the full pipeline, verify the result and round-trip it through JSON.

use quadsym::discrete::SearchOptions;
use quadsym::group::{analyze, SymmetryReport};
use quadsym::linalg::Tolerances;
use quadsym::samples::axial_rotation;

fn main() -> quadsym::error::Result<()> {
    let p = axial_rotation();
    let report = analyze(&p, &SearchOptions::default(), &Tolerances::default(), false)?;
    println!("{}", report.summary());
    for rc in &report.cosets {
        println!(
            "coset {} perm {:?} det {}\n{:.6}",
            rc.id,
            rc.permutation().as_slice(),
            rc.det_sign(),
            rc.original
        );
    }

    let json = report.to_json();
    let reloaded = SymmetryReport::from_json(&json).expect("report parses");
    let check = reloaded.verify(&p)?;
    println!(
        "{} bytes of JSON, verification passed: {}",
        json.len(),
        check.passed()
    );
    Ok(())
}
