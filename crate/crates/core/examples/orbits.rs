//! Orbits of points and grouping of local optima into equivalence classes.

use quadsym::apply::{find_mapping, group_local_optima, orbit};
use quadsym::discrete::SearchOptions;
use quadsym::group::analyze;
use quadsym::linalg::Tolerances;
use quadsym::samples::{axial_rotation, crossed_ellipses};

fn main() -> quadsym::error::Result<()> {
    let tol = Tolerances::default();
    let p = crossed_ellipses();
    let report = analyze(&p, &SearchOptions::default(), &tol, false)?;
    let o = orbit(&[0.3, 0.1], &report, 0)?;
    for (x, tag) in o.points.iter().zip(&o.generator_tags) {
        println!("{:+.6} {:+.6}  {tag}", x[0], x[1]);
    }

    let p = axial_rotation();
    let report = analyze(&p, &SearchOptions::default(), &tol, false)?;
    let (s, c) = 0.8f64.sin_cos();
    let optima = vec![
        vec![0.5, 0.0, 0.2],
        vec![0.5 * c, 0.5 * s, -0.2],
        vec![0.1, 0.1, 0.7],
        vec![0.0, -0.5, 0.2],
    ];
    if let Some(tag) = find_mapping(&optima[0], &optima[1], &report, &tol) {
        println!("point 0 maps to point 1 by {tag}");
    }
    println!("classes {:?}", group_local_optima(&optima, &report, &tol)?);
    Ok(())
}
