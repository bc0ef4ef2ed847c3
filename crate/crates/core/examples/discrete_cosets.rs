//! Discrete symmetries of two crossed ellipses, with and without the objective.

use quadsym::discrete::{admissible_permutations, search_cosets, SearchOptions};
use quadsym::lie::lie_basis;
use quadsym::linalg::Tolerances;
use quadsym::problem::canonicalize;
use quadsym::samples::crossed_ellipses;

fn main() -> quadsym::error::Result<()> {
    let tol = Tolerances::default();
    let opts = SearchOptions::default();
    let full = canonicalize(&crossed_ellipses(), &tol)?;

    for (label, c) in [
        ("with objective", full.clone()),
        ("constraints only", full.without_objective()),
    ] {
        let perms = admissible_permutations(&c, &tol, opts.max_permutations)?;
        let basis = lie_basis(&c, &tol);
        let (cosets, stats) = search_cosets(&c, &basis, &opts, &tol)?;
        println!(
            "{label}: {} admissible permutations, {} cosets",
            perms.len(),
            cosets.len()
        );
        for coset in &cosets {
            let q = &coset.representative;
            println!(
                "  perm {:?} det {} angle {:.4} residual {:.1e}",
                coset.permutation.as_slice(),
                coset.det_sign,
                q[(1, 0)].atan2(q[(0, 0)]),
                coset.residual
            );
        }
        for pair in &stats.pairs {
            println!(
                "  search {:?} det {}: space dim {}, {}/{} accepted",
                pair.permutation.as_slice(),
                pair.det_sign,
                pair.space_dim,
                pair.accepted,
                pair.restarts
            );
        }
    }
    Ok(())
}
