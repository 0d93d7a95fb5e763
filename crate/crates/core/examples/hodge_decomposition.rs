//! Discrete Hodge split of a random field, and the conjugate and flux
//! decompositions of a smooth function.

use std::sync::Arc;

use bmofem::coeff::{project_coefficient, CoefficientField};
use bmofem::fem::lp_norm;
use bmofem::harness::{level_rng, probe_function, random_field};
use bmofem::hodge::{conjugate_gap, flux_decompose, hodge_decompose};
use bmofem::Mesh;

fn main() -> bmofem::Result<()> {
    let mesh = Arc::new(Mesh::uniform(3)?);
    let s = random_field(&mesh, &mut level_rng(7, 3));
    let split = hodge_decompose(&s)?;
    let grad = split.gradient_part()?;
    println!(
        "|s| = {:.5}, |grad phi| = {:.5}, |g| = {:.5}",
        lp_norm(&s, 2.0)?,
        lp_norm(&grad, 2.0)?,
        lp_norm(&split.sigma, 2.0)?
    );
    println!(
        "reconstruction {:.1e}, orthogonality {:.1e}",
        split.reconstruction_residual, split.orthogonality_residual
    );

    let u = probe_function(&mesh);
    for p in [1.8, 2.0, 2.2, 3.0] {
        let gap = conjugate_gap(&u, p)?;
        println!(
            "p = {p}: conjugate remainder {:.4e}, ratio {:.4}",
            gap.g_norm, gap.bound_ratio
        );
    }

    let a_h = project_coefficient(&CoefficientField::checkerboard(5.0), &mesh, 1e-10)?;
    let flux = flux_decompose(&u, &a_h, 2.0)?;
    println!("checkerboard flux: |ell| / |grad u| = {:.4}", flux.bound_ratio);
    Ok(())
}
