//! Cell averages of the coefficient fixtures and their coercivity.

use std::sync::Arc;

use bmofem::coeff::{coefficient_error, coercivity_of_projection, project_coefficient, CoefficientField};
use bmofem::Mesh;

fn main() -> bmofem::Result<()> {
    let fixtures = [
        ("smooth", CoefficientField::smooth()),
        ("log-singular", CoefficientField::log_singular(0.5, [0.0, 0.0])),
        ("checkerboard", CoefficientField::checkerboard(100.0)),
    ];
    for (name, a) in &fixtures {
        println!("{name} (alpha = {})", a.alpha());
        for level in 1..=4 {
            let mesh = Arc::new(Mesh::uniform(level)?);
            let a_h = project_coefficient(a, &mesh, 1e-8)?;
            println!(
                "  level {level}: min eigenvalue {:.6}, L2 error {:.4e}",
                coercivity_of_projection(&a_h)?,
                coefficient_error(a, &a_h, 2.0, 1e-8)?
            );
        }
    }
    Ok(())
}
