//! Dyadic BMO profile, John-Nirenberg fractions and the maximal function
//! comparison for `log(1/|x|)`.

use bmofem::coeff::{bmo_profile, dyadic_maximal, john_nirenberg_check, mesh_maximal, DyadicSquare, ScalarField};
use bmofem::Mesh;

fn main() -> bmofem::Result<()> {
    let w = ScalarField::log_distance([0.0, 0.0]);

    for (depth, v) in bmo_profile(&w, 4, 1e-6)?.iter().enumerate() {
        println!("depth {depth}: seminorm estimate {v:.5}");
    }
    for (lambda, frac) in john_nirenberg_check(&w, DyadicSquare::UNIT, &[1.0, 2.0, 3.0, 4.0], 9, 1e-8)? {
        println!("lambda {lambda}: fraction {frac:.4e}");
    }

    let mesh = Mesh::uniform(3)?;
    for x in [[0.0, 0.0], [0.25, 0.5], [0.9, 0.1]] {
        let m = mesh_maximal(&w, &mesh, x, 1e-6)?;
        let d = dyadic_maximal(&w, 3, x, 1e-6)?;
        println!(
            "x = {x:?}: mesh {m:.4}, dyadic {d:.4}, bound holds {}",
            m <= 2.0 * d + 1e-6
        );
    }
    Ok(())
}
