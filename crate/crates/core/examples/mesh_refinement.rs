//! Uniform meshes, refinement and the parent map.

use bmofem::Mesh;

fn main() -> bmofem::Result<()> {
    let mut mesh = Mesh::uniform(0)?;
    println!("level  cells  vertices  interior  h_max     shape");
    for _ in 0..=5 {
        let h = mesh.cell_diameters().iter().copied().fold(0.0, f64::max);
        println!(
            "{:>5}  {:>5}  {:>8}  {:>8}  {:.5}  {:.4}",
            mesh.level(),
            mesh.num_cells(),
            mesh.num_vertices(),
            mesh.num_interior(),
            h,
            mesh.shape_regularity_ratio()?
        );
        mesh = mesh.refine()?;
    }

    let fine = Mesh::uniform(2)?;
    let x = [0.3, 0.6];
    for k in fine.cells_containing(x) {
        println!("cell {k} contains {x:?}; parent {:?}", fine.parent_cell(k));
    }
    Ok(())
}
