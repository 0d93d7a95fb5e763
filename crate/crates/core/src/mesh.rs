//! Conforming triangulations of the unit square.
//!
//! The structured family splits the `2^L x 2^L` grid squares along the diagonal
//! from lower-left to upper-right. Cell `2 * (j * n + i)` is the lower-right
//! triangle of square `(i, j)` and cell `2 * (j * n + i) + 1` the upper-left one.
//! Quadrisection of a level-`L` cell yields exactly four cells of level `L + 1`,
//! so the family is nested.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::{orient, Point, Vec2};

/// Largest level accepted by [`Mesh::uniform`].
pub const MAX_LEVEL: u32 = 12;

const CONTAINS_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    level: u32,
    structured: bool,
    areas: Vec<f64>,
    diameters: Vec<f64>,
    hat_gradients: Vec<[Vec2; 3]>,
    interior: Vec<usize>,
    interior_index: Vec<Option<usize>>,
}

impl Mesh {
    /// Structured mesh with `(2^level + 1)^2` vertices and `2 * 4^level` cells.
    pub fn uniform(level: u32) -> Result<Mesh> {
        if level > MAX_LEVEL {
            return Err(Error::bounds("mesh level", level, format!("0..={MAX_LEVEL}")));
        }
        let n = 1usize << level;
        let h = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                // i * h is exact for dyadic h; keeps the endpoints at exactly 0 and 1
                vertices.push([i as f64 * h, j as f64 * h]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
                cells.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }
        Ok(Mesh::assemble(vertices, cells, boundary, level, true))
    }

    /// Mesh from raw data. Cells must reference valid vertices and must not be
    /// clockwise; zero-area cells are accepted here and rejected by the geometric
    /// queries that need a positive area.
    pub fn from_parts(vertices: Vec<Point>, cells: Vec<[usize; 3]>, boundary: Vec<bool>) -> Result<Mesh> {
        if boundary.len() != vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "{} boundary flags for {} vertices",
                boundary.len(),
                vertices.len()
            )));
        }
        for (k, cell) in cells.iter().enumerate() {
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {k} references a missing vertex")));
            }
            let o = orient(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
            if o < 0.0 {
                return Err(Error::InvalidMesh(format!("cell {k} is clockwise")));
            }
        }
        Ok(Mesh::assemble(vertices, cells, boundary, 0, false))
    }

    fn assemble(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        boundary: Vec<bool>,
        level: u32,
        structured: bool,
    ) -> Mesh {
        let mut areas = Vec::with_capacity(cells.len());
        let mut diameters = Vec::with_capacity(cells.len());
        let mut hat_gradients = Vec::with_capacity(cells.len());
        for cell in &cells {
            let p = cell.map(|v| vertices[v]);
            let twice_area = orient(p[0], p[1], p[2]);
            areas.push(0.5 * twice_area);
            let edges = [edge_len(p[0], p[1]), edge_len(p[1], p[2]), edge_len(p[2], p[0])];
            diameters.push(edges.iter().cloned().fold(0.0, f64::max));
            let mut g = [[0.0; 2]; 3];
            for (i, gi) in g.iter_mut().enumerate() {
                let a = p[(i + 1) % 3];
                let b = p[(i + 2) % 3];
                *gi = [(a[1] - b[1]) / twice_area, (b[0] - a[0]) / twice_area];
            }
            hat_gradients.push(g);
        }
        let mut interior = Vec::new();
        let mut interior_index = vec![None; vertices.len()];
        for (v, &b) in boundary.iter().enumerate() {
            if !b {
                interior_index[v] = Some(interior.len());
                interior.push(v);
            }
        }
        Mesh {
            vertices,
            cells,
            boundary,
            level,
            structured,
            areas,
            diameters,
            hat_gradients,
            interior,
            interior_index,
        }
    }

    /// The next mesh of the family: `uniform(level + 1)` for structured meshes,
    /// edge-midpoint quadrisection otherwise.
    pub fn refine(&self) -> Result<Mesh> {
        if self.structured {
            return Mesh::uniform(self.level + 1);
        }
        let mut vertices = self.vertices.clone();
        let mut boundary = self.boundary.clone();
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for cell in &self.cells {
            for e in 0..3 {
                *edge_count.entry(edge_key(cell[e], cell[(e + 1) % 3])).or_default() += 1;
            }
        }
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>, boundary: &mut Vec<bool>| -> usize {
            let key = edge_key(a, b);
            *midpoints.entry(key).or_insert_with(|| {
                vertices.push(crate::geom::midpoint(vertices[a], vertices[b]));
                boundary.push(edge_count[&key] == 1);
                vertices.len() - 1
            })
        };
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for &[a, b, c] in &self.cells {
            let ab = mid(a, b, &mut vertices, &mut boundary);
            let bc = mid(b, c, &mut vertices, &mut boundary);
            let ca = mid(c, a, &mut vertices, &mut boundary);
            cells.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]);
        }
        let mut refined = Mesh::assemble(vertices, cells, boundary, self.level + 1, false);
        refined.level = self.level + 1;
        Ok(refined)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_structured(&self) -> bool {
        self.structured
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_vertices(&self, cell: usize) -> [Point; 3] {
        self.cells[cell].map(|v| self.vertices[v])
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        self.areas[cell]
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.areas
    }

    /// Local mesh size: the longest edge of each cell.
    pub fn cell_diameters(&self) -> &[f64] {
        &self.diameters
    }

    pub fn cell_centroid(&self, cell: usize) -> Point {
        let p = self.cell_vertices(cell);
        [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
    }

    pub fn inradius(&self, cell: usize) -> f64 {
        let p = self.cell_vertices(cell);
        let perimeter = edge_len(p[0], p[1]) + edge_len(p[1], p[2]) + edge_len(p[2], p[0]);
        2.0 * self.areas[cell] / perimeter
    }

    /// Gradients of the three local hat functions, in cell-vertex order.
    pub fn hat_gradients(&self, cell: usize) -> Result<&[Vec2; 3]> {
        self.check_cell(cell)?;
        Ok(&self.hat_gradients[cell])
    }

    pub(crate) fn check_cell(&self, cell: usize) -> Result<()> {
        let area = self.areas[cell];
        if area > 0.0 && area.is_finite() {
            Ok(())
        } else {
            Err(Error::Geometry {
                cell,
                detail: format!("signed area {area:e}"),
            })
        }
    }

    pub fn check_geometry(&self) -> Result<()> {
        (0..self.num_cells()).try_for_each(|k| self.check_cell(k))
    }

    /// Interior vertices in increasing index order; these are the unknowns of
    /// the zero-trace space.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_index(&self, vertex: usize) -> Option<usize> {
        self.interior_index[vertex]
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Largest diameter-to-inradius ratio over all cells.
    pub fn shape_regularity_ratio(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..self.num_cells() {
            let r = self.inradius(k);
            if !(r > 0.0) {
                return Err(Error::Geometry {
                    cell: k,
                    detail: "zero inradius".into(),
                });
            }
            worst = worst.max(self.diameters[k] / r);
        }
        Ok(worst)
    }

    /// All cells whose closure contains `x`.
    pub fn cells_containing(&self, x: Point) -> Vec<usize> {
        let test = |k: usize| barycentric_inside(self.cell_vertices(k), x);
        if !self.structured {
            return (0..self.num_cells()).filter(|&k| test(k)).collect();
        }
        let n = 1usize << self.level;
        let mut out = Vec::new();
        for j in grid_candidates(x[1], n) {
            for i in grid_candidates(x[0], n) {
                let base = 2 * (j * n + i);
                out.extend([base, base + 1].into_iter().filter(|&k| test(k)));
            }
        }
        out
    }

    /// Parent cell one level up in the structured family.
    pub fn parent_cell(&self, cell: usize) -> Option<usize> {
        if !self.structured || self.level == 0 {
            return None;
        }
        let n = 1usize << self.level;
        let square = cell / 2;
        let kind = cell % 2;
        let (i, j) = (square % n, square / n);
        let parent_kind = match (i % 2, j % 2) {
            (1, 0) => 0,
            (0, 1) => 1,
            _ => kind,
        };
        let pn = n / 2;
        Some(2 * ((j / 2) * pn + i / 2) + parent_kind)
    }

    /// Debug export: `v x y b` per vertex, then `c i j k` per cell.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, &b) in self.vertices.iter().zip(&self.boundary) {
            let _ = writeln!(s, "v {} {} {}", p[0], p[1], u8::from(b));
        }
        for c in &self.cells {
            let _ = writeln!(s, "c {} {} {}", c[0], c[1], c[2]);
        }
        s
    }
}

fn edge_len(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn grid_candidates(t: f64, n: usize) -> Vec<usize> {
    let s = t * n as f64;
    let i = s.floor();
    let mut out = Vec::with_capacity(2);
    let i = i as isize;
    for c in [i - 1, i] {
        if c >= 0 && (c as usize) < n && s >= c as f64 - CONTAINS_EPS && s <= (c + 1) as f64 + CONTAINS_EPS {
            out.push(c as usize);
        }
    }
    out
}

pub(crate) fn barycentric_inside(p: [Point; 3], x: Point) -> bool {
    let total = orient(p[0], p[1], p[2]);
    if total <= 0.0 {
        return false;
    }
    let l0 = orient(x, p[1], p[2]) / total;
    let l1 = orient(p[0], x, p[2]) / total;
    let l2 = orient(p[0], p[1], x) / total;
    l0 >= -CONTAINS_EPS && l1 >= -CONTAINS_EPS && l2 >= -CONTAINS_EPS
}

/// Barycentric coordinates of `x` in the triangle `p`.
pub(crate) fn barycentric(p: [Point; 3], x: Point) -> [f64; 3] {
    let total = orient(p[0], p[1], p[2]);
    [
        orient(x, p[1], p[2]) / total,
        orient(p[0], x, p[2]) / total,
        orient(p[0], p[1], x) / total,
    ]
}
