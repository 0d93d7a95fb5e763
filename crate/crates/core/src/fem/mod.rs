//! Continuous piecewise linear Galerkin discretisation with homogeneous
//! Dirichlet conditions.
//!
//! The discrete problem is: find `u_h` with zero trace such that
//! `sum_K |K| <A_h|K grad u_h, grad z> = sum_K |K| <f_h|K, grad z>` for every
//! interior hat function `z`. Both `A_h` and `f_h` are cell averages, so every
//! assembled integral is exact.

mod cg;
mod sparse;

use std::fmt;
use std::sync::Arc;

use crate::coeff::{
    coercivity_of_projection, project_coefficient, CoefficientField, PcMatrixField, DEFAULT_PROJECTION_TOL,
};
use crate::error::{Error, Result};
use crate::geom::{dot, norm, Point, Vec2};
use crate::mesh::{barycentric, Mesh};
use crate::quadrature::{Cubature, Triangle};

pub use cg::{solve_spd, CgSolution, DEFAULT_SOLVER_TOL};
pub use sparse::{CsrMatrix, SparseSpdSystem};

/// Vector-valued function on the unit square (data `f` of the problem).
#[derive(Clone)]
pub struct VectorField {
    f: Arc<dyn Fn(Point) -> Vec2 + Send + Sync>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField")
    }
}

impl VectorField {
    pub fn new(f: impl Fn(Point) -> Vec2 + Send + Sync + 'static) -> Self {
        VectorField { f: Arc::new(f) }
    }

    pub fn constant(v: Vec2) -> Self {
        VectorField::new(move |_| v)
    }

    /// The gradient of a P1 function, as a pointwise field.
    pub fn from_p1_gradient(u: &P1Function) -> Self {
        let u = u.clone();
        VectorField::new(move |x| u.gradient_at(x))
    }

    pub fn evaluate(&self, x: Point) -> Vec2 {
        (self.f)(x)
    }
}

/// Cell-wise constant vector field.
#[derive(Debug, Clone)]
pub struct PcVectorField {
    mesh: Arc<Mesh>,
    values: Vec<Vec2>,
}

impl PcVectorField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<Vec2>) -> Result<Self> {
        if values.len() != mesh.num_cells() {
            return Err(Error::Alignment {
                expected: mesh.num_cells(),
                found: values.len(),
            });
        }
        Ok(PcVectorField { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let values = vec![[0.0; 2]; mesh.num_cells()];
        PcVectorField { mesh, values }
    }

    pub fn constant(mesh: Arc<Mesh>, v: Vec2) -> Self {
        let values = vec![v; mesh.num_cells()];
        PcVectorField { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn cell(&self, k: usize) -> Vec2 {
        self.values[k]
    }

    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        PcVectorField {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| [c * v[0], c * v[1]])
    }

    fn zip_with(&self, other: &PcVectorField, f: impl Fn(Vec2, Vec2) -> Vec2) -> Result<Self> {
        check_alignment(&self.mesh, other.values.len())?;
        Ok(PcVectorField {
            mesh: self.mesh.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &PcVectorField) -> Result<Self> {
        self.zip_with(other, |a, b| [a[0] + b[0], a[1] + b[1]])
    }

    pub fn sub(&self, other: &PcVectorField) -> Result<Self> {
        self.zip_with(other, |a, b| [a[0] - b[0], a[1] - b[1]])
    }

    /// `A_h v`, cell by cell.
    pub fn apply(&self, a_h: &PcMatrixField) -> Result<Self> {
        check_alignment(&self.mesh, a_h.values().len())?;
        Ok(PcVectorField {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(a_h.values())
                .map(|(&v, m)| m.mul_vec(v))
                .collect(),
        })
    }

    /// Largest Euclidean length over the cells.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|&v| norm(v)).fold(0.0, f64::max)
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    /// `sum_K |K| <self, other>`
    pub fn inner(&self, other: &PcVectorField) -> Result<f64> {
        check_alignment(&self.mesh, other.values.len())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.mesh.cell_areas())
            .map(|((&a, &b), &area)| area * dot(a, b))
            .sum())
    }
}

fn check_alignment(mesh: &Mesh, found: usize) -> Result<()> {
    if found == mesh.num_cells() {
        Ok(())
    } else {
        Err(Error::Alignment {
            expected: mesh.num_cells(),
            found,
        })
    }
}

/// Continuous piecewise linear function given by its vertex values.
#[derive(Debug, Clone)]
pub struct P1Function {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    zero_trace: bool,
}

impl P1Function {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>, zero_trace: bool) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::Alignment {
                expected: mesh.num_vertices(),
                found: values.len(),
            });
        }
        if zero_trace {
            if let Some(v) = (0..values.len()).find(|&v| mesh.boundary_flags()[v] && values[v] != 0.0) {
                return Err(Error::Invariant(format!(
                    "zero-trace function has value {} at boundary vertex {v}",
                    values[v]
                )));
            }
        }
        Ok(P1Function {
            mesh,
            values,
            zero_trace,
        })
    }

    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let values = vec![0.0; mesh.num_vertices()];
        P1Function {
            mesh,
            values,
            zero_trace: true,
        }
    }

    /// Zero-trace function from its interior coefficients.
    pub fn from_interior(mesh: Arc<Mesh>, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != mesh.num_interior() {
            return Err(Error::Alignment {
                expected: mesh.num_interior(),
                found: coefficients.len(),
            });
        }
        let mut values = vec![0.0; mesh.num_vertices()];
        for (&v, &c) in mesh.interior_vertices().iter().zip(coefficients) {
            values[v] = c;
        }
        Ok(P1Function {
            mesh,
            values,
            zero_trace: true,
        })
    }

    /// Nodal interpolant. With `zero_trace` the boundary values are set to zero.
    pub fn interpolate(mesh: Arc<Mesh>, f: impl Fn(Point) -> f64, zero_trace: bool) -> Self {
        let values = mesh
            .vertices()
            .iter()
            .zip(mesh.boundary_flags())
            .map(|(&x, &b)| if zero_trace && b { 0.0 } else { f(x) })
            .collect();
        P1Function {
            mesh,
            values,
            zero_trace,
        }
    }

    /// Hat function of an interior vertex.
    pub fn hat(mesh: Arc<Mesh>, vertex: usize) -> Result<Self> {
        if mesh.interior_index(vertex).is_none() {
            return Err(Error::Invariant(format!("vertex {vertex} is not interior")));
        }
        let mut values = vec![0.0; mesh.num_vertices()];
        values[vertex] = 1.0;
        Ok(P1Function {
            mesh,
            values,
            zero_trace: true,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn zero_trace(&self) -> bool {
        self.zero_trace
    }

    pub fn interior_coefficients(&self) -> Vec<f64> {
        self.mesh.interior_vertices().iter().map(|&v| self.values[v]).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        P1Function {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            zero_trace: self.zero_trace,
        }
    }

    pub fn add(&self, other: &P1Function) -> Result<Self> {
        if other.values.len() != self.values.len() {
            return Err(Error::Alignment {
                expected: self.values.len(),
                found: other.values.len(),
            });
        }
        Ok(P1Function {
            mesh: self.mesh.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            zero_trace: self.zero_trace && other.zero_trace,
        })
    }

    fn cell_gradient(&self, k: usize) -> Result<Vec2> {
        let g = self.mesh.hat_gradients(k)?;
        let c = self.mesh.cells()[k];
        let mut out = [0.0; 2];
        for i in 0..3 {
            let u = self.values[c[i]];
            out[0] += u * g[i][0];
            out[1] += u * g[i][1];
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Result<PcVectorField> {
        gradient(self)
    }

    /// Value at `x`, found through a containing cell.
    pub fn evaluate(&self, x: Point) -> Option<f64> {
        let k = *self.mesh.cells_containing(x).first()?;
        let lam = barycentric(self.mesh.cell_vertices(k), x);
        let c = self.mesh.cells()[k];
        Some((0..3).map(|i| lam[i] * self.values[c[i]]).sum())
    }

    /// Gradient on the first cell containing `x` (zero outside the mesh).
    pub fn gradient_at(&self, x: Point) -> Vec2 {
        match self.mesh.cells_containing(x).first() {
            Some(&k) => self.cell_gradient(k).unwrap_or([f64::NAN; 2]),
            None => [0.0; 2],
        }
    }
}

/// Cell-wise gradient of a P1 function.
pub fn gradient(u: &P1Function) -> Result<PcVectorField> {
    let values = (0..u.mesh.num_cells())
        .map(|k| u.cell_gradient(k))
        .collect::<Result<Vec<_>>>()?;
    Ok(PcVectorField {
        mesh: u.mesh.clone(),
        values,
    })
}

/// Cell averages of a vector field.
pub fn project_rhs(f: &VectorField, mesh: &Arc<Mesh>, rel_tol: f64) -> Result<PcVectorField> {
    let cubature = Cubature::new(rel_tol);
    let values = (0..mesh.num_cells())
        .map(|k| {
            mesh.check_cell(k)?;
            cubature.average(Triangle(mesh.cell_vertices(k)), |x| f.evaluate(x))
        })
        .collect::<Result<Vec<_>>>()?;
    PcVectorField::new(mesh.clone(), values)
}

/// `(sum_K |K| |v_K|^p)^(1/p)`, Euclidean length per cell.
pub fn lp_norm(field: &PcVectorField, p: f64) -> Result<f64> {
    crate::coeff::check_exponent("p", p)?;
    let s: f64 = field
        .values
        .iter()
        .zip(field.mesh.cell_areas())
        .map(|(&v, &area)| area * norm(v).powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}

/// Stiffness matrix over interior unknowns,
/// `M[i][j] = sum_K |K| <A_h|K grad phi_j, grad phi_i>`.
pub fn assemble_stiffness(mesh: &Mesh, a_h: &PcMatrixField) -> Result<CsrMatrix> {
    check_alignment(mesh, a_h.values().len())?;
    let alpha = coercivity_of_projection(a_h)?;
    if !(alpha > 0.0) {
        return Err(Error::NotCoercive { min_eigenvalue: alpha });
    }
    let mut triplets = Vec::with_capacity(9 * mesh.num_cells());
    for k in 0..mesh.num_cells() {
        let g = mesh.hat_gradients(k)?;
        let area = mesh.cell_area(k);
        let a = a_h.cell(k);
        let c = mesh.cells()[k];
        let flux = g.map(|gj| a.mul_vec(gj));
        for i in 0..3 {
            let Some(ri) = mesh.interior_index(c[i]) else { continue };
            for j in 0..3 {
                let Some(rj) = mesh.interior_index(c[j]) else { continue };
                // symmetrised so that M[i][j] and M[j][i] accumulate identical terms
                let v = if i <= j {
                    area * dot(flux[j], g[i])
                } else {
                    area * dot(flux[i], g[j])
                };
                triplets.push((ri, rj, v));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.num_interior(), triplets))
}

/// `b[i] = sum_K |K| <f_h|K, grad phi_i|K>`
pub fn assemble_rhs(mesh: &Mesh, f_h: &PcVectorField) -> Result<Vec<f64>> {
    check_alignment(mesh, f_h.values.len())?;
    let mut b = vec![0.0; mesh.num_interior()];
    for k in 0..mesh.num_cells() {
        let g = mesh.hat_gradients(k)?;
        let area = mesh.cell_area(k);
        let c = mesh.cells()[k];
        for i in 0..3 {
            if let Some(ri) = mesh.interior_index(c[i]) {
                b[ri] += area * dot(f_h.values[k], g[i]);
            }
        }
    }
    Ok(b)
}

/// Residuals `sum_K |K| <A_h grad u - f_h, grad phi_i>` for every interior hat.
pub fn galerkin_residual(u: &P1Function, a_h: &PcMatrixField, f_h: &PcVectorField) -> Result<Vec<f64>> {
    let flux = gradient(u)?.apply(a_h)?.sub(f_h)?;
    assemble_rhs(u.mesh(), &flux)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub projection_tol: f64,
    pub solver_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            projection_tol: DEFAULT_PROJECTION_TOL,
            solver_tol: DEFAULT_SOLVER_TOL,
        }
    }
}

/// Everything produced by [`solve_bvp`].
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub solution: P1Function,
    pub coefficient: PcMatrixField,
    pub rhs: PcVectorField,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves the discrete problem with already projected data.
pub fn solve_projected(a_h: &PcMatrixField, f_h: &PcVectorField, solver_tol: f64) -> Result<(P1Function, CgSolution)> {
    let mesh = a_h.mesh();
    let matrix = assemble_stiffness(mesh, a_h)?;
    let rhs = assemble_rhs(mesh, f_h)?;
    let system = SparseSpdSystem::new(matrix, rhs)?;
    let sol = solve_spd(&system, solver_tol)?;
    let u = P1Function::from_interior(mesh.clone(), &sol.x)?;
    Ok((u, sol))
}

/// Projects `A` and `f` to cell averages, assembles and solves.
pub fn solve_bvp(mesh: &Arc<Mesh>, a: &CoefficientField, f: &VectorField, opts: SolveOptions) -> Result<BvpSolution> {
    if mesh.num_interior() == 0 {
        return Err(Error::DomainTooCoarse);
    }
    let coefficient = project_coefficient(a, mesh, opts.projection_tol)?;
    let rhs = project_rhs(f, mesh, opts.projection_tol)?;
    let (solution, cg) = solve_projected(&coefficient, &rhs, opts.solver_tol)?;
    Ok(BvpSolution {
        solution,
        coefficient,
        rhs,
        iterations: cg.iterations,
        relative_residual: cg.relative_residual,
    })
}
