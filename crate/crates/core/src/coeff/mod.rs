//! Coefficient fields, their cell-average projection, and the maximal-function
//! diagnostics used to look at bounded mean oscillation.
//!
//! Upper eigenvalue bounds are never imposed: a field only declares its
//! coercivity constant `alpha`.

mod grid;
mod maximal;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{Mat2, Point};
use crate::mesh::Mesh;
use crate::quadrature::{Cubature, Region, Triangle};

pub use grid::SampledGrid;
pub use maximal::{
    bmo_profile, bmo_seminorm_estimate, dyadic_maximal, john_nirenberg_check, mesh_maximal, DyadicSquare, ScalarField,
    DEFAULT_DYADIC_TOL,
};

/// Default relative tolerance for cell averages of coefficients.
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-8;

type MatrixFn = dyn Fn(Point) -> Mat2 + Send + Sync;

#[derive(Clone)]
pub enum CoefficientKind {
    Constant(Mat2),
    /// `diag(2 + sin(pi x), 2 + cos(pi y))`
    Smooth,
    /// `(1 + beta |ln |x - center||) I`
    LogSingular {
        beta: f64,
        center: Point,
    },
    /// `I` on the lower-left and upper-right quadrants, `kappa I` on the other two.
    Checkerboard {
        kappa: f64,
    },
    SampledGrid(Arc<SampledGrid>),
    /// `base + shift I`
    Shifted {
        base: Arc<CoefficientField>,
        shift: f64,
    },
    Custom(Arc<MatrixFn>),
}

impl fmt::Debug for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientKind::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            CoefficientKind::Smooth => f.write_str("Smooth"),
            CoefficientKind::LogSingular { beta, center } => f
                .debug_struct("LogSingular")
                .field("beta", beta)
                .field("center", center)
                .finish(),
            CoefficientKind::Checkerboard { kappa } => f.debug_struct("Checkerboard").field("kappa", kappa).finish(),
            CoefficientKind::SampledGrid(g) => f.debug_tuple("SampledGrid").field(&g.shape()).finish(),
            CoefficientKind::Shifted { base, shift } => f
                .debug_struct("Shifted")
                .field("base", base.kind())
                .field("shift", shift)
                .finish(),
            CoefficientKind::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Symmetric, coercive matrix-valued coefficient on the unit square.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    kind: CoefficientKind,
    alpha: f64,
}

impl CoefficientField {
    pub fn identity() -> Self {
        Self::constant(Mat2::IDENTITY)
    }

    pub fn scaled_identity(c: f64) -> Self {
        Self::constant(Mat2::scaled_identity(c))
    }

    pub fn constant(m: Mat2) -> Self {
        CoefficientField {
            kind: CoefficientKind::Constant(m),
            alpha: m.min_eigenvalue(),
        }
    }

    pub fn smooth() -> Self {
        CoefficientField {
            kind: CoefficientKind::Smooth,
            alpha: 1.0,
        }
    }

    pub fn log_singular(beta: f64, center: Point) -> Self {
        CoefficientField {
            kind: CoefficientKind::LogSingular { beta, center },
            alpha: 1.0,
        }
    }

    pub fn checkerboard(kappa: f64) -> Self {
        CoefficientField {
            kind: CoefficientKind::Checkerboard { kappa },
            alpha: kappa.min(1.0),
        }
    }

    pub fn sampled(grid: SampledGrid) -> Self {
        let alpha = grid.alpha();
        CoefficientField {
            kind: CoefficientKind::SampledGrid(Arc::new(grid)),
            alpha,
        }
    }

    pub fn from_fn(alpha: f64, f: impl Fn(Point) -> Mat2 + Send + Sync + 'static) -> Self {
        CoefficientField {
            kind: CoefficientKind::Custom(Arc::new(f)),
            alpha,
        }
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `self + c I`, with the coercivity constant shifted accordingly.
    pub fn shifted(&self, c: f64) -> Self {
        CoefficientField {
            kind: CoefficientKind::Shifted {
                base: Arc::new(self.clone()),
                shift: c,
            },
            alpha: self.alpha + c,
        }
    }

    pub fn evaluate(&self, x: Point) -> Mat2 {
        match &self.kind {
            CoefficientKind::Constant(m) => *m,
            CoefficientKind::Smooth => Mat2::diag(2.0 + (PI * x[0]).sin(), 2.0 + (PI * x[1]).cos()),
            CoefficientKind::LogSingular { beta, center } => {
                let r = (x[0] - center[0]).hypot(x[1] - center[1]);
                Mat2::scaled_identity(1.0 + beta * r.ln().abs())
            }
            CoefficientKind::Checkerboard { kappa } => {
                if (x[0] >= 0.5) != (x[1] >= 0.5) {
                    Mat2::scaled_identity(*kappa)
                } else {
                    Mat2::IDENTITY
                }
            }
            CoefficientKind::SampledGrid(g) => g.evaluate(x),
            CoefficientKind::Shifted { base, shift } => base.evaluate(x) + Mat2::scaled_identity(*shift),
            CoefficientKind::Custom(f) => f(x),
        }
    }

    /// Checks symmetry and the declared coercivity at the given points.
    pub fn verify_at(&self, points: impl IntoIterator<Item = Point>) -> Result<()> {
        for x in points {
            let m = self.evaluate(x);
            if !m.is_finite() {
                return Err(Error::Singularity { point: x });
            }
            if !m.is_symmetric() {
                return Err(Error::Invariant(format!("coefficient not symmetric at {x:?}")));
            }
            let lam = m.min_eigenvalue();
            if lam < self.alpha * (1.0 - 1e-12) {
                return Err(Error::Invariant(format!(
                    "smallest eigenvalue {lam} below declared alpha {} at {x:?}",
                    self.alpha
                )));
            }
        }
        Ok(())
    }

    /// Spot check on the cubature nodes of every cell.
    pub fn verify_on_mesh(&self, mesh: &Mesh) -> Result<()> {
        let mut nodes = Vec::new();
        for k in 0..mesh.num_cells() {
            Triangle(mesh.cell_vertices(k)).for_each_node(|x, _| nodes.push(x));
        }
        self.verify_at(nodes)
    }
}

/// Cell-wise constant matrix field aligned with a mesh.
#[derive(Debug, Clone)]
pub struct PcMatrixField {
    mesh: Arc<Mesh>,
    values: Vec<Mat2>,
}

impl PcMatrixField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<Mat2>) -> Result<Self> {
        if values.len() != mesh.num_cells() {
            return Err(Error::Alignment {
                expected: mesh.num_cells(),
                found: values.len(),
            });
        }
        Ok(PcMatrixField { mesh, values })
    }

    pub fn constant(mesh: Arc<Mesh>, m: Mat2) -> Self {
        let values = vec![m; mesh.num_cells()];
        PcMatrixField { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[Mat2] {
        &self.values
    }

    pub fn cell(&self, k: usize) -> Mat2 {
        self.values[k]
    }

    pub fn scaled(&self, c: f64) -> Self {
        PcMatrixField {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|m| *m * c).collect(),
        }
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if (1e-12..=1e-4).contains(&rel_tol) {
        Ok(())
    } else {
        Err(Error::bounds("relative tolerance", rel_tol, "[1e-12, 1e-4]"))
    }
}

pub(crate) fn check_exponent(what: &'static str, p: f64) -> Result<()> {
    if (1.1..=10.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::bounds(what, p, "[1.1, 10]"))
    }
}

/// Cell averages `A_h|K = mean_K A`.
pub fn project_coefficient(a: &CoefficientField, mesh: &Arc<Mesh>, rel_tol: f64) -> Result<PcMatrixField> {
    check_rel_tol(rel_tol)?;
    let cubature = Cubature::new(rel_tol);
    let values = (0..mesh.num_cells())
        .map(|k| {
            mesh.check_cell(k)?;
            cell_average(a, Triangle(mesh.cell_vertices(k)), &cubature)
        })
        .collect::<Result<Vec<_>>>()?;
    PcMatrixField::new(mesh.clone(), values)
}

// Constants and constant shifts are averaged exactly rather than by cubature.
fn cell_average(a: &CoefficientField, cell: Triangle, cubature: &Cubature) -> Result<Mat2> {
    match a.kind() {
        CoefficientKind::Constant(m) => Ok(*m),
        CoefficientKind::Shifted { base, shift } => {
            Ok(cell_average(base, cell, cubature)? + Mat2::scaled_identity(*shift))
        }
        _ => Ok(Mat2::from_array(cubature.average(cell, |x| a.evaluate(x).to_array())?)),
    }
}

/// Smallest eigenvalue over all cells.
pub fn coercivity_of_projection(a_h: &PcMatrixField) -> Result<f64> {
    let mut lo = f64::INFINITY;
    for (k, m) in a_h.values.iter().enumerate() {
        if !m.is_symmetric() {
            return Err(Error::Invariant(format!("cell {k} value is not symmetric: {m:?}")));
        }
        lo = lo.min(m.min_eigenvalue());
    }
    Ok(lo)
}

/// `||A - A_h||_{L^r}` with the Frobenius norm pointwise.
pub fn coefficient_error(a: &CoefficientField, a_h: &PcMatrixField, r: f64, rel_tol: f64) -> Result<f64> {
    check_exponent("r", r)?;
    check_rel_tol(rel_tol)?;
    let mesh = a_h.mesh();
    let cubature = Cubature::new(rel_tol);
    let mut total = 0.0;
    for k in 0..mesh.num_cells() {
        let ak = a_h.cell(k);
        let [v] = cubature.integrate(Triangle(mesh.cell_vertices(k)), |x| {
            [(a.evaluate(x) - ak).frobenius().powf(r)]
        })?;
        total += v;
    }
    Ok(total.powf(1.0 / r))
}
