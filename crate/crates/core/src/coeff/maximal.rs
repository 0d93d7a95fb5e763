//! Maximal functions and mean-oscillation estimates.
//!
//! Suprema over "all cubes containing x" are replaced by the finite family of
//! closed dyadic subsquares of the unit square down to a given depth, so every
//! quantity here is a lower bound for its continuous counterpart.

use std::fmt;
use std::sync::Arc;

use crate::coeff::CoefficientField;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::Mesh;
use crate::quadrature::{Cubature, Square, Triangle};

/// Default relative tolerance for dyadic-square averages.
pub const DEFAULT_DYADIC_TOL: f64 = 1e-8;

const MAX_DYADIC_DEPTH: u32 = 10;
const MAX_BMO_DEPTH: u32 = 8;
const MAX_SAMPLING_DEPTH: u32 = 12;

/// Real function on the unit square.
#[derive(Clone)]
pub struct ScalarField {
    f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField")
    }
}

impl ScalarField {
    pub fn new(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_| c)
    }

    /// `ln(1 / |x - center|)`
    pub fn log_distance(center: Point) -> Self {
        ScalarField::new(move |x| -(x[0] - center[0]).hypot(x[1] - center[1]).ln())
    }

    /// Indicator of the closed axis-aligned box `[lo, hi]`.
    pub fn indicator(lo: Point, hi: Point) -> Self {
        ScalarField::new(move |x| {
            if x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1] {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Entry `(i, j)` of a coefficient field.
    pub fn coefficient_entry(a: &CoefficientField, i: usize, j: usize) -> Self {
        let a = a.clone();
        ScalarField::new(move |x| a.evaluate(x).entry(i, j))
    }

    pub fn evaluate(&self, x: Point) -> f64 {
        (self.f)(x)
    }
}

/// Dyadic square of side `2^-level`, index `(ix, iy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicSquare {
    pub level: u32,
    pub ix: usize,
    pub iy: usize,
}

impl DyadicSquare {
    pub const UNIT: DyadicSquare = DyadicSquare { level: 0, ix: 0, iy: 0 };

    pub fn new(level: u32, ix: usize, iy: usize) -> Result<Self> {
        let n = 1usize << level;
        if ix >= n || iy >= n {
            return Err(Error::bounds("dyadic index", format!("({ix}, {iy})"), format!("< {n}")));
        }
        Ok(DyadicSquare { level, ix, iy })
    }

    pub fn square(&self) -> Square {
        Square::dyadic(self.level, self.ix, self.iy)
    }

    /// Closed dyadic squares of side `2^-level` containing `x`.
    pub fn containing(level: u32, x: Point) -> Vec<DyadicSquare> {
        let n = 1usize << level;
        let idx = |t: f64| -> Vec<usize> {
            let s = t * n as f64;
            let f = s.floor() as isize;
            [f - 1, f]
                .into_iter()
                .filter(|&c| c >= 0 && (c as usize) < n)
                .filter(|&c| s >= c as f64 - 1e-12 && s <= (c + 1) as f64 + 1e-12)
                .map(|c| c as usize)
                .collect()
        };
        let mut out = Vec::new();
        for iy in idx(x[1]) {
            for ix in idx(x[0]) {
                out.push(DyadicSquare { level, ix, iy });
            }
        }
        out
    }
}

fn check_point(x: Point) -> Result<()> {
    if (0.0..=1.0).contains(&x[0]) && (0.0..=1.0).contains(&x[1]) {
        Ok(())
    } else {
        Err(Error::bounds("point", format!("({}, {})", x[0], x[1]), "[0, 1]^2"))
    }
}

fn square_cubature(rel_tol: f64) -> Cubature {
    // 16 leaves of 9 nodes each before any adaptivity
    Cubature::new(rel_tol).with_min_depth(2)
}

/// Largest cell mean of `|w|` over the cells whose closure contains `x`.
pub fn mesh_maximal(w: &ScalarField, mesh: &Mesh, x: Point, rel_tol: f64) -> Result<f64> {
    check_point(x)?;
    let cubature = Cubature::new(rel_tol);
    let mut best: f64 = 0.0;
    let cells = mesh.cells_containing(x);
    if cells.is_empty() {
        return Err(Error::bounds(
            "point",
            format!("({}, {})", x[0], x[1]),
            "inside the mesh",
        ));
    }
    for k in cells {
        let avg = cubature.average_scalar(Triangle(mesh.cell_vertices(k)), |z| w.evaluate(z).abs())?;
        best = best.max(avg);
    }
    Ok(best)
}

/// Largest mean of `|w|` over the dyadic squares of side `2^-j`, `j <= depth`,
/// whose closure contains `x`.
pub fn dyadic_maximal(w: &ScalarField, depth: u32, x: Point, rel_tol: f64) -> Result<f64> {
    if depth > MAX_DYADIC_DEPTH {
        return Err(Error::bounds("dyadic depth", depth, format!("0..={MAX_DYADIC_DEPTH}")));
    }
    check_point(x)?;
    let cubature = square_cubature(rel_tol);
    let mut best: f64 = 0.0;
    for level in 0..=depth {
        for q in DyadicSquare::containing(level, x) {
            best = best.max(cubature.average_scalar(q.square(), |z| w.evaluate(z).abs())?);
        }
    }
    Ok(best)
}

/// Mean oscillation `mean_Q |w - w_Q|` of `w` on one square.
pub(crate) fn mean_oscillation(w: &ScalarField, q: Square, rel_tol: f64) -> Result<f64> {
    let cubature = square_cubature(rel_tol);
    let mean = cubature.average_scalar(q, |z| w.evaluate(z))?;
    cubature.average_scalar(q, |z| (w.evaluate(z) - mean).abs())
}

/// Running maximum of the mean oscillation over dyadic squares, one entry per
/// depth `0..=depth`.
pub fn bmo_profile(w: &ScalarField, depth: u32, rel_tol: f64) -> Result<Vec<f64>> {
    if depth > MAX_BMO_DEPTH {
        return Err(Error::bounds("BMO depth", depth, format!("0..={MAX_BMO_DEPTH}")));
    }
    let mut out = Vec::with_capacity(depth as usize + 1);
    let mut best: f64 = 0.0;
    for level in 0..=depth {
        let n = 1usize << level;
        for iy in 0..n {
            for ix in 0..n {
                best = best.max(mean_oscillation(w, Square::dyadic(level, ix, iy), rel_tol)?);
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Lower bound for `|w|_BMO` from the dyadic squares down to `depth`;
/// nondecreasing in `depth`.
pub fn bmo_seminorm_estimate(w: &ScalarField, depth: u32, rel_tol: f64) -> Result<f64> {
    Ok(*bmo_profile(w, depth, rel_tol)?
        .last()
        .expect("profile has depth + 1 entries"))
}

/// Fractions `|{x in Q : |w(x) - w_Q| > lambda}| / |Q|` estimated on the
/// `2^depth x 2^depth` cell-centred sample grid of `Q`.
///
/// Non-finite samples are skipped; more than 0.1% of them is an error.
pub fn john_nirenberg_check(
    w: &ScalarField,
    q: DyadicSquare,
    lambdas: &[f64],
    depth: u32,
    rel_tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if depth > MAX_SAMPLING_DEPTH {
        return Err(Error::bounds(
            "sampling depth",
            depth,
            format!("0..={MAX_SAMPLING_DEPTH}"),
        ));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::bounds("lambda", l, "> 0"));
    }
    let sq = q.square();
    let mean = square_cubature(rel_tol).average_scalar(sq, |z| w.evaluate(z))?;
    let n = 1usize << depth;
    let step = sq.side / n as f64;
    let mut deviations = Vec::with_capacity(n * n);
    let mut skipped = 0usize;
    for j in 0..n {
        for i in 0..n {
            let x = [
                sq.origin[0] + (i as f64 + 0.5) * step,
                sq.origin[1] + (j as f64 + 0.5) * step,
            ];
            let v = w.evaluate(x);
            if v.is_finite() {
                deviations.push((v - mean).abs());
            } else {
                skipped += 1;
            }
        }
    }
    if skipped * 1000 > n * n {
        return Err(Error::DegenerateInput(format!(
            "{skipped} of {} samples are not finite",
            n * n
        )));
    }
    let valid = deviations.len() as f64;
    Ok(lambdas
        .iter()
        .map(|&l| (l, deviations.iter().filter(|&&d| d > l).count() as f64 / valid))
        .collect())
}
