//! Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::fem::sparse::SparseSpdSystem;

pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `||b - A x|| / ||b||`, recomputed from the final iterate.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves to `||b - A x||_2 <= tol ||b||_2` from a zero initial guess, with at
/// most `50 n` iterations.
pub fn solve_spd(system: &SparseSpdSystem, tol: f64) -> Result<CgSolution> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::bounds("solver tolerance", tol, "[1e-14, 1e-6]"));
    }
    let a = &system.matrix;
    let b = &system.rhs;
    let n = a.dim();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let diag = a.diagonal();
    if let Some(&d) = diag.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::NotSpd {
            iteration: 0,
            curvature: d,
        });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let max_iter = 50 * n.max(1);

    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    loop {
        let res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            // guard against drift of the recursive residual
            a.mul_vec_into(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            let true_res = dot(&r, &r).sqrt() / b_norm;
            if true_res <= tol {
                return Ok(CgSolution {
                    x,
                    iterations,
                    relative_residual: true_res,
                });
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual: res,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::NotSpd {
                iteration: iterations,
                curvature,
            });
        }
        let step = rz / curvature;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
}
