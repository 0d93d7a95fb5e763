//! Discrete Hodge decomposition of piecewise constant vector fields.
//!
//! Every `s` in the cell-wise constant space splits uniquely as
//! `s = grad(phi) + g` with `phi` continuous piecewise linear, zero on the
//! boundary, and `g` orthogonal to the gradient of every interior hat
//! function. `phi` is the identity-coefficient discrete Poisson projection of
//! `s`, so the split does not depend on the exponent in which it is measured.

use std::sync::Arc;

use crate::coeff::{check_exponent, PcMatrixField};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_rhs, assemble_stiffness, gradient, lp_norm, solve_spd, P1Function, PcVectorField, SparseSpdSystem,
    DEFAULT_SOLVER_TOL,
};
use crate::geom::{norm, Mat2};
use crate::mesh::Mesh;

#[derive(Debug, Clone)]
pub struct HodgeSplit {
    /// Zero-trace potential `phi`.
    pub potential: P1Function,
    /// Discretely divergence-free remainder `g = s - grad(phi)`.
    pub sigma: PcVectorField,
    /// `max_K |s - grad(phi) - g|` on the cells.
    pub reconstruction_residual: f64,
    /// `max_i |sum_K |K| <g, grad phi_i>|` over interior hats.
    pub orthogonality_residual: f64,
}

impl HodgeSplit {
    pub fn gradient_part(&self) -> Result<PcVectorField> {
        gradient(&self.potential)
    }
}

/// Splits `s` with the default solver tolerance.
pub fn hodge_decompose(s: &PcVectorField) -> Result<HodgeSplit> {
    hodge_decompose_with(s, DEFAULT_SOLVER_TOL)
}

pub fn hodge_decompose_with(s: &PcVectorField, solver_tol: f64) -> Result<HodgeSplit> {
    let mesh: &Arc<Mesh> = s.mesh();
    if mesh.num_interior() == 0 {
        return Err(Error::DomainTooCoarse);
    }
    let laplacian = assemble_stiffness(mesh, &PcMatrixField::constant(mesh.clone(), Mat2::IDENTITY))?;
    let rhs = assemble_rhs(mesh, s)?;
    let sol = solve_spd(&SparseSpdSystem::new(laplacian, rhs)?, solver_tol)?;
    let potential = P1Function::from_interior(mesh.clone(), &sol.x)?;
    let grad = gradient(&potential)?;
    let sigma = s.sub(&grad)?;

    let reconstruction_residual = s
        .values()
        .iter()
        .zip(grad.values())
        .zip(sigma.values())
        .map(|((a, b), c)| norm([a[0] - b[0] - c[0], a[1] - b[1] - c[1]]))
        .fold(0.0, f64::max);
    let orthogonality_residual = assemble_rhs(mesh, &sigma)?.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(HodgeSplit {
        potential,
        sigma,
        reconstruction_residual,
        orthogonality_residual,
    })
}

/// `|grad u|^(p-2) grad u` cell by cell; cells with zero gradient map to zero.
pub fn conjugate_field(u: &P1Function, p: f64) -> Result<PcVectorField> {
    check_exponent("p", p)?;
    Ok(gradient(u)?.map(|v| {
        let m = norm(v);
        if m == 0.0 {
            [0.0, 0.0]
        } else {
            let s = m.powf(p - 2.0);
            [s * v[0], s * v[1]]
        }
    }))
}

pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateGap {
    /// `||g||_{L^q}` for the divergence-free part of the conjugate field.
    pub g_norm: f64,
    /// `g_norm / (|p - 2| ||grad u||_{L^p}^{p/q})`; zero at `p = 2`.
    pub bound_ratio: f64,
}

/// Size of the divergence-free part of the conjugate of `grad u`.
pub fn conjugate_gap(u: &P1Function, p: f64) -> Result<ConjugateGap> {
    conjugate_gap_with(u, p, DEFAULT_SOLVER_TOL)
}

pub fn conjugate_gap_with(u: &P1Function, p: f64, solver_tol: f64) -> Result<ConjugateGap> {
    let grad = gradient(u)?;
    if grad.max_norm() == 0.0 {
        return Err(Error::DegenerateInput("gradient vanishes identically".into()));
    }
    let q = conjugate_exponent(p);
    let split = hodge_decompose_with(&conjugate_field(u, p)?, solver_tol)?;
    let g_norm = lp_norm(&split.sigma, q)?;
    let bound_ratio = if p == 2.0 {
        0.0
    } else {
        g_norm / ((p - 2.0).abs() * lp_norm(&grad, p)?.powf(p / q))
    };
    Ok(ConjugateGap { g_norm, bound_ratio })
}

#[derive(Debug, Clone)]
pub struct FluxSplit {
    /// Potential `psi` of the gradient part of `A_h grad u`.
    pub grad_part: P1Function,
    /// Discretely divergence-free part of `A_h grad u`.
    pub ell: PcVectorField,
    /// `||ell||_{L^p} / ||grad u||_{L^p}`
    pub bound_ratio: f64,
}

/// Hodge split of the discrete flux `A_h grad u`.
pub fn flux_decompose(u: &P1Function, a_h: &PcMatrixField, p: f64) -> Result<FluxSplit> {
    flux_decompose_with(u, a_h, p, DEFAULT_SOLVER_TOL)
}

pub fn flux_decompose_with(u: &P1Function, a_h: &PcMatrixField, p: f64, solver_tol: f64) -> Result<FluxSplit> {
    check_exponent("p", p)?;
    let grad = gradient(u)?;
    let grad_norm = lp_norm(&grad, p)?;
    if grad_norm == 0.0 {
        return Err(Error::DegenerateInput("gradient vanishes identically".into()));
    }
    let split = hodge_decompose_with(&grad.apply(a_h)?, solver_tol)?;
    let bound_ratio = lp_norm(&split.sigma, p)? / grad_norm;
    Ok(FluxSplit {
        grad_part: split.potential,
        ell: split.sigma,
        bound_ratio,
    })
}
