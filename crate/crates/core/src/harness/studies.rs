use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::{
    bmo_profile, coefficient_error, coercivity_of_projection, dyadic_maximal, john_nirenberg_check, mesh_maximal,
    project_coefficient, DyadicSquare, ScalarField,
};
use crate::error::{Error, Result};
use crate::fem::{gradient, lp_norm, solve_bvp, P1Function, PcVectorField, SolveOptions, VectorField};
use crate::geom::norm;
use crate::harness::config::{ExperimentConfig, Reference, StudyKind};
use crate::harness::report::{Row, StudyReport, Table, Value};
use crate::hodge::{conjugate_gap_with, flux_decompose_with, hodge_decompose_with};
use crate::mesh::Mesh;
use crate::quadrature::{Cubature, Triangle};

/// Side length of the sample grid for the maximal-function comparison.
pub const MAXIMAL_GRID: usize = 17;

/// The coarse function `u` represented on the nested mesh `fine`.
///
/// Both meshes must belong to the structured family with `fine` at least as
/// deep; the result is the same piecewise-affine function, evaluated at the
/// fine vertices.
pub fn prolong(u: &P1Function, fine: &Arc<Mesh>) -> Result<P1Function> {
    let coarse = u.mesh();
    if !coarse.is_structured() || !fine.is_structured() || fine.level() < coarse.level() {
        return Err(Error::Lineage {
            coarse: coarse.level(),
            fine: fine.level(),
        });
    }
    let values = fine
        .vertices()
        .iter()
        .zip(fine.boundary_flags())
        .map(|(&x, &b)| {
            if b && u.zero_trace() {
                Ok(0.0)
            } else {
                u.evaluate(x).ok_or(Error::Lineage {
                    coarse: coarse.level(),
                    fine: fine.level(),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    P1Function::new(fine.clone(), values, u.zero_trace())
}

/// `(sum_K int_K |v(x) - v_K|^p)^(1/p)` for a continuous field `v` against a
/// cell-wise constant one.
pub fn field_distance(v: &VectorField, v_h: &PcVectorField, p: f64, rel_tol: f64) -> Result<f64> {
    let mesh = v_h.mesh();
    let cubature = Cubature::new(rel_tol);
    let mut total = 0.0;
    for k in 0..mesh.num_cells() {
        let c = v_h.cell(k);
        let [s] = cubature.integrate(Triangle(mesh.cell_vertices(k)), |x| {
            let y = v.evaluate(x);
            [norm([y[0] - c[0], y[1] - c[1]]).powf(p)]
        })?;
        total += s;
    }
    Ok(total.powf(1.0 / p))
}

fn check_kind(cfg: &ExperimentConfig, kind: StudyKind) -> Result<()> {
    cfg.validate()?;
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "config describes a {:?} study, not {kind:?}",
            cfg.kind
        )));
    }
    Ok(())
}

fn options(cfg: &ExperimentConfig) -> SolveOptions {
    SolveOptions {
        projection_tol: cfg.tolerances.quadrature,
        solver_tol: cfg.tolerances.solver,
    }
}

fn mesh(level: u32) -> Result<Arc<Mesh>> {
    Ok(Arc::new(Mesh::uniform(level)?))
}

/// Runs `f` on every configured level, spread over `cfg.workers` threads.
/// Results come back in level order together with per-level wall times.
fn map_levels<T: Send>(
    cfg: &ExperimentConfig,
    f: impl Fn(u32) -> Result<T> + Sync,
) -> Result<(Vec<T>, Vec<(u32, f64)>)> {
    let levels: Vec<u32> = cfg.levels.iter().collect();
    let timed = |l: u32| {
        let t = Instant::now();
        f(l).map(|v| (v, t.elapsed().as_secs_f64()))
    };
    let results: Vec<Result<(T, f64)>> = if cfg.workers <= 1 || levels.len() <= 1 {
        levels.iter().map(|&l| timed(l)).collect()
    } else {
        let workers = cfg.workers.min(levels.len());
        let mut slots: Vec<Option<Result<(T, f64)>>> = (0..levels.len()).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let levels = &levels;
                    let timed = &timed;
                    s.spawn(move || {
                        (w..levels.len())
                            .step_by(workers)
                            .map(|i| (i, timed(levels[i])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("every level is assigned")).collect()
    };
    let mut values = Vec::with_capacity(levels.len());
    let mut timings = Vec::with_capacity(levels.len());
    for (l, r) in levels.into_iter().zip(results) {
        let (v, t) = r?;
        values.push(v);
        timings.push((l, t));
    }
    Ok((values, timings))
}

/// `log2(e_L / e_{L+1})` written on the finer row.
fn fill_orders(rows: &mut [Row], value: impl Fn(&Row) -> Option<f64>) {
    for i in 1..rows.len() {
        if let (Some(a), Some(b)) = (value(&rows[i - 1]), value(&rows[i])) {
            if a > 0.0 && b > 0.0 {
                rows[i].order = Some((a / b).log2());
            }
        }
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then_some(num / den)
}

/// Norm ratio `||grad u_h||_p / ||f_h||_p` per level, with the data
/// oscillation `||f - f_h||_p`, the coefficient error and the empirical
/// constants of the conjugate and flux decompositions.
pub fn run_stability_study(cfg: &ExperimentConfig) -> Result<StudyReport> {
    check_kind(cfg, StudyKind::Stability)?;
    let a = cfg.coefficient()?;
    let f = cfg.rhs_field();
    let p = cfg.p;
    let tol = cfg.tolerances;
    let (results, timings) = map_levels(cfg, |level| {
        let m = mesh(level)?;
        let sol = solve_bvp(&m, &a, &f, options(cfg))?;
        let grad = gradient(&sol.solution)?;
        let mut row = Row::new(level, m.num_cells());
        let grad_lp = lp_norm(&grad, p)?;
        let f_lp = lp_norm(&sol.rhs, p)?;
        row.grad_lp = Some(grad_lp);
        row.f_lp = Some(f_lp);
        row.stability_ratio = ratio(grad_lp, f_lp);
        row.coeff_err_l2 = Some(coefficient_error(&a, &sol.coefficient, 2.0, tol.quadrature)?);
        if grad_lp > 0.0 {
            row.conj_gap_ratio = Some(conjugate_gap_with(&sol.solution, p, tol.solver)?.bound_ratio);
            row.flux_ratio = Some(flux_decompose_with(&sol.solution, &sol.coefficient, p, tol.solver)?.bound_ratio);
        }
        let extra = vec![
            Value::Int(level as i64),
            Value::Real(field_distance(&f, &sol.rhs, p, tol.quadrature)?),
            Value::Int(sol.iterations as i64),
            Value::Real(sol.relative_residual),
        ];
        Ok((row, extra))
    })?;
    let mut table = Table::new(
        "solver",
        &["level", "data_oscillation_lp", "iterations", "relative_residual"],
    );
    let mut rows = Vec::new();
    for (row, extra) in results {
        rows.push(row);
        table.rows.push(extra);
    }
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        tables: vec![table],
        timings,
    })
}

/// Gradient error `||grad(u_ref - u_h)||_{p_hat}` per level against a
/// fine-grid reference (through exact prolongation) or the exact solution.
pub fn run_convergence_study(cfg: &ExperimentConfig) -> Result<StudyReport> {
    check_kind(cfg, StudyKind::Convergence)?;
    let a = cfg.coefficient()?;
    let f = cfg.rhs_field();
    let (p, p_hat) = (cfg.p, cfg.p_hat);
    let t0 = Instant::now();
    let reference = match cfg.reference {
        Reference::FineGrid => {
            let fine = mesh(cfg.reference_level())?;
            let sol = solve_bvp(&fine, &a, &f, options(cfg))?;
            Some(gradient(&sol.solution)?)
        }
        Reference::Exact => None,
    };
    let reference_time = t0.elapsed().as_secs_f64();
    let exact = cfg.exact_scale().map(|c| {
        let f = f.clone();
        VectorField::new(move |x| {
            let v = f.evaluate(x);
            [v[0] / c, v[1] / c]
        })
    });
    let (mut rows, mut timings) = map_levels(cfg, |level| {
        let m = mesh(level)?;
        let sol = solve_bvp(&m, &a, &f, options(cfg))?;
        let grad = gradient(&sol.solution)?;
        let mut row = Row::new(level, m.num_cells());
        let grad_lp = lp_norm(&grad, p)?;
        let f_lp = lp_norm(&sol.rhs, p)?;
        row.grad_lp = Some(grad_lp);
        row.f_lp = Some(f_lp);
        row.stability_ratio = ratio(grad_lp, f_lp);
        row.err_phat = Some(match (&reference, &exact) {
            (Some(g_ref), _) => {
                let fine = g_ref.mesh();
                let g = gradient(&prolong(&sol.solution, fine)?)?;
                lp_norm(&g_ref.sub(&g)?, p_hat)?
            }
            (None, Some(exact)) => field_distance(exact, &grad, p_hat, cfg.tolerances.quadrature)?,
            (None, None) => unreachable!("validated config has a reference"),
        });
        Ok(row)
    })?;
    fill_orders(&mut rows, |r| r.err_phat);
    if reference.is_some() {
        timings.push((cfg.reference_level(), reference_time));
    }
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        tables: vec![],
        timings,
    })
}

/// `||A - A_h||_{L^r}` per level, with observed order and the coercivity of
/// the projection. The `coeff_err_l2` column carries the configured `r`.
pub fn run_coeff_decay_study(cfg: &ExperimentConfig) -> Result<StudyReport> {
    check_kind(cfg, StudyKind::CoeffDecay)?;
    let a = cfg.coefficient()?;
    let tol = cfg.tolerances.quadrature;
    let (results, timings) = map_levels(cfg, |level| {
        let m = mesh(level)?;
        let a_h = project_coefficient(&a, &m, tol)?;
        let mut row = Row::new(level, m.num_cells());
        row.coeff_err_l2 = Some(coefficient_error(&a, &a_h, cfg.r, tol)?);
        let extra = vec![
            Value::Int(level as i64),
            Value::Real(coercivity_of_projection(&a_h)?),
            Value::Real(a.alpha()),
        ];
        Ok((row, extra))
    })?;
    let mut table = Table::new("coercivity", &["level", "min_eigenvalue", "alpha"]);
    let mut rows = Vec::new();
    for (row, extra) in results {
        rows.push(row);
        table.rows.push(extra);
    }
    fill_orders(&mut rows, |r| r.coeff_err_l2);
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        tables: vec![table],
        timings,
    })
}

/// Dyadic seminorm profile and distribution table of the `a11` entry of the
/// coefficient, plus the pointwise comparison of the mesh and dyadic maximal
/// functions on a 17 x 17 grid for every configured level.
pub fn run_bmo_diagnostics(cfg: &ExperimentConfig) -> Result<StudyReport> {
    check_kind(cfg, StudyKind::BmoDiagnostics)?;
    let w = ScalarField::coefficient_entry(&cfg.coefficient()?, 0, 0);
    let tol = cfg.tolerances.diagnostic;

    let mut seminorm = Table::new("seminorm", &["depth", "estimate"]);
    for (d, v) in bmo_profile(&w, cfg.depth, tol)?.into_iter().enumerate() {
        seminorm.rows.push(vec![Value::Int(d as i64), Value::Real(v)]);
    }
    let mut jn = Table::new("john_nirenberg", &["lambda", "fraction"]);
    for (l, frac) in john_nirenberg_check(&w, DyadicSquare::UNIT, &cfg.lambdas, cfg.jn_depth, tol)? {
        jn.rows.push(vec![Value::Real(l), Value::Real(frac)]);
    }

    let (results, timings) = map_levels(cfg, |level| {
        let m = mesh(level)?;
        let mut lines = Vec::with_capacity(MAXIMAL_GRID * MAXIMAL_GRID);
        let n = (MAXIMAL_GRID - 1) as f64;
        for j in 0..MAXIMAL_GRID {
            for i in 0..MAXIMAL_GRID {
                let x = [i as f64 / n, j as f64 / n];
                let mm = mesh_maximal(&w, &m, x, tol)?;
                let dm = dyadic_maximal(&w, level, x, tol)?;
                lines.push(vec![
                    Value::Int(level as i64),
                    Value::Real(x[0]),
                    Value::Real(x[1]),
                    Value::Real(mm),
                    Value::Real(dm),
                    Value::Int((mm > 2.0 * dm + 1e-6) as i64),
                ]);
            }
        }
        Ok((Row::new(level, m.num_cells()), lines))
    })?;
    let mut maximal = Table::new(
        "maximal",
        &["level", "x", "y", "mesh_maximal", "dyadic_maximal", "violation"],
    );
    let mut rows = Vec::new();
    for (row, lines) in results {
        rows.push(row);
        maximal.rows.extend(lines);
    }
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        tables: vec![seminorm, jn, maximal],
        timings,
    })
}

/// Fixed smooth zero-trace function used by the conjugate and flux checks.
pub fn probe_function(mesh: &Arc<Mesh>) -> P1Function {
    use std::f64::consts::PI;
    P1Function::interpolate(
        mesh.clone(),
        |x| (PI * x[0]).sin() * (PI * x[1]).sin() * (1.0 + x[0]),
        true,
    )
}

/// Uniform random cell-wise constant field with components in `[-1, 1]`.
pub fn random_field(mesh: &Arc<Mesh>, rng: &mut impl Rng) -> PcVectorField {
    let values = (0..mesh.num_cells())
        .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
        .collect();
    PcVectorField::new(mesh.clone(), values).expect("one value per cell")
}

/// Per-level generator; independent of how levels are scheduled.
pub fn level_rng(seed: u64, level: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    rng
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_vec_diff(a: &PcVectorField, b: &PcVectorField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| norm([x[0] - y[0], x[1] - y[1]]))
        .fold(0.0, f64::max)
}

/// Decomposes `samples` random fields per level and records the residuals,
/// idempotence, L2 Pythagoras defect and the `L^p` stability ratio
/// `(||grad phi||_p + ||g||_p) / ||s||_p`. Rows carry the conjugate and flux
/// constants of the fixed probe function.
pub fn run_hodge_suite(cfg: &ExperimentConfig) -> Result<StudyReport> {
    check_kind(cfg, StudyKind::HodgeSuite)?;
    let a = cfg.coefficient()?;
    let p = cfg.p;
    let tol = cfg.tolerances;
    let (results, timings) = map_levels(cfg, |level| {
        let m = mesh(level)?;
        let mut rng = level_rng(cfg.seed, level);
        let mut lines = Vec::with_capacity(cfg.samples);
        for sample in 0..cfg.samples {
            let s = random_field(&m, &mut rng);
            let split = hodge_decompose_with(&s, tol.solver)?;
            let grad = split.gradient_part()?;
            let again_grad = hodge_decompose_with(&grad, tol.solver)?;
            let again_sigma = hodge_decompose_with(&split.sigma, tol.solver)?;
            let idempotence = [
                max_abs_diff(again_grad.potential.values(), split.potential.values()),
                again_grad.sigma.max_norm(),
                again_sigma
                    .potential
                    .values()
                    .iter()
                    .map(|v| v.abs())
                    .fold(0.0, f64::max),
                max_vec_diff(&again_sigma.sigma, &split.sigma),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            let s2 = lp_norm(&s, 2.0)?.powi(2);
            let pythagoras = (s2 - lp_norm(&grad, 2.0)?.powi(2) - lp_norm(&split.sigma, 2.0)?.powi(2)).abs() / s2;
            let stability = (lp_norm(&grad, p)? + lp_norm(&split.sigma, p)?) / lp_norm(&s, p)?;
            lines.push(vec![
                Value::Int(level as i64),
                Value::Int(sample as i64),
                Value::Real(split.reconstruction_residual),
                Value::Real(split.orthogonality_residual),
                Value::Real(idempotence),
                Value::Real(pythagoras),
                Value::Real(stability),
            ]);
        }
        let u = probe_function(&m);
        let a_h = project_coefficient(&a, &m, tol.quadrature)?;
        let mut row = Row::new(level, m.num_cells());
        row.grad_lp = Some(lp_norm(&gradient(&u)?, p)?);
        row.conj_gap_ratio = Some(conjugate_gap_with(&u, p, tol.solver)?.bound_ratio);
        row.flux_ratio = Some(flux_decompose_with(&u, &a_h, p, tol.solver)?.bound_ratio);
        Ok((row, lines))
    })?;
    let mut table = Table::new(
        "hodge",
        &[
            "level",
            "sample",
            "reconstruction_residual",
            "orthogonality_residual",
            "idempotence",
            "pythagoras",
            "stability_ratio",
        ],
    );
    let mut rows = Vec::new();
    for (row, lines) in results {
        rows.push(row);
        table.rows.extend(lines);
    }
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        tables: vec![table],
        timings,
    })
}
