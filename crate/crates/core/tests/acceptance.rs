//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::fs;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use bmofem::coeff::{
    bmo_profile, coercivity_of_projection, dyadic_maximal, john_nirenberg_check, mesh_maximal, project_coefficient,
    CoefficientField, DyadicSquare, SampledGrid, ScalarField,
};
use bmofem::fem::{gradient, solve_bvp, solve_projected, P1Function, SolveOptions, VectorField};
use bmofem::harness::{
    self, probe_function, CoeffName, ExperimentConfig, LevelRange, Reference, RhsName, StudyKind, StudyReport,
    MAXIMAL_GRID,
};
use bmofem::hodge::{conjugate_gap, flux_decompose};
use bmofem::{Mat2, Mesh, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String)>;

fn mesh(l: u32) -> Arc<Mesh> {
    Arc::new(Mesh::uniform(l).unwrap())
}

fn study(kind: StudyKind, levels: (u32, u32)) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        levels: LevelRange::new(levels.0, levels.1),
        ..ExperimentConfig::default()
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sin_cos() -> VectorField {
    harness::rhs_field(RhsName::SinCos)
}

fn random_p1(m: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> P1Function {
    let coeffs: Vec<f64> = (0..m.num_interior()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    P1Function::from_interior(m.clone(), &coeffs).unwrap()
}

fn galerkin_exactness() -> Outcome {
    let m = mesh(3);
    let a_h = project_coefficient(&CoefficientField::identity(), &m, 1e-12)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w = random_p1(&m, &mut rng);
        let (u, _) = solve_projected(&a_h, &gradient(&w)?, 1e-14)?;
        worst = worst.max(max_abs(u.values().iter().zip(w.values()).map(|(a, b)| a - b)));
    }
    Ok((worst <= 1e-10, format!("max vertex error {worst:.2e}")))
}

fn hodge_suite() -> Outcome {
    let mut cfg = study(StudyKind::HodgeSuite, (1, 4));
    cfg.samples = 50;
    cfg.seed = 2024;
    let r = harness::run(&cfg)?;
    let t = r.table("hodge").expect("hodge table");
    let col = |name| max_abs(t.column(name).expect("column"));
    let (rec, orth, idem, pyth) = (
        col("reconstruction_residual"),
        col("orthogonality_residual"),
        col("idempotence"),
        col("pythagoras"),
    );
    let ok = t.rows.len() == 200 && rec <= 1e-10 && orth <= 1e-9 && idem <= 1e-9 && pyth <= 1e-9;
    Ok((
        ok,
        format!(
            "{} fields, reconstruction {rec:.1e}, orthogonality {orth:.1e}, idempotence {idem:.1e}, pythagoras {pyth:.1e}",
            t.rows.len()
        ),
    ))
}

fn conjugate_gap_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut at_two: f64 = 0.0;
    let mut monotone = true;
    let ps = [1.8, 1.9, 2.1, 2.2];
    let mut ratios = vec![Vec::new(); ps.len()];
    for l in 1..=4 {
        let m = mesh(l);
        let u = probe_function(&m);
        let mut suite = vec![u.clone()];
        suite.extend((0..5).map(|_| random_p1(&m, &mut rng)));
        for v in &suite {
            at_two = at_two.max(conjugate_gap(v, 2.0)?.g_norm);
        }
        let gaps = ps.iter().map(|&p| conjugate_gap(&u, p)).collect::<Result<Vec<_>>>()?;
        let near = gaps[1].g_norm.max(gaps[2].g_norm);
        let far = gaps[0].g_norm.min(gaps[3].g_norm);
        monotone &= near < far && near > 0.0;
        for (k, g) in gaps.iter().enumerate() {
            ratios[k].push(g.bound_ratio);
        }
    }
    let worst = ratios.iter().map(|r| spread(r)).fold(0.0, f64::max);
    Ok((
        at_two <= 1e-10 && monotone && worst <= 2.0,
        format!("p=2 gap {at_two:.1e}, monotone {monotone}, bound_ratio spread {worst:.3}"),
    ))
}

fn flux_split_bounds() -> Outcome {
    let mut ell: f64 = 0.0;
    for l in 1..=4 {
        let m = mesh(l);
        let a_h = project_coefficient(&CoefficientField::identity(), &m, 1e-12)?;
        ell = ell.max(flux_decompose(&probe_function(&m), &a_h, 2.0)?.ell.max_norm());
    }
    let a = CoefficientField::checkerboard(5.0);
    let mut ratios = Vec::new();
    for l in 2..=5 {
        let sol = solve_bvp(&mesh(l), &a, &sin_cos(), SolveOptions::default())?;
        ratios.push(flux_decompose(&sol.solution, &sol.coefficient, 2.0)?.bound_ratio);
    }
    let s = spread(&ratios);
    Ok((
        ell <= 1e-10 && s <= 2.0,
        format!("identity flux remainder {ell:.1e}, checkerboard spread {s:.3}"),
    ))
}

fn coercivity_transfer() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("grid.csv");
    let sampled = SampledGrid::sample(16, 0.5, |x| {
        Mat2::symmetric(1.0 + x[0] * x[1], 0.25 * (3.0 * x[0]).sin(), 0.75 + x[1])
    });
    fs::write(&path, sampled.to_csv()).expect("write grid");
    let fixtures = [
        ("identity", CoefficientField::identity()),
        ("scaled", CoefficientField::scaled_identity(2.5)),
        ("smooth", CoefficientField::smooth()),
        ("log-singular", CoefficientField::log_singular(0.5, [0.0, 0.0])),
        ("log-singular interior", CoefficientField::log_singular(1.0, [0.3, 0.7])),
        ("checkerboard", CoefficientField::checkerboard(100.0)),
        ("sampled", CoefficientField::sampled(SampledGrid::from_path(&path)?)),
    ];
    let mut worst = f64::INFINITY;
    let mut which = "";
    for (name, a) in &fixtures {
        for l in 0..=5 {
            let c = coercivity_of_projection(&project_coefficient(a, &mesh(l), 1e-8)?)?;
            let margin = c - a.alpha();
            if margin < worst {
                worst = margin;
                which = name;
            }
        }
    }
    Ok((
        worst >= -1e-8,
        format!("{} fixtures, smallest margin {worst:.2e} ({which})", fixtures.len()),
    ))
}

fn coefficient_decay() -> Outcome {
    let mut cfg = study(StudyKind::CoeffDecay, (2, 5));
    cfg.coeff = CoeffName::Smooth;
    let smooth = harness::run(&cfg)?.column(|r| r.order);
    cfg.coeff = CoeffName::LogSingular;
    cfg.levels = LevelRange::new(1, 5);
    let log = harness::run(&cfg)?.column(|r| r.coeff_err_l2);
    let ok = smooth.len() == 3 && smooth.iter().all(|o| (o - 1.0).abs() <= 0.15) && strictly_decreasing(&log);
    Ok((
        ok,
        format!("smooth orders {smooth:.3?}, log-singular errors [{}]", sci(&log)),
    ))
}

fn a_priori_stability() -> Outcome {
    let mut cfg = study(StudyKind::Stability, (2, 6));
    cfg.coeff = CoeffName::LogSingular;
    cfg.beta = 0.5;
    cfg.p = 2.1;
    cfg.rhs = RhsName::SinCos;
    let r = harness::run(&cfg)?;
    let s = r.spread(|row| row.stability_ratio).unwrap_or(f64::INFINITY);
    Ok((
        s <= 1.5,
        format!("ratios {:.4?}, spread {s:.3}", r.column(|row| row.stability_ratio)),
    ))
}

fn convergence_ratios(r: &StudyReport) -> (bool, Vec<f64>) {
    let e = r.column(|row| row.err_phat);
    let ratios: Vec<f64> = e.windows(2).map(|w| w[1] / w[0]).collect();
    (
        e.len() == 4 && strictly_decreasing(&e) && ratios.iter().all(|&q| q <= 0.9),
        ratios,
    )
}

fn strong_convergence() -> Outcome {
    let mut cfg = study(StudyKind::Convergence, (2, 5));
    cfg.reference_level = Some(7);
    cfg.coeff = CoeffName::Checkerboard;
    cfg.kappa = 100.0;
    let (ok_cb, cb) = convergence_ratios(&harness::run(&cfg)?);
    cfg.coeff = CoeffName::LogSingular;
    cfg.beta = 0.5;
    cfg.p = 2.1;
    cfg.p_hat = 2.0;
    let (ok_log, log) = convergence_ratios(&harness::run(&cfg)?);
    Ok((
        ok_cb && ok_log,
        format!("checkerboard ratios {cb:.3?}, log-singular ratios {log:.3?}"),
    ))
}

fn classical_rate() -> Outcome {
    let mut cfg = study(StudyKind::Convergence, (3, 5));
    cfg.rhs = RhsName::ManufacturedSine;
    cfg.reference = Reference::Exact;
    let orders = harness::run(&cfg)?.column(|r| r.order);
    let ok = orders.len() == 2 && orders.iter().all(|o| (o - 1.0).abs() <= 0.15);
    Ok((ok, format!("orders {orders:.3?}")))
}

fn maximal_bound() -> Outcome {
    let scalars = [
        ("log distance", ScalarField::log_distance([0.0, 0.0])),
        ("indicator", ScalarField::indicator([0.0, 0.0], [0.5, 0.5])),
        (
            "smooth a11",
            ScalarField::coefficient_entry(&CoefficientField::smooth(), 0, 0),
        ),
        (
            "checkerboard a11",
            ScalarField::coefficient_entry(&CoefficientField::checkerboard(100.0), 0, 0),
        ),
        (
            "log-singular a11",
            ScalarField::coefficient_entry(&CoefficientField::log_singular(0.5, [0.0, 0.0]), 0, 0),
        ),
    ];
    let n = (MAXIMAL_GRID - 1) as f64;
    let mut violations = 0;
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for l in 2..=4 {
        let m = mesh(l);
        for (_, w) in &scalars {
            for j in 0..MAXIMAL_GRID {
                for i in 0..MAXIMAL_GRID {
                    let x = [i as f64 / n, j as f64 / n];
                    let mm = mesh_maximal(w, &m, x, 1e-6)?;
                    let dm = dyadic_maximal(w, l, x, 1e-6)?;
                    checked += 1;
                    worst = worst.min(2.0 * dm + 1e-6 - mm);
                    if mm > 2.0 * dm + 1e-6 {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations in {checked} points, smallest slack {worst:.3e}"),
    ))
}

fn bmo_diagnostics() -> Outcome {
    let w = ScalarField::log_distance([0.0, 0.0]);
    let profile = bmo_profile(&w, 6, 1e-6)?;
    let (d5, d6) = (profile[5], profile[6]);
    let increment = (d6 - d5) / d5;
    let lambdas = [1.0, 2.0, 3.0, 4.0];
    let fr: Vec<f64> = john_nirenberg_check(&w, DyadicSquare::UNIT, &lambdas, 10, 1e-8)?
        .into_iter()
        .map(|(_, f)| f)
        .collect();
    let monotone = fr.windows(2).all(|p| p[1] <= p[0]) && fr.iter().all(|&f| f > 0.0);
    let slopes: Vec<f64> = fr.windows(2).map(|p| (p[1] / p[0]).ln()).collect();
    let shape = if monotone { spread(&slopes) } else { f64::INFINITY };
    Ok((
        increment <= 0.10 && monotone && shape <= 3.0,
        format!(
            "depth-6 increment {:.2}%, fractions [{}], slope spread {shape:.3}",
            100.0 * increment,
            sci(&fr)
        ),
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut configs = Vec::new();
    let mut c = study(StudyKind::Stability, (2, 4));
    c.coeff = CoeffName::LogSingular;
    c.p = 2.1;
    configs.push(c);
    let mut c = study(StudyKind::Convergence, (2, 3));
    c.coeff = CoeffName::Checkerboard;
    configs.push(c);
    let mut c = study(StudyKind::HodgeSuite, (1, 3));
    c.samples = 10;
    c.p = 3.0;
    configs.push(c);
    let mut c = study(StudyKind::CoeffDecay, (1, 4));
    c.coeff = CoeffName::Smooth;
    configs.push(c);
    let mut c = study(StudyKind::BmoDiagnostics, (2, 3));
    c.coeff = CoeffName::LogSingular;
    c.depth = 4;
    configs.push(c);
    let mut mismatches = Vec::new();
    for (i, base) in configs.into_iter().enumerate() {
        let mut files = Vec::new();
        for (run, workers) in [1, 1, 3].into_iter().enumerate() {
            let mut cfg = base.clone();
            cfg.workers = workers;
            let out = dir.path().join(format!("s{i}-{run}.csv"));
            cfg.out = Some(out.clone());
            let report = harness::run_and_write(&cfg)?;
            let mut bytes = vec![fs::read(&out).expect("main csv")];
            for t in &report.tables {
                bytes.push(fs::read(harness::sidecar(&out, &format!("{}.csv", t.name))).expect("table"));
            }
            files.push(bytes);
        }
        if files[0] != files[1] || files[0] != files[2] {
            mismatches.push(format!("{:?}", base.kind));
        }
    }
    Ok((
        mismatches.is_empty(),
        format!("5 study kinds, mismatches {mismatches:?}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("galerkin exactness", galerkin_exactness),
        ("hodge suite", hodge_suite),
        ("conjugate gap", conjugate_gap_bounds),
        ("flux split", flux_split_bounds),
        ("coercivity transfer", coercivity_transfer),
        ("coefficient decay", coefficient_decay),
        ("a priori stability", a_priori_stability),
        ("strong convergence", strong_convergence),
        ("classical rate", classical_rate),
        ("maximal function bound", maximal_bound),
        ("bmo diagnostics", bmo_diagnostics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        let tag = if ok { "PASS" } else { "FAIL" };
        println!(
            "{tag} C{:<2} {name}: {detail} [{:.1}s]",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
