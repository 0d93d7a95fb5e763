use std::sync::Arc;

use bmofem::coeff::{
    john_nirenberg_check, project_coefficient, CoefficientField, DyadicSquare, PcMatrixField, ScalarField,
};
use bmofem::fem::{
    assemble_rhs, assemble_stiffness, galerkin_residual, gradient, lp_norm, solve_projected, P1Function, PcVectorField,
};
use bmofem::harness::{CoeffName, ExperimentConfig, LevelRange, RhsName, StudyKind};
use bmofem::hodge::hodge_decompose;
use bmofem::{Mat2, Mesh};
use proptest::prelude::*;

fn mesh(l: u32) -> Arc<Mesh> {
    Arc::new(Mesh::uniform(l).unwrap())
}

fn field(m: &Arc<Mesh>, raw: &[f64]) -> PcVectorField {
    let values = (0..m.num_cells()).map(|k| [raw[2 * k], raw[2 * k + 1]]).collect();
    PcVectorField::new(m.clone(), values).unwrap()
}

fn cells_at(l: u32) -> usize {
    2 << (2 * l)
}

fn spd() -> impl Strategy<Value = Mat2> {
    (0.5f64..3.0, -0.4f64..0.4, 0.5f64..3.0).prop_map(|(a, b, c)| Mat2::symmetric(a, b * a.min(c), c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uniform_mesh_counts(l in 0u32..6) {
        let m = Mesh::uniform(l).unwrap();
        let n = 1usize << l;
        prop_assert_eq!(m.num_cells(), 2 * n * n);
        prop_assert_eq!(m.num_vertices(), (n + 1) * (n + 1));
        prop_assert_eq!(m.num_interior(), (n - 1).pow(2));
        prop_assert!((m.total_area() - 1.0).abs() < 1e-14);
        let r = m.refine().unwrap();
        prop_assert_eq!(r.num_cells(), 4 * m.num_cells());
        for k in 0..r.num_cells() {
            prop_assert!(r.parent_cell(k).is_some_and(|c| c < m.num_cells()));
        }
    }

    #[test]
    fn lp_norm_is_homogeneous(raw in prop::collection::vec(-1.0f64..1.0, 2 * cells_at(2)), c in -5.0f64..5.0, p in 1.1f64..6.0) {
        let m = mesh(2);
        let s = field(&m, &raw);
        let a = lp_norm(&s.scaled(c), p).unwrap();
        let b = c.abs() * lp_norm(&s, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn hodge_split_is_linear(
        raw_s in prop::collection::vec(-1.0f64..1.0, 2 * cells_at(2)),
        raw_t in prop::collection::vec(-1.0f64..1.0, 2 * cells_at(2)),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let m = mesh(2);
        let (s, t) = (field(&m, &raw_s), field(&m, &raw_t));
        let combined = hodge_decompose(&s.scaled(a).add(&t.scaled(b)).unwrap()).unwrap();
        let (hs, ht) = (hodge_decompose(&s).unwrap(), hodge_decompose(&t).unwrap());
        for (k, v) in combined.potential.values().iter().enumerate() {
            let want = a * hs.potential.values()[k] + b * ht.potential.values()[k];
            prop_assert!((v - want).abs() < 1e-9);
        }
        for (k, v) in combined.sigma.values().iter().enumerate() {
            let (x, y) = (hs.sigma.cell(k), ht.sigma.cell(k));
            prop_assert!((v[0] - a * x[0] - b * y[0]).abs() < 1e-9);
            prop_assert!((v[1] - a * x[1] - b * y[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn hodge_split_satisfies_pythagoras(raw in prop::collection::vec(-1.0f64..1.0, 2 * cells_at(3)), l in 1u32..4) {
        let m = mesh(l);
        let s = field(&m, &raw[..2 * m.num_cells()]);
        let split = hodge_decompose(&s).unwrap();
        let grad = split.gradient_part().unwrap();
        let s2 = lp_norm(&s, 2.0).unwrap().powi(2);
        let parts = lp_norm(&grad, 2.0).unwrap().powi(2) + lp_norm(&split.sigma, 2.0).unwrap().powi(2);
        prop_assert!((s2 - parts).abs() <= 1e-9 * s2);
        prop_assert!(split.reconstruction_residual <= 1e-12);
        prop_assert!(split.orthogonality_residual <= 1e-9);
    }

    #[test]
    fn stiffness_energy_dominates_alpha_gradient(
        mats in prop::collection::vec(spd(), cells_at(2)),
        raw in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let m = mesh(2);
        let alpha = mats.iter().map(|a| a.min_eigenvalue()).fold(f64::INFINITY, f64::min);
        let a_h = PcMatrixField::new(m.clone(), mats).unwrap();
        let k = assemble_stiffness(&m, &a_h).unwrap();
        let u = P1Function::from_interior(m.clone(), &raw).unwrap();
        let x = u.interior_coefficients();
        let energy: f64 = x.iter().zip(k.mul_vec(&x)).map(|(a, b)| a * b).sum();
        let g2 = lp_norm(&gradient(&u).unwrap(), 2.0).unwrap().powi(2);
        prop_assert!(energy >= alpha * g2 * (1.0 - 1e-12));
        prop_assert!(k.is_symmetric());
    }

    #[test]
    fn solve_is_linear_with_small_residual(
        raw_f in prop::collection::vec(-1.0f64..1.0, 2 * cells_at(3)),
        raw_g in prop::collection::vec(-1.0f64..1.0, 2 * cells_at(3)),
        c in -4.0f64..4.0,
    ) {
        let m = mesh(3);
        let a_h = project_coefficient(&CoefficientField::checkerboard(7.0), &m, 1e-10).unwrap();
        let (f, g) = (field(&m, &raw_f), field(&m, &raw_g));
        let (uf, _) = solve_projected(&a_h, &f, 1e-13).unwrap();
        let (ug, _) = solve_projected(&a_h, &g, 1e-13).unwrap();
        let (ufg, _) = solve_projected(&a_h, &f.add(&g.scaled(c)).unwrap(), 1e-13).unwrap();
        for k in 0..m.num_vertices() {
            let want = uf.values()[k] + c * ug.values()[k];
            prop_assert!((ufg.values()[k] - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
        let b = assemble_rhs(&m, &f).unwrap();
        let bmax = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let res = galerkin_residual(&uf, &a_h, &f).unwrap();
        prop_assert!(res.iter().all(|r| r.abs() <= 1e-9 * bmax));
    }

    #[test]
    fn john_nirenberg_fractions_decrease(x in 0.05f64..0.95, y in 0.05f64..0.95, beta in 0.1f64..3.0) {
        let w = ScalarField::new(move |z| beta * (z[0] - x).hypot(z[1] - y).ln().abs());
        let lambdas = [0.25, 0.5, 1.0, 2.0, 4.0];
        let fr = john_nirenberg_check(&w, DyadicSquare::UNIT, &lambdas, 6, 1e-6).unwrap();
        for pair in fr.windows(2) {
            prop_assert!(pair[1].1 <= pair[0].1);
        }
        prop_assert!(fr.iter().all(|&(_, f)| (0.0..=1.0).contains(&f)));
    }

    #[test]
    fn config_echo_round_trips(
        p in 1.1f64..10.0,
        beta in 0.0f64..4.0,
        kappa in 0.5f64..500.0,
        seed in any::<u64>(),
        start in 0u32..4,
        span in 0u32..3,
        kind in prop::sample::select(vec![StudyKind::Stability, StudyKind::HodgeSuite, StudyKind::CoeffDecay]),
        coeff in prop::sample::select(vec![CoeffName::Identity, CoeffName::Smooth, CoeffName::LogSingular, CoeffName::Checkerboard]),
        rhs in prop::sample::select(vec![RhsName::SinCos, RhsName::Constant, RhsName::ManufacturedSine]),
    ) {
        let cfg = ExperimentConfig {
            kind,
            coeff,
            rhs,
            p,
            beta,
            kappa,
            seed,
            levels: LevelRange::new(start.max(1), start.max(1) + span),
            ..ExperimentConfig::default()
        };
        let echo = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&echo, &cfg);
        prop_assert_eq!(echo.to_json(), cfg.to_json());
    }
}
