//! Gradient errors against a fine-grid reference for a discontinuous
//! coefficient, and against the exact solution for the identity.

use bmofem::harness::{self, CoeffName, ExperimentConfig, LevelRange, Reference, RhsName, StudyKind};

fn main() -> bmofem::Result<()> {
    let checkerboard = ExperimentConfig {
        kind: StudyKind::Convergence,
        coeff: CoeffName::Checkerboard,
        kappa: 100.0,
        levels: LevelRange::new(2, 4),
        reference_level: Some(6),
        ..ExperimentConfig::default()
    };
    let exact = ExperimentConfig {
        kind: StudyKind::Convergence,
        rhs: RhsName::ManufacturedSine,
        reference: Reference::Exact,
        levels: LevelRange::new(2, 5),
        ..ExperimentConfig::default()
    };
    for cfg in [checkerboard, exact] {
        let report = harness::run(&cfg)?;
        for row in &report.rows {
            println!(
                "level {}: error {:.4e}, order {}",
                row.level,
                row.err_phat.unwrap_or(f64::NAN),
                row.order.map_or("-".into(), |o| format!("{o:.3}"))
            );
        }
        println!();
    }
    Ok(())
}
