//! Decay of `||A - A_h||_{L^r}` for a Lipschitz and a log-singular coefficient.

use bmofem::harness::{self, CoeffName, ExperimentConfig, LevelRange, StudyKind};

fn main() -> bmofem::Result<()> {
    for coeff in [CoeffName::Smooth, CoeffName::LogSingular] {
        let cfg = ExperimentConfig {
            kind: StudyKind::CoeffDecay,
            coeff,
            levels: LevelRange::new(1, 5),
            ..ExperimentConfig::default()
        };
        let report = harness::run(&cfg)?;
        println!("{coeff:?}");
        print!("{}", report.to_csv());
        if let Some(t) = report.table("coercivity") {
            print!("{}", t.to_csv());
        }
    }
    Ok(())
}
