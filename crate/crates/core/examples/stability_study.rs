//! A priori stability for the log-singular coefficient at p = 2.1.

use bmofem::harness::{self, CoeffName, ExperimentConfig, LevelRange, StudyKind};

fn main() -> bmofem::Result<()> {
    let cfg = ExperimentConfig {
        kind: StudyKind::Stability,
        coeff: CoeffName::LogSingular,
        beta: 0.5,
        p: 2.1,
        levels: LevelRange::new(2, 5),
        workers: 4,
        ..ExperimentConfig::default()
    };
    let report = harness::run(&cfg)?;
    print!("{}", report.to_csv());
    println!(
        "stability spread: {:.4}",
        report.spread(|r| r.stability_ratio).unwrap_or(f64::NAN)
    );
    Ok(())
}
