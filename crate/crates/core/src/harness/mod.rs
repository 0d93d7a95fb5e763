//! Experiment driver: configuration, study runners and CSV reports.
//!
//! A study is described by an [`ExperimentConfig`] and produces a
//! [`StudyReport`] with one row per mesh level. [`StudyReport::write`] puts
//! the main CSV next to its auxiliary tables, a config echo that reproduces
//! the run, and a metadata file with timings.

mod config;
mod report;
mod studies;

pub use config::{
    center_hat, rhs_field, CoeffName, ExperimentConfig, LevelRange, Reference, RhsName, StudyKind, Tolerances,
};
pub use report::{real, sidecar, Row, StudyReport, Table, Value, CSV_HEADER};
pub use studies::{
    field_distance, level_rng, probe_function, prolong, random_field, run_bmo_diagnostics, run_coeff_decay_study,
    run_convergence_study, run_hodge_suite, run_stability_study, MAXIMAL_GRID,
};

use crate::error::Result;

/// Runs the study named by `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<StudyReport> {
    match cfg.kind {
        StudyKind::Stability => run_stability_study(cfg),
        StudyKind::Convergence => run_convergence_study(cfg),
        StudyKind::HodgeSuite => run_hodge_suite(cfg),
        StudyKind::CoeffDecay => run_coeff_decay_study(cfg),
        StudyKind::BmoDiagnostics => run_bmo_diagnostics(cfg),
    }
}

/// Runs the study and writes it to `cfg.out` when set.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let report = run(cfg)?;
    if let Some(out) = &cfg.out {
        report.write(out)?;
    }
    Ok(report)
}
