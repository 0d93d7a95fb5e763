//! Runs a JSON config and writes the report next to it.
//!
//! ```text
//! cargo run --example run_config -- study.json out/report.csv
//! ```

use std::path::PathBuf;

use bmofem::harness::{self, ExperimentConfig};

fn main() -> bmofem::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = match args.next() {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.out = args.next().map(PathBuf::from).or(cfg.out);
    cfg.validate()?;
    let report = harness::run_and_write(&cfg)?;
    match &cfg.out {
        Some(out) => println!("wrote {} rows to {}", report.rows.len(), out.display()),
        None => print!("{}", report.to_csv()),
    }
    eprintln!("{}", cfg.to_json());
    Ok(())
}
