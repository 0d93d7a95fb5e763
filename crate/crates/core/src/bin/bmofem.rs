use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bmofem::harness::{self, CoeffName, ExperimentConfig, LevelRange, RhsName, StudyKind};
use bmofem::Error;

#[derive(Parser)]
#[command(
    name = "bmofem",
    version,
    about = "Finite element studies for elliptic problems with BMO coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one study and write its CSV report.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = name::<StudyKind>)]
    kind: Option<StudyKind>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    p_hat: Option<f64>,
    /// Inclusive level range, `a..b`.
    #[arg(long)]
    levels: Option<LevelRange>,
    #[arg(long, value_parser = name::<CoeffName>)]
    coeff: Option<CoeffName>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, value_parser = name::<RhsName>)]
    rhs: Option<RhsName>,
    /// Output CSV; without it the main table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    solver_tol: Option<f64>,
}

/// Parses a kebab-case name through the config's own serde representation.
fn name<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.kind = self.kind.unwrap_or(cfg.kind);
        cfg.coeff = self.coeff.unwrap_or(cfg.coeff);
        cfg.rhs = self.rhs.unwrap_or(cfg.rhs);
        cfg.p = self.p.unwrap_or(cfg.p);
        cfg.p_hat = self.p_hat.unwrap_or(cfg.p_hat);
        cfg.levels = self.levels.unwrap_or(cfg.levels);
        cfg.beta = self.beta.unwrap_or(cfg.beta);
        cfg.kappa = self.kappa.unwrap_or(cfg.kappa);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.tolerances.solver = self.solver_tol.unwrap_or(cfg.tolerances.solver);
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let report = harness::run_and_write(&cfg)?;
    if cfg.out.is_none() {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(report.to_csv().as_bytes()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
