//! Batch experiment driver behind the `sonine` binary.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod summary;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use config::RunConfig;
use summary::RunSummary;

#[derive(Debug, Parser)]
#[command(name = "sonine", version, about = "Weighted Weyl-Sonine operator experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiments listed in a TOML config.
    Run { config: PathBuf },
    /// Print the experiment catalogue.
    List,
    /// Plot two columns of a CSV written by `run`.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        logy: bool,
        /// Output path; defaults to the CSV path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs every experiment in `cfg` concurrently, one output directory each,
/// and writes `summary.csv` under the output directory.
pub fn run_config(cfg: &RunConfig) -> Result<RunSummary> {
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    let dirs: Vec<PathBuf> =
        cfg.experiments.iter().enumerate().map(|(i, e)| cfg.output_dir.join(format!("{i:02}-{}", e.name))).collect();
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .experiments
            .iter()
            .zip(&dirs)
            .map(|(e, dir)| scope.spawn(move || experiments::run_experiment(e, cfg.seed, dir)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    });
    let summary = RunSummary { records: results.into_iter().flatten().collect() };
    let path = cfg.output_dir.join("summary.csv");
    let file =
        std::fs::File::create(&path).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    summary.write_csv(file)?;
    Ok(summary)
}

pub fn run_path(path: &Path) -> Result<RunSummary> {
    run_config(&RunConfig::load(path)?)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { config } => match run_path(&config) {
            Ok(summary) => {
                println!("{summary}");
                summary.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                255
            }
        },
        Command::List => {
            print!("{}", experiments::list_table());
            0
        }
        Command::Plot { csv, x, y, logy, out } => match plot::plot_csv(&csv, &x, &y, logy, out.as_deref()) {
            Ok(path) => {
                println!("wrote {}", path.display());
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    }
}
