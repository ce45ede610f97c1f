//! Command-line experiment runner.
//!
//! `arakelov run <config.json> [--out DIR] [--threads N]` executes one
//! experiment and writes report.json plus CSV tables; `arakelov validate
//! <config.json>` checks the schema without running. Computed root sets are
//! cached under the directory named by ARAKELOV_ROOT_CACHE when set.
//!
//! Exit codes: 0 success, 2 schema violation, 3 cap exceeded, 4 numeric
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use arakelov::experiments::{run_to_dir, ExperimentConfig};
use arakelov::Error;

#[derive(Parser)]
#[command(
    name = "arakelov",
    version,
    about = "Arithmetic invariants of metrized line bundles on P1 over Q"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Output directory (defaults to `<config stem>_out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Size of the worker thread pool for parallel sub-tasks.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Validate a config file against the schema and caps without running.
    Validate {
        /// Path to the experiment config.
        config: PathBuf,
    },
}

const EXIT_SCHEMA: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            threads,
        } => run(config, out, threads),
        Command::Validate { config } => validate(config),
    }
}

fn load(config_path: &PathBuf) -> Result<ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", config_path.display());
        ExitCode::from(EXIT_SCHEMA)
    })?;
    ExperimentConfig::from_json(&text).map_err(|e| {
        eprintln!("schema error: {e}");
        ExitCode::from(EXIT_SCHEMA)
    })
}

fn run(config_path: PathBuf, out: Option<PathBuf>, threads: Option<usize>) -> ExitCode {
    let config = match load(&config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: thread pool not configured: {e}");
        }
    }
    let out_dir = out.unwrap_or_else(|| {
        let stem = config_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "experiment".to_string());
        PathBuf::from(format!("{stem}_out"))
    });
    match run_to_dir(&config, &out_dir) {
        Ok(summary) => {
            println!(
                "{}: wrote {} artifacts to {}",
                summary.kind,
                summary.artifacts.len(),
                summary.out_dir.display()
            );
            for name in &summary.artifacts {
                println!("  {name}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Schema(_) | Error::Json(_) => ExitCode::from(EXIT_SCHEMA),
                Error::ConfigCap(_) | Error::CapExceeded { .. } => ExitCode::from(EXIT_CAP),
                _ => ExitCode::from(EXIT_NUMERIC),
            }
        }
    }
}

fn validate(config_path: PathBuf) -> ExitCode {
    let config = match load(&config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let issues = config.validate();
    if issues.is_empty() {
        println!("OK: {} config validates", config.kind.name());
        return ExitCode::SUCCESS;
    }
    let mut worst = EXIT_CAP;
    for issue in &issues {
        println!(
            "{}: {} ({})",
            if issue.is_cap { "cap" } else { "schema" },
            issue.message,
            issue.field
        );
        if !issue.is_cap {
            worst = EXIT_SCHEMA;
        }
    }
    ExitCode::from(worst)
}
