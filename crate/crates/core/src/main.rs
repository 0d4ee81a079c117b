use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use bordered_cube::cli::{oracle_ranks, parse_braid, run_pipeline, PipelineError, PipelineOptions, Verdict, SCHEMA_VERSION};
use bordered_cube::pmc::Pmc;
use bordered_cube::strands::{multiplication_table, StrandsAlgebra};

#[derive(Parser)]
#[command(version, about = "Bordered Floer spectral sequences for plat closures of braids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the spectral sequence of a plat closure.
    Compute {
        /// Number of strands (even, at least 4).
        #[arg(long)]
        strands: usize,
        /// Braid word, e.g. "s2 s2^-1 s1".
        #[arg(long, default_value = "")]
        braid: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Compare the second page with reduced Khovanov homology.
        #[arg(long)]
        oracle: bool,
        /// Write every intermediate object as JSON into this directory.
        #[arg(long)]
        dump_stage: Option<PathBuf>,
        /// Skip the reductions between stages.
        #[arg(long)]
        no_reduce: bool,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Reduced Khovanov homology ranks by weight.
    Kh {
        #[arg(long)]
        strands: usize,
        #[arg(long, default_value = "")]
        braid: String,
    },
    /// Algebra utilities.
    Algebra {
        #[command(subcommand)]
        command: AlgebraCommand,
    },
}

#[derive(Subcommand)]
enum AlgebraCommand {
    /// Dump the multiplication table of the middle-weight strands algebra.
    Table {
        #[arg(long)]
        genus: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Validation(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.into())
        } else {
            Failure::Internal(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compute {
            strands,
            braid,
            format,
            oracle,
            dump_stage,
            no_reduce,
            jobs,
        } => {
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j)
                    .build_global()
                    .context("configuring worker threads")?;
            }
            let d = parse_braid(&braid, strands)?;
            let options = PipelineOptions {
                reduce: !no_reduce,
                oracle,
                dump_stage,
            };
            let report = run_pipeline(&d, &options)?;
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).context("serializing report")?),
            }
            if report.verdict == Verdict::Fail {
                return Err(Failure::Internal(anyhow::anyhow!(
                    "second page disagrees with reduced Khovanov homology"
                )));
            }
        }
        Command::Kh { strands, braid } => {
            let d = parse_braid(&braid, strands)?;
            let kh = oracle_ranks(&d);
            let out = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "strands": strands,
                "braid": braid,
                "reduced_kh": kh,
            });
            println!("{}", serde_json::to_string_pretty(&out).context("serializing ranks")?);
        }
        Command::Algebra {
            command: AlgebraCommand::Table { genus, format },
        } => {
            let pmc = Pmc::linear(genus).map_err(|e| Failure::Validation(e.into()))?;
            let table = multiplication_table(&StrandsAlgebra::new(Arc::new(pmc)));
            match format {
                Format::Text => print!("{}", table.to_text()),
                Format::Json => {
                    let mut v = serde_json::to_value(&table).context("serializing table")?;
                    v["schema_version"] = SCHEMA_VERSION.into();
                    println!("{}", serde_json::to_string_pretty(&v).context("serializing table")?);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}
