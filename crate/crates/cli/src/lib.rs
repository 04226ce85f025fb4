//! Command-line surface over `hermlie`: JSON documents in, verdicts out.
//!
//! Exit codes: 0 success (Kähler or deformed), 1 error or failed precondition,
//! 2 generator exhaustion or unsupported case, 3 no Hermitian-symplectic metric.

pub mod batch;
pub mod commands;
pub mod document;
pub mod json;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use hermlie::codim2_models::CaseTag;

pub use commands::{exit_code, Globals};
pub use document::AlgebraDocument;

#[derive(Debug, Parser)]
#[command(
    name = "hermlie",
    version,
    about = "Hermitian-symplectic metrics on Lie algebras with a codimension-2 abelian ideal"
)]
pub struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for `batch` (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random instance of a case, written as an algebra document.
    Gen {
        #[arg(long = "case")]
        case: CaseTag,
        #[arg(long)]
        n: usize,
    },
    /// Structure, integrability, metric and ideal checks.
    Check { input: PathBuf },
    /// Case tag, r0 and metric flags.
    Classify { input: PathBuf },
    /// Obstruction witness or Kähler deformation.
    Decide { input: PathBuf },
    /// Kähler deformation; `--out` receives the document with the new metric.
    Deform { input: PathBuf },
    /// Runs a JSON list of {case, n, seed | seeds: [from, to]}.
    Batch { spec: PathBuf },
}

impl Cli {
    pub fn globals(&self) -> Globals {
        Globals {
            tol: self.tol,
            seed: self.seed,
            out: self.out.clone(),
            jobs: self.jobs,
        }
    }
}

pub fn run(cli: &Cli) -> u8 {
    let g = cli.globals();
    let res = match &cli.command {
        Command::Gen { case, n } => commands::cmd_gen(&g, *case, *n),
        Command::Check { input } => commands::cmd_check(&g, input),
        Command::Classify { input } => commands::cmd_classify(&g, input),
        Command::Decide { input } => commands::cmd_decide(&g, input),
        Command::Deform { input } => commands::cmd_deform(&g, input),
        Command::Batch { spec } => batch::cmd_batch(&g, spec),
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        exit_code(&e)
    })
}
