use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparsify_cli::{
    cmd_algconn, cmd_sparsify_patch, cmd_ultra, cmd_verify, write_trace_csv, CliError, RunReport,
};
use sparsify_core::algconn::DEFAULT_TOL;

/// Spectral subgraph sparsification, ultrasparsifiers and algebraic
/// connectivity augmentation.
#[derive(Parser)]
#[command(name = "sparsify", version)]
struct Cli {
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    report: Option<String>,

    /// Write the per-step potential trace as CSV.
    #[arg(long, global = true)]
    trace_csv: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replace the patch W on top of G by at most N reweighted edges.
    SparsifyPatch {
        g: String,
        w: String,
        #[arg(long)]
        k: usize,
        /// Update budget N (must exceed 8k); defaults to 8k + 1.
        #[arg(long)]
        n_budget: Option<usize>,
        #[arg(long, short)]
        out: String,
    },
    /// Build a tree plus at most 8k + 1 edges approximating G.
    Ultra {
        g: String,
        #[arg(long)]
        k: usize,
        #[arg(long, short)]
        out: String,
        #[arg(long, default_value_t = 4.0)]
        c1: f64,
        #[arg(long, default_value_t = 1.0)]
        c3: f64,
        /// Seed for the roots of the shortest-path tree ensemble.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Choose candidate edges that raise the algebraic connectivity.
    Algconn {
        base: String,
        candidates: String,
        #[arg(long)]
        k: usize,
        #[arg(long, short)]
        out: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Also run the exhaustive search (small instances only).
        #[arg(long)]
        oracle: bool,
    },
    /// Tightest (c, κ) with c·L_G ⪯ L_H ⪯ κ·L_G.
    Verify { g: String, h: String },
}

fn run(cli: &Cli) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::SparsifyPatch {
            g,
            w,
            k,
            n_budget,
            out,
        } => cmd_sparsify_patch(g, w, *k, *n_budget, out),
        Command::Ultra {
            g,
            k,
            out,
            c1,
            c3,
            seed,
        } => cmd_ultra(g, *k, out, *c1, *c3, *seed),
        Command::Algconn {
            base,
            candidates,
            k,
            out,
            tol,
            oracle,
        } => cmd_algconn(base, candidates, *k, out, *tol, *oracle),
        Command::Verify { g, h } => cmd_verify(g, h),
    }
}

fn emit(cli: &Cli, report: &RunReport) -> Result<(), CliError> {
    if let Some(path) = &cli.trace_csv {
        write_trace_csv(path, &report.trace)?;
    }
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match &cli.report {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|report| emit(&cli, &report)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
