use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wold_cli::commands;

/// Classify C*-algebras generated by families of partial isometries and
/// cross-check the symbolic predictions against a matrix oracle.
#[derive(Parser)]
#[command(name = "wold", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wold data, indices, the glued graph, and the block-structure
    /// classification of a family file.
    Classify {
        file: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the glued graph next to the input as a .dot file.
        #[arg(long)]
        emit_dot: bool,
        /// Include shadow edges in the .dot output (implies --emit-dot).
        #[arg(long)]
        dot_shadow: bool,
    },
    /// Enumerate the graph groupoid of the family's glued graph.
    Groupoid {
        file: PathBuf,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        emit_dot: bool,
        /// Include shadow edges in the .dot output (implies --emit-dot).
        #[arg(long)]
        dot_shadow: bool,
    },
    /// Run the numeric oracle against the declared data of a family file.
    Verify {
        file: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Cayley-transform roundtrips, rank-one defect identities, and the
    /// unitary-extension check on seeded random instances.
    Cayley {
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match cli.command {
        Command::Classify { file, depth, max_len, tol, emit_dot, dot_shadow } => {
            commands::run_classify(&file, depth, max_len, tol, emit_dot, dot_shadow)
        }
        Command::Groupoid { file, depth, max_len, tol, emit_dot, dot_shadow } => {
            commands::run_groupoid(&file, depth, max_len, tol, emit_dot, dot_shadow)
        }
        Command::Verify { file, depth, max_len, tol } => {
            commands::run_verify(&file, depth, max_len, tol)
        }
        Command::Cayley { dim, seed, tol } => commands::run_cayley(dim, seed, tol),
    };
    match report {
        Ok(report) => {
            println!("{}", report.to_json());
            if report.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
