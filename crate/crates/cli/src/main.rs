//! `gradpen` command-line driver.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gradpen::domains::DomainArgs;

#[derive(Parser)]
#[command(name = "gradpen", version, about = "Gradient-constrained problems by p-power penalties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a p-continuation from a JSON config and write reports.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Error table for the h = 4 unit disk problem.
    Table1 {
        #[arg(long)]
        refinements: u32,
        /// Comma-separated exponents, e.g. `10,50,100`.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Directory for `table1.csv`; the table is always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a report JSON to a legacy VTK file.
    ExportVtk {
        report: PathBuf,
        /// Defaults to the report path with a `.vtk` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print mesh counts and the validation summary.
    MeshInfo {
        #[arg(long, default_value = "disk")]
        domain: String,
        #[arg(long, default_value_t = 0)]
        refinements: u32,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        /// Read the mesh from a text file instead of generating it.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Save the mesh in text format.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, out, seed } => commands::solve(&config, out, seed),
        Command::Table1 { refinements, p, out } => commands::table1(refinements, p, out),
        Command::ExportVtk { report, out } => commands::export_vtk(&report, out),
        Command::MeshInfo {
            domain,
            refinements,
            width,
            height,
            mesh,
            write,
        } => commands::mesh_info(&domain, refinements, DomainArgs { width, height }, mesh, write),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
