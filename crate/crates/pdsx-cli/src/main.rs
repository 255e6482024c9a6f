//! pdsx: analyze Cuntz-Krieger matrices, check representation files
//! against relation families, enumerate truncated relation spectra, run
//! quasi-lattice queries and compression constructions.
//!
//! Reports go to stdout as JSON with stable ordering; diagnostics go to
//! stderr. Exit codes: 0 success, 2 parse failure, 3 semantic input
//! error, 4 resource guard exceeded. Setting PDSX_GUARD_OVERRIDE lifts
//! the size guards.

mod commands;

use clap::{Parser, Subcommand};
use pdsx_core::{Limits, PdsxError};

#[derive(Parser)]
#[command(name = "pdsx", version, about = "finite-scale partial dynamical systems toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a {0,1} matrix: condition (I), topological freeness,
    /// simplicity, witnesses, optional DOT export.
    AnalyzeCk {
        /// Matrix file: JSON `{"n": 2, "a": [[1,1],[1,1]]}` or text rows of 0/1
        path: String,
        /// Probe depth for the invariant-cylinder analysis
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Write the labelled digraph to this DOT file
        #[arg(long)]
        dot: Option<String>,
        /// Emit the report as JSON (the default; kept for symmetry)
        #[arg(long)]
        json: bool,
        /// Include wall-clock timing in the report (breaks byte determinism)
        #[arg(long)]
        timing: bool,
    },
    /// Check a partial-representation file against a relation family.
    CheckRep {
        /// Representation file (JSON)
        path: String,
        /// Relation source: `ck:<matrix>`, `nica:<instance>`, or `file:<polys>`
        #[arg(long)]
        relations: String,
        /// Residual tolerance; 0 requires exact entries
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Enumerate the truncated spectrum of a relation family over F_n.
    Spectrum {
        /// Relation source: `empty`, `ck:<matrix>`, or `file:<polys>`
        #[arg(long)]
        relations: String,
        #[arg(long)]
        rank: u32,
        #[arg(long)]
        radius: u32,
        /// Emit JSON (the default; kept for symmetry)
        #[arg(long)]
        json: bool,
    },
    /// Quasi-lattice order queries on a registered instance.
    Qlattice {
        /// Instance: `ZkNk:<k>`, `FreeQL:<n>`, or a JSON file/literal
        #[arg(long)]
        instance: String,
        #[command(subcommand)]
        query: commands::qlattice::Query,
    },
    /// Run the verified compression construction on a finite system.
    Hcompress {
        /// System file: JSON { "states", "group", "theta" }
        #[arg(long)]
        system: String,
        /// Element file: JSON { "terms": { "t": { "state": coeff } } }
        #[arg(long)]
        element: String,
        /// Compression tolerance ε
        #[arg(long)]
        eps: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    let limits = if std::env::var_os("PDSX_GUARD_OVERRIDE").is_some() {
        Limits::unlimited()
    } else {
        Limits::default()
    };
    let outcome = match cli.command {
        Command::AnalyzeCk {
            path,
            depth,
            dot,
            json: _,
            timing,
        } => commands::analyze_ck::run(&path, depth, dot.as_deref(), timing),
        Command::CheckRep {
            path,
            relations,
            tol,
        } => commands::check_rep::run(&path, &relations, tol),
        Command::Spectrum {
            relations,
            rank,
            radius,
            json: _,
        } => commands::spectrum::run(&relations, rank, radius, &limits),
        Command::Qlattice { instance, query } => commands::qlattice::run(&instance, &query, &limits),
        Command::Hcompress {
            system,
            element,
            eps,
        } => commands::hcompress::run(&system, &element, eps),
    };
    match outcome {
        Ok(()) => {}
        Err(err) => {
            eprintln!("pdsx: {err}");
            std::process::exit(err.exit_class());
        }
    }
}

/// Loads a file, classifying I/O problems as parse-level failures.
pub(crate) fn read_input(path: &str) -> Result<String, PdsxError> {
    std::fs::read_to_string(path)
        .map_err(|e| PdsxError::Parse(format!("cannot read {path}: {e}")))
}

pub(crate) fn parse_json(text: &str) -> Result<serde_json::Value, PdsxError> {
    serde_json::from_str(text).map_err(|e| PdsxError::Parse(format!("invalid JSON: {e}")))
}
