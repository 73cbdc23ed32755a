mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{List, Node, Nodes};
use entperc::lattice::{Boundary, LatticeKind};

/// Entanglement percolation experiments on two-dimensional lattices.
#[derive(Debug, Parser)]
#[command(name = "entperc", version)]
pub struct Cli {
    /// TOML file presetting any flag; the command line wins.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads [env: ENTPERC_THREADS]. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave out the timestamp comment, making output byte-reproducible.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fraction of vertices in the largest cluster.
    Theta(Sampling),
    /// Probability that a node tuple touches the largest cluster.
    Pi {
        #[command(flatten)]
        sampling: Sampling,
        /// Nodes as `x,y;x,y;...`.
        #[arg(long, allow_hyphen_values = true)]
        nodes: Option<Nodes>,
    },
    /// P[A in C | A′ in C].
    Omega {
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<Node>,
        #[arg(long = "a-prime", allow_hyphen_values = true)]
        a_prime: Option<Node>,
    },
    /// Bond threshold from the crossing of L and 2L spanning probabilities.
    Pc {
        #[arg(long)]
        lattice: Option<LatticeKind>,
        /// Fixed square-bond density for the asymmetric triangular lattice.
        #[arg(long)]
        p2: Option<f64>,
        #[arg(long = "L")]
        l: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// High-density series of θ in q = 1 - p.
    Series {
        #[arg(long)]
        lattice: Option<LatticeKind>,
        #[arg(long)]
        order: Option<usize>,
        /// Print the literature row instead of enumerating.
        #[arg(long)]
        published: bool,
    },
    /// Classical protocol against a lattice transformation over a p grid.
    Compare {
        #[command(subcommand)]
        which: Comparison,
    },
    /// Regions of the asymmetric triangular lattice.
    PhaseDiagram {
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long = "L")]
        l: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Single-bond conversion probabilities.
    Scp(ScpArgs),
}

#[derive(Debug, Args)]
pub struct Sampling {
    #[arg(long)]
    lattice: Option<LatticeKind>,
    /// One density or a comma-separated list.
    #[arg(long)]
    p: Option<List>,
    /// Second bond class of the asymmetric triangular lattice.
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    boundary: Option<Boundary>,
    /// Use the given nodes only instead of averaging over translates.
    #[arg(long)]
    no_translations: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Densities as a comma-separated list; a default grid otherwise.
    #[arg(long)]
    grid: Option<List>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Also locate the crossover (dhex and bowtie).
    #[arg(long)]
    crossover: bool,
    /// Sample cap of the crossover search.
    #[arg(long = "crossover-n")]
    crossover_n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Comparison {
    /// Kagome against its transformed square lattice.
    Kagome(CompareArgs),
    /// Double-bond hexagonal: two classical protocols and swapping.
    Dhex(CompareArgs),
    /// Square lattice against the doubled square lattice.
    Doubling(CompareArgs),
    /// Bowtie against its split into triangular and square parts.
    Bowtie(CompareArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ScpArgs {
    /// SCP of one pure bond with larger Schmidt coefficient alpha0.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Distill one singlet from bonds with these alpha0 values.
    #[arg(long)]
    distill: Option<List>,
    /// Swap two bonds with these single-bond SCPs.
    #[arg(long)]
    swap: Option<List>,
    /// Per-bond density of the double bond under independent conversion.
    #[arg(long)]
    cep1: Option<f64>,
    /// Per-bond density of the double bond under joint distillation.
    #[arg(long)]
    cep2: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_CONFIG } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
