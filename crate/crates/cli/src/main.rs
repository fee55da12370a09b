use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "qlat", version, about = "Sperner-type computations on subspace and subset lattices")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format: json or csv (binom and alpha print plain numbers by default).
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed recorded in reports and used by sampled modes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Lattice cache directory.
    #[arg(long, global = true, env = "QLAT_CACHE")]
    pub cache: Option<PathBuf>,
    /// Largest level a linear lattice may have.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub max_level_size: u64,
    /// Cap on the number of bases enumerated for covering checks.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub basis_cap: u64,
    /// Cap on search nodes.
    #[arg(long, global = true, default_value_t = 2_000_000_000)]
    pub node_cap: u64,
    /// Include wall-clock runtime in reports.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LatticeArgs {
    /// Field size for L_n(q).
    #[arg(long, conflicts_with = "boolean")]
    pub q: Option<u32>,
    /// Use the Boolean lattice B_n.
    #[arg(long)]
    pub boolean: bool,
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TheoremArgs {
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Binomial C(n,k), or Gaussian binomial [n,k]_q when q is given.
    Binom { n: i64, k: i64, q: Option<u32> },
    /// Number of unordered bases of F_q^n.
    Alpha { q: u32, n: usize },
    /// Build, cache and inspect lattices.
    Lattice {
        #[command(subcommand)]
        action: LatticeCmd,
    },
    /// Run a verifier.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Evaluate a theorem's bound.
    Bounds(BoundsArgs),
    /// Extremal-family and colouring searches.
    Search {
        #[command(subcommand)]
        what: SearchCmd,
    },
    /// Shadow checks.
    Shadow {
        #[command(subcommand)]
        what: ShadowCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum LatticeCmd {
    /// Enumerate a lattice and write it to the cache directory.
    Build(LatticeArgs),
    /// Level sizes and digest, read from the cache when present.
    Info(LatticeArgs),
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Every basis sublattice and the multiplicity of every subspace.
    Covering {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
    },
    /// The transfer identity on seeded random families.
    Transfer {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        /// Also sum over all basis sublattices directly.
        #[arg(long)]
        direct: bool,
    },
    /// Check a theorem over a scope of families.
    Theorem {
        #[arg(long)]
        id: String,
        #[command(flatten)]
        lattice: LatticeArgs,
        /// exhaustive, antichains, complexes, level:K or sample:COUNT:SEED
        #[arg(long, default_value = "exhaustive")]
        scope: String,
        #[command(flatten)]
        params: TheoremArgs,
        /// Family size cap for literal tuple scans.
        #[arg(long)]
        tuple_cap: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub theorem: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "boolean")]
    pub q: Option<u32>,
    #[arg(long)]
    pub boolean: bool,
    #[command(flatten)]
    pub params: TheoremArgs,
    /// Build the lattice and attach the sharpness construction.
    #[arg(long)]
    pub construct: bool,
    /// Field sizes for the L4.9 grid.
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 4, 5])]
    pub qs: Vec<u32>,
    #[arg(long, default_value_t = 4)]
    pub max_l: usize,
    #[arg(long, default_value_t = 8)]
    pub span: usize,
}

#[derive(Subcommand, Debug)]
pub enum SearchCmd {
    /// Largest family avoiding a configuration.
    Max {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// P2, chain:K, Q2, disjoint:S, balg:D or qalg:D
        #[arg(long)]
        forbid: String,
        /// exact, branch_bound or sample
        #[arg(long, default_value = "exact")]
        mode: String,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Stop once a family of this size is found.
        #[arg(long)]
        prune_bound: Option<usize>,
    },
    /// Colouring without a monochromatic d-dimensional algebra.
    Ramsey {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1 << 24)]
        cap: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ShadowCmd {
    /// Shadow lower bound on every family of k-dimensional subspaces.
    Check {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            let written = match &cli.global.out {
                Some(path) => std::fs::write(path, &out.text).map_err(|e| e.to_string()),
                None => std::io::stdout().write_all(out.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if out.violations { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
