//! `sft`: entropy tables, periodic counts, mixing diagnostics and lattice
//! reductions for two-dimensional shifts of finite type.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sft_core::spectral::{Reduction, DEFAULT_TOL};
use sft_core::SftError;

use report::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] SftError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(SftError::CapExceeded(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sft", version, about = "Entropy and periodic-pattern tools for 2D shifts of finite type")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = Format::Tsv, global = true)]
    pub format: Format,
    /// Report logarithms in base 2 instead of natural logarithms.
    #[arg(long, global = true)]
    pub log2: bool,
    /// On a size cap, emit the completed cells instead of failing.
    #[arg(long, global = true)]
    pub partial: bool,
    /// Relative tolerance of the spectral radius bracket.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReductionArg {
    Full,
    Weak,
    Max,
}

impl From<ReductionArg> for Reduction {
    fn from(r: ReductionArg) -> Self {
        match r {
            ReductionArg::Full => Reduction::Full,
            ReductionArg::Weak => Reduction::WeaklyReduced,
            ReductionArg::Max => Reduction::MaxIrreducible,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy sequences from Hₙ, Vₙ, Tₘ and the shear transfer matrices.
    Entropy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        #[arg(long, default_value_t = 6)]
        q_max: usize,
        /// Also tabulate the periodic grid up to this many rows.
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Exact count of configurations periodic under [[n, ell], [0, k]].
    PeriodicCount {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        ell: usize,
        #[arg(long)]
        k: usize,
    },
    /// Brute-force count on a sheared torus, or on an n × k strip with --strip.
    OracleCount {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        ell: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        strip: bool,
        #[arg(long, default_value_t = sft_core::oracle::DEFAULT_NODE_CAP)]
        node_cap: u64,
    },
    /// Diameters, self-loops and gluing exponents of Tₘ.
    MixingCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        #[arg(long, value_enum, default_value_t = ReductionArg::Weak)]
        reduction: ReductionArg,
    },
    /// c(m, k) = |Tₘᵏ| / ρ(Tₘ)ᵏ.
    Domination {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        m_max: usize,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
    },
    /// Hermite normal form of a sublattice, optionally rewritten in another system.
    Hnf {
        /// Coordinate system a b c d of the --hnf triple.
        #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["A", "B", "C", "D"])]
        gamma: Option<Vec<i64>>,
        /// Triple M L K of [[M, L], [0, K]].
        #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["M", "L", "K"])]
        hnf: Option<Vec<i64>>,
        /// Target system; defaults to the standard one.
        #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["A", "B", "C", "D"])]
        target: Option<Vec<i64>>,
        /// Reduce an arbitrary generator matrix a11 a12 a21 a22 instead.
        #[arg(long, num_args = 4, allow_negative_numbers = true, conflicts_with_all = ["gamma", "hnf"])]
        matrix: Option<Vec<i64>>,
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
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sft: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
