use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "gst", version, about = "Independence and influence in symmetric games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    #[arg(long, env = "GST_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EpsArgs {
    #[arg(long, requires = "eps_max")]
    pub eps_min: Option<f64>,
    #[arg(long, requires = "eps_min")]
    pub eps_max: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub eps_steps: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Q_n, its eigenvalues, inertia and slice type.
    Form {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Psi on palindromic vectors, its kernel and the b2 comparison.
    Restricted {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Brute-force independence residual against -Psi.
    Oracle {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Comma-separated vector to test instead of random ones, e.g. `1,0,0` or `1/2,1/3,0`.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        output: Output,
    },
    /// Sample GST_n and count epsilon-graph components.
    Components {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        eps: EpsArgs,
        /// Fail unless the stable count matches the reference table.
        #[arg(long)]
        check: bool,
        /// Also write the sampled cloud (`.json` for JSON, CSV otherwise).
        #[arg(long)]
        cloud_out: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        output: Output,
    },
    /// Build and validate a witness path between two GST points.
    Path {
        #[arg(long)]
        n: usize,
        #[arg(long, requires = "q", conflicts_with = "random_pair")]
        p: Option<String>,
        #[arg(long, requires = "p")]
        q: Option<String>,
        #[arg(long)]
        random_pair: bool,
        /// With --random-pair, pick endpoints of opposite cylinder sign.
        #[arg(long, requires = "random_pair")]
        opposite_cylinders: bool,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long)]
        waypoints_csv: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        output: Output,
    },
    /// Every check for n = 3..=nmax as one JSON document.
    Report {
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
