use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact SMP leakage, protocol transforms and finite-size bounds.
///
/// Every global flag can also be set through an environment variable named
/// after it with an `SMP_` prefix, for example `SMP_EPSILON=0.05`.
#[derive(Debug, Parser)]
#[command(name = "smpleak", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Target error ε of the bounds, in [0, 1/2).
    #[arg(long, global = true, env = "SMP_EPSILON", default_value_t = 0.01)]
    pub epsilon: f64,

    /// Smallest input length of a sweep.
    #[arg(long, global = true, env = "SMP_N_MIN", default_value_t = 1e4)]
    pub n_min: f64,

    /// Largest input length of a sweep.
    #[arg(long, global = true, env = "SMP_N_MAX", default_value_t = 1e12)]
    pub n_max: f64,

    /// Number of log-spaced sweep points.
    #[arg(long, global = true, env = "SMP_STEPS", default_value_t = 33)]
    pub steps: usize,

    /// Mean photon number of the quantum fingerprinting model.
    #[arg(long, global = true, env = "SMP_MU", default_value_t = smpleak::bounds::DEFAULT_MU)]
    pub mu: f64,

    /// Multiplier of the quantum leakage curve.
    #[arg(long, global = true, env = "SMP_QIL_SCALE", default_value_t = 1.0)]
    pub qil_scale: f64,

    /// Seed of every randomized search.
    #[arg(long, global = true, env = "SMP_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Output format of `bounds`.
    #[arg(long, global = true, env = "SMP_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "SMP_OUT")]
    pub out: Option<PathBuf>,

    /// Largest number of cells an exact enumeration may touch.
    #[arg(long, global = true, env = "SMP_CELL_CAP", default_value_t = smpleak::smp::DEFAULT_CELL_CAP)]
    pub cell_cap: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the communication and leakage lower bounds against the quantum curve.
    Bounds,

    /// Smallest n at which the quantum curve drops below the leakage bound.
    Crossover,

    /// Evaluate error, costs and leakage of a protocol file.
    Simulate {
        protocol: PathBuf,

        /// `eq:n` for equality on n bits, or a function table file.
        #[arg(long = "function", short = 'f')]
        function: String,

        /// Input prior over X × Y (row-major JSON array) for distributional leakage.
        #[arg(long)]
        prior: Option<PathBuf>,
    },

    /// Apply a transform pipeline such as `compress -> truncate:0.25 -> newman:0.25`.
    Transform {
        protocol: PathBuf,

        #[arg(long = "function", short = 'f')]
        function: String,

        /// Stages separated by `->`, `→` or `;`. Empty means identity.
        #[arg(long, default_value = "")]
        pipeline: String,

        /// Candidate sets tried by each derandomization stage.
        #[arg(long, default_value_t = smpleak::transforms::DEFAULT_RESTARTS)]
        restarts: usize,

        /// Stream positions a compressed side tries before its escape code.
        #[arg(long, default_value_t = smpleak::transforms::DEFAULT_CAP)]
        stream_cap: u32,

        /// Where to write the JSON report; standard error when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Run the randomized identity suite, or validate protocol files.
    Verify {
        /// Number of random fixtures.
        #[arg(long, default_value_t = 100)]
        count: usize,

        /// Validate these protocol files instead of running the suite.
        #[arg(long = "protocol")]
        protocols: Vec<PathBuf>,

        /// Skip the compression exactness identity.
        #[arg(long)]
        no_compress: bool,
    },

    /// Print a bundled fixture protocol as JSON.
    Fixture {
        /// One of verbatim:n, constant:n, shared-hash:n,k, private-hash:n,k,
        /// two-length:p,len,flip or uniform-bit.
        name: String,
    },
}
