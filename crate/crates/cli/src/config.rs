//! Command-line arguments and the serializable run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "cfx",
    version,
    about = "Generalized continued fractions: expansions, periods, invariant measures and figure data"
)]
pub struct Cli {
    /// Seed for stochastic commands; falls back to CFX_SEED, then 0.
    #[arg(long, global = true, env = "CFX_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for the Monte Carlo drivers (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Directory for output files. Analysis commands default to the current
    /// directory; `digits` and `lagrange` only write files when it is given.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Output table format; a `.meta.json` sidecar is always written next to it.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    /// Exact when a product-type point is written with fractions or surds, else binary64.
    Auto,
    /// Exact rational or surd arithmetic (may be slow for non-product systems).
    Exact,
    /// Double-double Gauss steps on binary64 points.
    Float,
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Digits, orbit and convergents of one point.
    Digits(DigitsArgs),
    /// Period detection and the annihilating quadratic of a surd point.
    Lagrange(LagrangeArgs),
    /// Orbit-occupation histogram (empirical invariant density).
    Density(DensityArgs),
    /// Coverage estimates of mu(T^n A) for a box A.
    Mixing(MixingArgs),
    /// Distortion ratios sup J / inf J over cylinders.
    Renyi(RenyiArgs),
    /// Exact cylinder boxes with digit labels.
    Cylinders(CylindersArgs),
    /// Image of the domain boundary under one Gauss step.
    Boundary(BoundaryArgs),
    /// Singular values of d iota on an (l, r) grid with expanding-region flags.
    Singvals(SingvalsArgs),
    /// Normalization quadrature and invariance residuals of the closed-form density.
    Normcheck(NormcheckArgs),
    /// List the available systems.
    #[serde(skip)]
    Systems,
    /// Re-run a saved configuration (a `.meta.json` sidecar or a bare RunConfig).
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DigitsArgs {
    /// System name, e.g. `product:2`, `diamond-plus`, `alpha:1/2` (see `cfx systems`).
    #[arg(long)]
    pub system: String,
    /// Comma-separated coordinates: decimals, fractions `p/q` or surds `(p+q*sqrt(D))/r`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, default_value_t = 20)]
    pub max_n: usize,
    #[arg(long, value_enum, default_value_t = Arith::Auto)]
    pub arith: Arith,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LagrangeArgs {
    #[arg(long)]
    pub system: String,
    /// Comma-separated surd literals `(p+q*sqrt(D))/r` (rationals allowed).
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, default_value_t = 1000)]
    pub orbits: u64,
    /// Recorded steps per orbit.
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    #[arg(long, default_value_t = 100)]
    pub burn_in: u64,
    /// Cells per axis.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MixingArgs {
    #[arg(long)]
    pub system: String,
    /// Box A in box coordinates: `lo1,hi1[,lo2,hi2,...]`.
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RenyiArgs {
    #[arg(long)]
    pub system: String,
    /// Digit strings such as `(2,3)(1,1)` or `2 5 1`; repeatable. When absent,
    /// all cylinders up to `--depth` with digits bounded by `--digit-bound`.
    #[arg(long, allow_hyphen_values = true)]
    pub cylinder: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, default_value_t = 4)]
    pub digit_bound: i64,
    /// Interior low-discrepancy points per cylinder (corners are always used).
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CylindersArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Digit coordinates range over `-bound..=bound`; empty cylinders are skipped.
    #[arg(long, default_value_t = 6)]
    pub digit_bound: i64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundaryArgs {
    #[arg(long, default_value = "square")]
    pub system: String,
    #[arg(long, default_value_t = 400)]
    pub samples_per_edge: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SingvalsArgs {
    /// Grid cells per axis on (0,1)^2.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NormcheckArgs {
    #[arg(long)]
    pub system: String,
    /// Midpoint-rule points per axis.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Number of random boxes for the invariance residual.
    #[arg(long, default_value_t = 20)]
    pub boxes: usize,
    #[arg(long, default_value_t = 10_000)]
    pub branch_cut: u64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReplayArgs {
    /// Sidecar or RunConfig JSON file.
    pub path: PathBuf,
}

/// Everything needed to reproduce a run; unknown fields are rejected.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
    pub command: Command,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Self {
        RunConfig {
            seed: cli.seed.unwrap_or(0),
            workers: cli.workers,
            output_dir: cli.output_dir,
            format: cli.format,
            command: cli.command,
        }
    }
}
