use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bracketflow", version, about = "Ricci flow on homogeneous spaces via the bracket flow")]
pub struct Cli {
    /// JSON file supplying defaults for any flag below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files; without it results go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative integrator tolerance (absolute tolerance is 1e-3 of it).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Format of `--bracket` seed files.
    #[arg(long, global = true, value_enum)]
    pub seed_format: Option<SeedFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeedFormat {
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature, validation, soliton fit and injectivity bound of one point.
    Ricci(SourceArgs),
    /// Integrate a flow and write its trajectory.
    Flow(FlowArgs),
    /// Classify the flow (or evaluate its velocity) over a parameter grid.
    Sweep(SweepArgs),
    /// Audit the evolution identities along a trajectory.
    Check(CheckArgs),
    /// Compare the bracket flow with the metric flow through the gauge maps.
    Equiv(EquivArgs),
}

#[derive(Clone, Debug, Default, Args)]
pub struct SourceArgs {
    /// unimodular3, berger3, semisimple or semisimple-su2.
    #[arg(long)]
    pub family: Option<String>,
    /// Comma-separated family parameters; semisimple takes a,b,h,m.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    /// Structure constants as a JSON file `{"q", "n", "entries": [[i, j, k, v], ...]}`.
    #[arg(long, conflicts_with = "family")]
    pub bracket: Option<PathBuf>,
    /// Integrate a family point as a full tensor instead of its reduced system.
    #[arg(long)]
    pub full_tensor: bool,
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// unnormalized, volume-element, scalar-curvature, bracket-norm or ricci-norm.
    #[arg(long)]
    pub strategy: Option<String>,
    /// `start:end`; a negative end runs backwards.
    #[arg(long, allow_hyphen_values = true)]
    pub t_span: Option<String>,
    /// Output samples, endpoints included.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// `name=lo:hi:count`, repeatable; the first axis varies slowest.
    #[arg(long = "axis", allow_hyphen_values = true)]
    pub axes: Vec<String>,
    /// `flow` classifies each cell, `rhs` records the normalized velocity.
    #[arg(long, value_enum)]
    pub mode: Option<SweepMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Flow,
    Rhs,
}

#[derive(Clone, Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Largest accepted relative error per identity.
    #[arg(long)]
    pub audit_tol: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct EquivArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub t_span: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Largest accepted deviation between the two sides.
    #[arg(long)]
    pub threshold: Option<f64>,
}
