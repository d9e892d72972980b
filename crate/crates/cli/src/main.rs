use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bfcs::simulate::{GeneratingModel, X1Kind};
use bfcs::{BfcsError, ErrorKind, PriorFamily};
use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

/// Bayes factors of covariance structures: causal-chain probabilities for
/// marker/trait triplets and regulatory network scans.
#[derive(Debug, Parser)]
#[command(name = "bfcs", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one triplet: eleven Bayes factors, posterior and chain probability.
    Triplet(TripletArgs),
    /// Scan every ordered trait pair against the markers.
    Scan(ScanArgs),
    /// Generate synthetic data or run the consistency experiment.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Compare predicted regulation probabilities against a true edge list.
    Eval(EvalArgs),
    /// Rerun a command from its manifest and check the outputs match.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone)]
pub enum PriorChoice {
    Family(PriorFamily),
    UniformModels,
    Custom(PathBuf),
}

impl std::fmt::Display for PriorChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PriorChoice::Family(family) => f.write_str(family.name()),
            PriorChoice::UniformModels => f.write_str("uniform-models"),
            PriorChoice::Custom(path) => write!(f, "custom:{}", path.display()),
        }
    }
}

fn parse_prior(s: &str) -> Result<PriorChoice, String> {
    if let Some(path) = s.strip_prefix("custom:") {
        if path.is_empty() {
            return Err("custom prior needs a path, e.g. custom:weights.tsv".into());
        }
        return Ok(PriorChoice::Custom(PathBuf::from(path)));
    }
    if s == "uniform-models" {
        return Ok(PriorChoice::UniformModels);
    }
    s.parse::<PriorFamily>()
        .map(PriorChoice::Family)
        .map_err(|_| format!("unknown prior '{s}' (expected dag, dag-bk, dmag, dmag-bk, uniform-models or custom:<path>)"))
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Structure prior: dag, dag-bk, dmag, dmag-bk, uniform-models or custom:<path>.
    #[arg(long, default_value = "dmag-bk", value_parser = parse_prior)]
    pub prior: PriorChoice,
    /// Degrees of freedom of the inverse-Wishart prior.
    #[arg(long, default_value_t = 4)]
    pub nu: u32,
    /// Use raw cross-products instead of centering each column.
    #[arg(long)]
    pub no_center: bool,
}

#[derive(Debug, Args)]
pub struct TripletArgs {
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "data",
        conflicts_with = "data"
    )]
    pub r12: Option<f64>,
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "data",
        conflicts_with = "data"
    )]
    pub r13: Option<f64>,
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "data",
        conflicts_with = "data"
    )]
    pub r23: Option<f64>,
    /// Number of samples behind the correlations.
    #[arg(long, required_unless_present = "data", conflicts_with = "data")]
    pub n: Option<u64>,
    /// Table with exactly three numeric columns (X1, X2, X3) and a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Trait table: one column per trait, one row per sample.
    #[arg(long)]
    pub expression: PathBuf,
    /// Marker table with the same rows as the expression table.
    #[arg(long)]
    pub genotype: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Only try the K markers most correlated with the regulator trait.
    #[arg(long, value_name = "K", conflicts_with = "marker_map")]
    pub top_k_markers: Option<usize>,
    /// Explicit `marker<TAB>trait` list of markers to try per regulator.
    #[arg(long)]
    pub marker_map: Option<PathBuf>,
    #[arg(long, env = "BFCS_THREADS")]
    pub threads: Option<usize>,
    /// Output regulation matrix (TSV); the manifest goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Sample a sparse regulatory network and a dataset from it.
    Grn(GrnArgs),
    /// Chain posterior across generators, sample sizes and repetitions.
    Consistency(ConsistencyArgs),
}

#[derive(Debug, Args)]
pub struct GrnArgs {
    #[arg(long, default_value_t = 100)]
    pub genes: usize,
    #[arg(long, default_value_t = 51)]
    pub edges: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long, value_delimiter = ',', default_value = "chain,independent,full")]
    pub models: Vec<GeneratingModel>,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Distribution of X1: gaussian, bernoulli or both.
    #[arg(long, value_delimiter = ',', default_value = "gaussian")]
    pub x1: Vec<X1Kind>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "BFCS_THREADS")]
    pub threads: Option<usize>,
    /// Long-format table, one row per (generator, n, repetition).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Regulation matrix written by `scan`.
    #[arg(long)]
    pub predictions: PathBuf,
    /// True edges, `source<TAB>target[<TAB>coefficient]`.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// A problem with the inputs that is not a library error.
#[derive(Debug)]
pub struct DataError(pub String);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataError {}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;
pub const EXIT_IO: u8 = 5;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<BfcsError>() {
            return match e.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numerical => EXIT_NUMERICAL,
                ErrorKind::Io => EXIT_IO,
            };
        }
        if cause.downcast_ref::<clap::Error>().is_some() {
            return EXIT_USAGE;
        }
        if cause.downcast_ref::<DataError>().is_some() {
            return EXIT_DATA;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_DATA
}

/// Parse and run one invocation. `args` excludes the program name.
pub fn run(args: &[OsString]) -> Result<()> {
    let argv: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cli =
        Cli::try_parse_from(std::iter::once(OsString::from("bfcs")).chain(args.iter().cloned()))?;
    commands::dispatch(cli.command, &argv)
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return if clap_err.use_stderr() {
                    ExitCode::from(EXIT_USAGE)
                } else {
                    ExitCode::SUCCESS
                };
            }
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
