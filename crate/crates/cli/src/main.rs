mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

/// Partially-masked fused Gromov-Wasserstein loss: evaluation, gradients,
/// metrics, the Coloring generator and solver benchmarks.
#[derive(Debug, Parser)]
#[command(name = "pmfgw", version, propagate_version = true)]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "PMFGW_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Suppress the human-readable summary.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Machine-readable output file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Loss value, term breakdown and iteration count for paired records.
    Compute(ComputeArgs),
    /// Analytic gradient against central differences on random instances.
    GradCheck(GradCheckArgs),
    /// Toy two-parameter landscape; CSV columns a,h,train,eval.
    Toy(ToyArgs),
    /// Edit distance and accuracy metrics of predictions against targets.
    Eval(EvalArgs),
    /// Generate a Coloring dataset.
    Coloring(ColoringArgs),
    /// Solver benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Conditional gradient iteration cap.
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Stop when the relative decrease falls below this.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Restarts; all but the first start from random plans.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// First restart's plan.
    #[arg(long, default_value = "uniform", value_parser = ["uniform", "random"])]
    pub init: String,
}

#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// Weights of the node, feature and structure terms.
    #[arg(long, default_value = "1,1,1", value_parser = commands::parse_alpha)]
    pub alpha: [f64; 3],
    /// Keep the weights as given instead of rescaling them to sum to 1.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, default_value = "bce", value_parser = ["l2", "bce"])]
    pub loss_h: String,
    #[arg(long, default_value = "l2", value_parser = ["l2", "bce", "softmax-ce"])]
    pub loss_f: String,
    #[arg(long, default_value = "bce", value_parser = ["l2", "bce"])]
    pub loss_a: String,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Predictions, one record per line.
    #[arg(long)]
    pub pred: PathBuf,
    /// Targets, paired with predictions by line.
    #[arg(long)]
    pub target: PathBuf,
    /// Padded size; defaults to the prediction size.
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[command(flatten)]
    pub loss: LossArgs,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    /// Largest padded size drawn.
    #[arg(long, default_value_t = 8)]
    pub max_nodes: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    #[command(flatten)]
    pub loss: LossArgs,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// Points per axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// Treat features as 2D positions equal within this fraction of the
    /// image width.
    #[arg(long)]
    pub pos_radius: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub image_width: f64,
    /// Compare features by their largest component (class labels).
    #[arg(long, conflicts_with = "pos_radius")]
    pub argmax: bool,
    /// Largest combined node count searched exactly.
    #[arg(long, default_value_t = 10)]
    pub exact_limit: usize,
}

#[derive(Debug, Args)]
pub struct ColoringArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "plain", value_parser = ["plain", "big", "vect"])]
    pub variant: String,
    /// Overrides the variant's value.
    #[arg(long)]
    pub min_nodes: Option<usize>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub colors: usize,
    /// Also render every image as PNG into this directory.
    #[arg(long)]
    pub png_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Solver iterations per padded size.
    /// CSV columns: m,pairs,mean_iterations,std_iterations,mean_value,mean_time_per_pair,variant.
    Iters(ItersArgs),
    /// Mean loss over a barycentric grid of weights.
    /// CSV columns: alpha_h,alpha_f,alpha_a,mean_value,mean_term_h,mean_term_f,mean_term_a.
    Alpha(AlphaArgs),
    /// Median seconds per solver iteration.
    /// CSV columns: m,factorized_seconds,naive_seconds.
    Timing(TimingArgs),
}

#[derive(Debug, Args)]
pub struct ItersArgs {
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Replace features by [F, AF].
    #[arg(long)]
    pub fd: bool,
    /// Pad to this size instead of the graph size.
    #[arg(long)]
    pub pad_to: Option<usize>,
    /// Draw graphs from a dataset instead of generating Coloring instances.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub loss: LossArgs,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    /// Subdivisions of each simplex edge.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    /// Consecutive records: prediction, target, prediction, target, ...
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub loss: LossArgs,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 15)]
    pub repeats: usize,
    /// Largest size timed on the quadruple-sum path.
    #[arg(long, default_value_t = 32)]
    pub naive_limit: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(message)) => {
            Cli::command().error(clap::error::ErrorKind::MissingRequiredArgument, message).exit()
        }
        Err(commands::Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
