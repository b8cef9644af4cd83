use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_CODES: &str = "\
Exit codes:
  0  success, every check passed
  1  I/O or other failure
  2  invalid configuration (bad flag value, missing or unreadable file)
  3  variety error (invalid definition, point not regular)
  4  form error (invalid expression, degree or support)
  5  solver or quadrature error
  6  a verification check failed its tolerance

Environment:
  DBAR_THREADS  maximum number of worker threads";

#[derive(Debug, Parser)]
#[command(
    name = "dbar",
    version,
    about = "Solve and verify the dbar-equation on weighted homogeneous varieties"
)]
#[command(after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the solution operator at points of a variety.
    Solve(SolveArgs),
    /// Check residuals and closedness of corpus or user forms.
    Verify(VerifyArgs),
    /// Empirical Lp operator-norm ratios.
    LpProbe(LpProbeArgs),
    /// Sign cancellation, commutation and power-map identities.
    IdentityCheck(IdentityArgs),
    /// List the built-in varieties and forms.
    CorpusList(OutputArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Weighted,
    Cone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    /// Weighted one-variable Cauchy operator on a bump family.
    Cauchy,
    /// Operator-norm constant on a variety with a global parametrization.
    Constant,
    /// Ratios along supports shrinking to the singular point.
    Shrink,
}

#[derive(Clone, Debug, Default, Args)]
pub struct QuadArgs {
    /// Radial rings per decade at the coarsest level.
    #[arg(long)]
    pub rings: Option<usize>,
    /// Angular nodes per polar disc at the coarsest level.
    #[arg(long)]
    pub angles: Option<usize>,
    /// Relative stopping tolerance of adaptive quadrature.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Highest refinement level.
    #[arg(long)]
    pub max_depth: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Directory receiving reports and tables.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Format of tabular output; reports are always JSON.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record wall time in reports (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Clone, Debug, Args)]
pub struct PointArgs {
    /// Number of random points, or a JSON file of points
    /// (`[[[re, im], ...], ...]`).
    #[arg(long)]
    pub points: Option<String>,
    /// Polar grid of `N × N` points along one scaling orbit.
    #[arg(long, conflicts_with = "points")]
    pub grid: Option<usize>,
    /// Seed of every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args)]
pub struct SolverArgs {
    /// Fixed integer sigma; chosen automatically when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<i32>,
    /// Lp exponent, a number >= 1 or `inf`.
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = Mode::Weighted)]
    pub mode: Mode,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SolveArgs {
    /// Corpus name or path of a variety JSON file.
    #[arg(long)]
    pub variety: String,
    /// Corpus form name or path of a form JSON file.
    #[arg(long)]
    pub form: String,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Skip the finite-difference residual at each point.
    #[arg(long)]
    pub no_residual: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    /// Corpus name or variety file; the whole corpus when absent.
    #[arg(long)]
    pub variety: Option<String>,
    /// Corpus form name or form file; every form of the variety when absent.
    #[arg(long)]
    pub form: Option<String>,
    /// Only forms of this degree.
    #[arg(long)]
    pub q: Option<usize>,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-2)]
    pub fd_step: f64,
    /// Residual pass threshold.
    #[arg(long, default_value_t = 1e-4)]
    pub residual_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct LpProbeArgs {
    #[arg(long, value_enum, default_value_t = ProbeKind::Constant)]
    pub kind: ProbeKind,
    /// Corpus variety with a global parametrization.
    #[arg(long, default_value = "cone")]
    pub variety: String,
    /// Degree of the probed forms.
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// Members of the base family; doubling adds the midpoints.
    #[arg(long, default_value_t = 10)]
    pub family: usize,
    /// Weights `δ` of the Cauchy probe.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 0.9])]
    pub delta: Vec<f64>,
    /// Monte Carlo samples of the constant probe.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct IdentityArgs {
    /// Corpus name or variety file; the whole corpus when absent.
    #[arg(long)]
    pub variety: Option<String>,
    /// Corpus form name or form file; every form of the variety when absent.
    #[arg(long)]
    pub form: Option<String>,
    /// Largest degree of the exhaustive sign test.
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    /// Largest ambient dimension of the exhaustive sign test.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 1e-5)]
    pub commutation_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub phi_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
