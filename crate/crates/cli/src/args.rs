//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "alq-panel", version, about = "Bayesian quantile regression for panel count data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a simulated panel and its true parameters.
    Simulate(SimulateArgs),
    /// Fit jitter-averaged quantile models.
    Fit(FitArgs),
    /// Predict count quantiles from a fitted summary.
    Predict(PredictArgs),
    /// Kernel density and summary of one CSV column.
    Diagnose(DiagnoseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Design {
    /// Random intercept.
    Study1,
    /// Random intercept and slope.
    Study2,
}

impl Design {
    pub fn name(self) -> &'static str {
        match self {
            Design::Study1 => "study1",
            Design::Study2 => "study2",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub design: Design,
    #[arg(long, default_value_t = 20)]
    pub subjects: usize,
    /// Observations per subject.
    #[arg(long, default_value_t = 5)]
    pub per: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Panel CSV to write.
    #[arg(short, long, default_value = "sim.csv")]
    pub output: PathBuf,
    /// Truth JSON; defaults to the output path with `.truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    /// Random-effect design from the `s` columns (intercept only if none).
    Columns,
    /// Ignore any `s` columns and fit a random intercept.
    RandomIntercept,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TrialModel {
    /// `s = (1)`.
    Intercept,
    /// `s = (1, Visit4)`.
    Visit,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Panel CSV `subject,y,x1..xk[,s1..sl]`.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for summaries, traces and densities.
    #[arg(short, long, default_value = "fit")]
    pub output: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
    pub quantiles: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub m_jitter: usize,
    /// Total sweeps per chain, burn-in included.
    #[arg(long, default_value_t = 12_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 2_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Latent floor.
    #[arg(long, default_value_t = 1e-5)]
    pub zeta: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub a1: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub a2: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub b1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b2: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c2: f64,
    /// Use the σ conditional without the mixture-latent factors.
    #[arg(long)]
    pub paper_literal_sigma: bool,
    /// Chains run concurrently.
    #[arg(long, env = "ALQ_PANEL_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = ModelChoice::Columns)]
    pub model: ModelChoice,
    /// Input is per-visit trial data `subject,seizures,baseline,age,treatment,visit`.
    #[arg(long)]
    pub progabide_covariates: bool,
    #[arg(long, value_enum, default_value_t = TrialModel::Intercept)]
    pub progabide_model: TrialModel,
    /// Credible level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Points in each density grid.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// `summary.json` of one quantile.
    #[arg(long)]
    pub summary: PathBuf,
    /// Covariate CSV `subject,x1..xk[,s1..sl]`; a `y` column is ignored.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(short, long, default_value = "predictions.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "value")]
    pub column: String,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Density CSV `x,density`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
