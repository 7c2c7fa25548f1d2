use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const UNITS: &str = "Units are geometric (c = hbar = 1) with one global length unit: \
widths and radii are lengths, the Hubble rate and gap are inverse lengths, \
curvature components are inverse lengths squared.";

#[derive(Debug, Parser)]
#[command(
    name = "curvprobe",
    version,
    about = "Curvature corrections to smeared field fluctuations and gapless detector states",
    after_help = UNITS
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corrected variance of the smeared field at one event.
    Variance(VarianceArgs),
    /// Final state of a gapless detector, plus the gapped Minkowski probability.
    Detector(DetectorArgs),
    /// Closed-form coefficients against independent oracles, and the P_ln check.
    Validate(ValidateArgs),
    /// Numeric world function and determinants against their curvature expansions.
    Synge(SyngeArgs),
    /// Variance breakdown over a grid of region sizes T = sigma = ell.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogConventionArg {
    /// ln((x - x')^2 / l0^2)
    Standard,
    /// ln((x - x')^2 / (2 l0^2))
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct CurvatureArgs {
    /// Analytic spacetime: minkowski, de_sitter, schwarzschild, constant_curvature.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub hubble: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub radius: Option<f64>,
    /// Sectional curvature of the constant_curvature preset.
    #[arg(long = "k", allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Text file of frame components, one `R_abcd = value` per line.
    #[arg(long)]
    pub curvature_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SmearingArgs {
    /// Temporal width.
    #[arg(long = "T", allow_hyphen_values = true)]
    pub t: f64,
    /// Spatial width.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: f64,
    /// Length scale inside the Hadamard logarithm.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub l0: f64,
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Relative tolerance for deterministic quadrature.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Evaluation budget per adaptive integral.
    #[arg(long)]
    pub max_evaluations: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = LogConventionArg::Standard)]
    pub log_convention: LogConventionArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Write the report here instead of stdout. With csv, JSON still goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub curvature: CurvatureArgs,
    #[command(flatten)]
    pub smearing: SmearingArgs,
    /// Constant state-dependent contribution.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub state_term: f64,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    #[command(flatten)]
    pub curvature: CurvatureArgs,
    #[command(flatten)]
    pub smearing: SmearingArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub state_term: f64,
    /// Coupling constant.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Energy gap for the gapped excitation probability.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gap_omega: f64,
    /// Initial state: ground, excited, or a Bloch vector `x,y,z`.
    #[arg(long, default_value = "ground", allow_hyphen_values = true)]
    pub rho0: String,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long = "T", default_value_t = 1.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sigma: f64,
    /// Run on the grid (T, sigma) in {0.5, 1, 2}^2 instead of one point.
    #[arg(long)]
    pub grid: bool,
    /// Monte-Carlo samples for the P_ln check.
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_evaluations: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SyngeArgs {
    #[command(flatten)]
    pub curvature: CurvatureArgs,
    /// First point in normal coordinates, `t,x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Second point in normal coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub xp: Option<String>,
    /// Comma-separated scale factors applied to both points.
    #[arg(long, default_value = "1,0.5,0.25,0.125,0.0625")]
    pub scales: String,
    /// Jacobian step for the numeric metric determinant, relative to the separation.
    #[arg(long, default_value_t = 0.05)]
    pub h_fraction: f64,
    /// Shooting and integrator tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub curvature: CurvatureArgs,
    #[arg(long, default_value_t = 0.01)]
    pub ell_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ell_max: f64,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub l0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub state_term: f64,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
