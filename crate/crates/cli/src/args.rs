use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mop_lattice::{Axis, OperatorKind, PathPolicy};

#[derive(Debug, Parser)]
#[command(
    name = "moplat",
    version,
    about = "Multiple orthogonal polynomial tables, recurrences and lattice operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a polynomial table from moments and/or the recurrence.
    Generate(GenerateArgs),
    /// Check the consistency conditions, degeneracy and symmetrizability of a field.
    Verify(VerifyArgs),
    /// Write lattice operator matrices and optionally check the eigenvector identity.
    Operator(OperatorArgs),
    /// Check the zero-curvature identity and propagate the wave vector.
    Lax(LaxArgs),
    /// Recover c, d from q, a, b.
    Reconstruct(ReconstructArgs),
    /// Write family moments and, optionally, moments of a boundary Jacobi matrix.
    Moments(MomentsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Verify(_) => "verify",
            Command::Operator(_) => "operator",
            Command::Lax(_) => "lax",
            Command::Reconstruct(_) => "reconstruct",
            Command::Moments(_) => "moments",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Generate(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Operator(a) => &a.common,
            Command::Lax(a) => &a.common,
            Command::Reconstruct(a) => &a.common,
            Command::Moments(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Determinant,
    Recurrence,
    Both,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// hermite, laguerre1, meixner1 or constant_toy.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    /// `{"family": "...", "params": {...}}`; explicit flags override it.
    #[arg(long, value_name = "PATH")]
    pub params_json: Option<PathBuf>,
    /// Coefficient field file (JSON or `.csv`) used instead of a family.
    #[arg(long, value_name = "PATH")]
    pub field: Option<PathBuf>,
    /// Index window; defaults to (3, 3), or to the window of `--field`.
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    pub window: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    pub precision: PrecisionArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Artifact path.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Spectral sample points.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.0, 1.0, -1.0])]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_curvature: f64,
    /// Normality threshold on the normalized pivot; defaults per precision.
    #[arg(long)]
    pub tol_normality: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_eigencheck: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_path: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_degeneracy: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Route::Both)]
    pub route: Route,
    /// Moment file `{"mu1": [...], "mu2": [...]}` used instead of a family.
    #[arg(long, value_name = "PATH")]
    pub moments: Option<PathBuf>,
    /// Also write the coefficient field used by the recurrence route.
    #[arg(long, value_name = "PATH")]
    pub coeffs_out: Option<PathBuf>,
    /// Allowed relative difference between the two routes.
    #[arg(long, default_value_t = 1e-7)]
    pub tol_route: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OperatorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Operator kinds: h1, h2, delta, cross, deltas, j1, j2.
    #[arg(long, value_delimiter = ',', default_values_t = [OperatorKind::Delta])]
    pub kind: Vec<OperatorKind>,
    /// Sample points for the eigenvector check.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eigencheck: Option<Vec<f64>>,
    /// Largest relative asymmetry accepted for symmetric kinds.
    #[arg(long, default_value_t = 1e-14)]
    pub tol_symmetry: f64,
}

#[derive(Debug, Args)]
pub struct LaxArgs {
    #[command(flatten)]
    pub common: Common,
    /// row_major, column_major or both.
    #[arg(long, default_value = "both")]
    pub path: PathPolicy,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: Common,
    /// `{"q", "a", "b"}` grids, or a field file whose c, d are projected to q.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_consistency: f64,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Highest moment order; defaults to what the window needs.
    #[arg(long)]
    pub order: Option<usize>,
    /// Also compute moments from the boundary Jacobi matrix on this axis (1 or 2).
    #[arg(long)]
    pub axis: Option<Axis>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_moments: f64,
}
