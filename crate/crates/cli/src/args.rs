use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("'{s}' is not a positive number")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stokes",
    version,
    about = "Stokes multipliers and spectral determinants of y'' = (z^m + E) y, and ray-system checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Degree of the potential (at least 3).
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u32).range(3..))]
    pub m: u32,
    /// Relative tolerance of the ODE integrator.
    #[arg(long, global = true, env = "STOKES_REL_TOL", default_value_t = 1e-12, value_parser = positive)]
    pub rel_tol: f64,
    /// Residual floor for root certificates.
    #[arg(long, global = true, env = "STOKES_ROOT_FLOOR", default_value_t = 1e-9, value_parser = positive)]
    pub root_floor: f64,
    /// Tolerance, in radians, for checks that roots lie on rays.
    #[arg(long, global = true, env = "STOKES_ANGULAR_TOL", default_value_t = 1e-6, value_parser = positive)]
    pub angular_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "STOKES_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Seed for randomly sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Add wall-clock timing to the document.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate a spectral function at given energies or on a grid.
    Eval(EvalArgs),
    /// Locate zeros of a spectral function or eigenvalues of a boundary problem.
    Roots(RootsArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Ray-system checks.
    Rays(RaysArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// C, g, f, h, f-1 or W.
    #[arg(long = "fn")]
    pub function: String,
    /// First Wronskian index (with --fn W).
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i64>,
    /// Second Wronskian index (with --fn W).
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i64>,
    /// Energies as a+bi, comma separated or repeated.
    #[arg(long = "E", value_delimiter = ',', allow_hyphen_values = true)]
    pub energies: Vec<String>,
    /// Circle about 0: radius and number of points.
    #[arg(long, num_args = 2, value_names = ["RADIUS", "COUNT"], conflicts_with_all = ["energies", "segment"])]
    pub circle: Option<Vec<String>>,
    /// Segment: endpoints and number of points.
    #[arg(long, num_args = 3, value_names = ["FROM", "TO", "COUNT"], allow_hyphen_values = true, conflicts_with = "energies")]
    pub segment: Option<Vec<String>>,
}

#[derive(Debug, Args, Serialize)]
pub struct RootsArgs {
    /// C, g, f, h, f-1 or W.
    #[arg(long = "fn", conflicts_with = "eig", required_unless_present = "eig")]
    pub function: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i64>,
    /// Boundary problem (n, k): zeros of W_{n,k}.
    #[arg(long, num_args = 2, value_names = ["N", "K"], allow_hyphen_values = true)]
    pub eig: Option<Vec<i64>>,
    /// Disk: center (a+bi) and radius.
    #[arg(long, num_args = 2, value_names = ["CENTER", "RADIUS"], allow_hyphen_values = true, conflicts_with = "rect", required_unless_present = "rect")]
    pub disk: Option<Vec<String>>,
    /// Rectangle: re_min re_max im_min im_max.
    #[arg(long, num_args = 4, value_names = ["RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"], allow_hyphen_values = true)]
    pub rect: Option<Vec<f64>>,
    /// Refuse regions holding more zeros than this.
    #[arg(long, default_value_t = 1000)]
    pub max_roots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Thm2,
    Consistency,
    Oracles,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Radius of the disk searched by the thm2 suite.
    #[arg(long, default_value_t = 30.0, value_parser = positive)]
    pub radius: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RaysArgs {
    #[command(subcommand)]
    pub command: RaysCommand,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum RaysCommand {
    /// Admissibility of a labeled ray system.
    Check {
        /// Angles of the rays carrying zeros.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<String>,
        /// Angles of the rays carrying 1-points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<String>,
        /// Report every admissible partition, not just the first.
        #[arg(long)]
        collect_all: bool,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        angle_tol: f64,
    },
    /// Permitted forms of an entire function with zeros on one line and
    /// 1-points on another.
    ClassifyLines {
        #[arg(long, group = "shape")]
        parallel: bool,
        #[arg(long, group = "shape")]
        intersecting: bool,
        #[arg(long, group = "shape")]
        identical: bool,
        /// Point and direction of line 1, as POINT@ANGLE.
        #[arg(long, allow_hyphen_values = true, requires = "line2", conflicts_with = "shape")]
        line1: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "line1")]
        line2: Option<String>,
        /// Which line carries the zeros.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        zeros_on: u8,
    },
    /// Zeros on the positive ray, 1-points on the rays at +-alpha.
    ThreeRay {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
}
