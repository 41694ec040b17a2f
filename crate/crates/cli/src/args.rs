use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hardylab", version, about = "Composition operators on Hardy spaces, checked numerically")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Report file (stdout when absent).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a linear fractional self-map (universality verdict and λ-region).
    Classify(ClassifyArgs),
    /// Residual of C_{φ_a}(1−z)^s = a^s (1−z)^s.
    Eigencheck(EigencheckArgs),
    /// Eigen-relation over a polar λ-grid.
    SpectrumSample(SpectrumArgs),
    /// Scan a ∈ (0,1) for C_{φ_a} f ∥ f.
    Afscan(AfscanArgs),
    /// f along the orbit φ_{aⁿ}(w).
    Orbit(OrbitArgs),
    /// Real zeros of f against the orbit 1 − a^{m+1/2}.
    Zeros(ZerosArgs),
    /// Continue an eigenvector beyond the disk.
    Continue(ContinueArgs),
    /// Rank and conditioning of the Krylov basis of f.
    Krylov(KrylovArgs),
    /// Convergence of C^n(f_s g)/a^{ns} to g(1) f_s.
    Converge(ConvergeArgs),
    /// C_{φ_a} I_b against the rescaled I_{b/a}.
    InnerInvariance(InnerArgs),
    /// Distance from I_b to the cyclic subspace of C^{n0} I_b.
    NonminimalGap(GapArgs),
    /// Laplace transform on the half-line against closed forms.
    PaleyWiener(PaleyWienerArgs),
    /// Weights of the bilateral shift model.
    ShiftModel(ShiftModelArgs),
    /// Eigenvector of the shift model, or a spectral map over a λ-grid.
    ShiftEigen(ShiftEigenArgs),
    /// Finite-section kernel and surjectivity proxies.
    Caradus(CaradusArgs),
    /// Nevanlinna counting function at a point.
    Counting(CountingArgs),
    /// Both sides of the change-of-variables identity.
    CovCheck(CovArgs),
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false, id = "domain")]
pub struct DomainFlag {
    #[arg(long)]
    pub disk: bool,
    #[arg(long)]
    pub halfplane: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub domain: DomainFlag,
    /// Coefficients α,β,γ,δ of (αz+β)/(γz+δ).
    #[arg(long, allow_hyphen_values = true)]
    pub map: String,
}

#[derive(Debug, Args, Serialize)]
pub struct EigencheckArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: String,
    #[arg(long, default_value_t = 512)]
    pub order: usize,
    /// Residual tolerance (default 1e-8).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 20)]
    pub radii: usize,
    #[arg(long, default_value_t = 20)]
    pub angles: usize,
    #[arg(long, default_value_t = 0.05)]
    pub r_min: f64,
    /// Outer radius as a fraction of a^{-1/2}.
    #[arg(long, default_value_t = 0.95)]
    pub frac: f64,
    #[arg(long, default_value_t = 512)]
    pub order: usize,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct AfscanArgs {
    /// Function expression, e.g. example-h, power:0.5, exp*power:1.
    #[arg(long)]
    pub f: String,
    /// Parameter of a-dependent functions such as example-h.
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub grid: f64,
    #[arg(long, default_value_t = 512)]
    pub order: usize,
    /// Misalignment threshold (default 1e-9).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct OrbitArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub w: String,
    #[arg(long, default_value_t = 60)]
    pub n_max: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ZerosArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub u_min: f64,
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ContinueArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub a: f64,
    /// Eigenvalue; defaults to a^s when --s is given.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
}

#[derive(Debug, Args, Serialize)]
pub struct KrylovArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 512)]
    pub order: usize,
    /// Also report the distance from this function to the basis at each depth.
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeArgs {
    /// The factor g in f = f_s·g.
    #[arg(long, default_value = "exp")]
    pub g: String,
    #[arg(long, allow_hyphen_values = true)]
    pub s: String,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 30)]
    pub n_max: usize,
    #[arg(long, default_value_t = 40)]
    pub depth: usize,
    #[arg(long, default_value_t = 512)]
    pub order: usize,
    /// Bound on the last residual and the Krylov distance (default 1e-3).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct InnerArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 512)]
    pub order: usize,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct GapArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 1)]
    pub n0: usize,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 512)]
    pub order: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PaleyWienerArgs {
    /// exp:R for e^{-Rt} or texp:R for t e^{-Rt}.
    #[arg(long)]
    pub time_fn: String,
    /// Evaluation points w (Re w > 0), comma-separated.
    #[arg(long, allow_hyphen_values = true, default_value = "1,2+1i,0.5-3i")]
    pub w: String,
    /// Grid points per factor of 2 in t.
    #[arg(long, default_value_t = 32)]
    pub k: usize,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ShiftModelArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, default_value_t = 40)]
    pub window: usize,
    #[arg(long, default_value_t = 8)]
    pub cell_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ShiftEigenArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Single eigenvalue candidate.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "grid_radii")]
    pub lambda: Option<String>,
    #[arg(long, default_value_t = 40)]
    pub window: usize,
    #[arg(long, default_value_t = 8)]
    pub cell_points: usize,
    /// Polar λ-grid for a spectral map instead of a single λ.
    #[arg(long, requires = "grid_angles", conflicts_with = "lambda")]
    pub grid_radii: Option<usize>,
    #[arg(long, requires = "grid_radii")]
    pub grid_angles: Option<usize>,
    /// Outer radius of the grid (default 2 a^{-1/2}).
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CaradusArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    /// Section half-widths M.
    #[arg(long, default_value = "20,40,80")]
    pub windows: String,
    #[arg(long, default_value_t = 8)]
    pub cell_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CountingArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub map: String,
    #[arg(long, allow_hyphen_values = true)]
    pub w: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CovArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub map: String,
    /// Polynomial, as poly:c0,c1,...
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, default_value_t = 512)]
    pub radial: usize,
    #[arg(long, default_value_t = 512)]
    pub angular: usize,
    /// Relative defect tolerance (default 1e-4).
    #[arg(long)]
    pub tol: Option<f64>,
}
