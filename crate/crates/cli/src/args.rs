use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Susceptibility, coupling and field-kernel computations for linear
/// magneto-dielectric media.
///
/// All quantities are in the unit system chosen with `--units`: natural
/// units set ħ = ε₀ = c = 1, so frequencies are in rad per unit time and
/// times in the reciprocal unit. With `--units si` frequencies are in rad/s
/// and times in s.
#[derive(Debug, Parser)]
#[command(name = "maxdiq", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Directory for CSV/JSON artifacts (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Unit system: `natural` (ħ = ε₀ = c = 1) or `si` (CODATA 2018).
    #[arg(long, global = true, value_enum, default_value_t = Units::Natural)]
    pub units: Units,
    /// Explicit ħ [J·s in SI]; requires --eps0 and --c and overrides --units.
    #[arg(long, global = true, requires_all = ["eps0", "c"])]
    pub hbar: Option<f64>,
    /// Explicit ε₀ [F/m in SI].
    #[arg(long, global = true, requires_all = ["hbar", "c"])]
    pub eps0: Option<f64>,
    /// Explicit speed of light [m/s in SI].
    #[arg(long, global = true, requires_all = ["hbar", "eps0"])]
    pub c: Option<f64>,
    /// JSON object of flag values (keys are long flag names, `-` or `_`);
    /// entries override flags given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Natural,
    Si,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between χ and squared coupling tables (|f|² or |g|²).
    Transform(TransformArgs),
    /// Evaluate a kernel Z, zeta, eta or Q as a time series.
    Kernel(KernelArgs),
    /// Run a validation check; exits 2 when it fails.
    Validate(ValidateArgs),
    /// Run one of the worked media end to end against closed forms.
    Scenario(ScenarioArgs),
    /// Noise weights (ħε₀/π)·Im χ with the matching squared couplings.
    Noise(NoiseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Vacuum,
    Box,
    Step,
    Lorentz,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Electric,
    Magnetic,
}

/// Susceptibility model selection.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Susceptibility model.
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Which bath the model describes.
    #[arg(long, value_enum, default_value_t = RoleArg::Electric)]
    pub role: RoleArg,
    /// Box strength χ⁰ (dimensionless).
    #[arg(long)]
    pub chi0: Option<f64>,
    /// Box width Δ [time].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Step strength β [rad/time].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Lorentz resonance ω₀ [rad/time].
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Lorentz damping γ [rad/time].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Lorentz plasma frequency ωₚ [rad/time].
    #[arg(long)]
    pub omegap: Option<f64>,
    /// CSV with header `t,chi` [time, dimensionless] or
    /// `omega,re_chi,im_chi` [rad/time, dimensionless].
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Fail instead of returning zero outside a table's range.
    #[arg(long)]
    pub strict_range: bool,
    /// Compact magnetic model, e.g. `box:0.5:0.01`, `step:1`, `lorentz:1:0.2:0.5`
    /// (same units as the long flags); only used by kernel, validate and noise.
    #[arg(long)]
    pub magnetic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// χ model → squared coupling table.
    ToCoupling,
    /// Squared coupling table → χ(t).
    ToChi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingRoute {
    /// Sine transform of χ(t).
    Sine,
    /// Im χ(ω) through the chosen dispersion relation.
    ImChi,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Conversion direction.
    #[arg(long, value_enum, default_value_t = Direction::ToCoupling)]
    pub direction: Direction,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Frequency grid `lo:hi:n` [rad/time], evenly spaced.
    #[arg(long)]
    pub grid_omega: Option<String>,
    /// How |f|² is obtained from the model.
    #[arg(long, value_enum, default_value_t = CouplingRoute::Sine)]
    pub route: CouplingRoute,
    /// Dispersion ω(|k|): `linear` (ω = c|k|), `power:a:p` (ω = a|k|^p) or
    /// `poly:c1:c2:...` (ω = Σ cᵢ|k|^i).
    #[arg(long, default_value = "linear")]
    pub dispersion: String,
    /// Squared coupling table (`omega,f2` or `omega,g2`) for --direction to-chi.
    #[arg(long)]
    pub coupling_table: Option<PathBuf>,
    /// Time grid `lo:hi:n` [time] for --direction to-chi.
    #[arg(long)]
    pub grid_t: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    #[value(name = "Z", alias = "z")]
    Z,
    Zeta,
    Eta,
    #[value(name = "Q", alias = "q")]
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Auto,
    Residue,
    Contour,
}

#[derive(Debug, Clone, Args)]
pub struct KernelParams {
    /// Mode frequency ω_q [rad/time].
    #[arg(long, default_value_t = 1.0)]
    pub omega_q: f64,
    /// Bath frequency ω_k [rad/time].
    #[arg(long, default_value_t = 0.0)]
    pub omega_k: f64,
    /// Forward (`plus`) or backward (`minus`) kernel; the backward series
    /// at τ [time] is the kernel at −τ.
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Time grid `0:t_max:n` [time]; must start at 0.
    #[arg(long, default_value = "0:20:2001")]
    pub grid_t: String,
    /// Inversion route: residues for rational media, contour otherwise.
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    pub route: RouteArg,
    /// Coupling prefactor of zeta/eta: a number [coupling units] or `unit`;
    /// taken from the medium when absent.
    #[arg(long)]
    pub prefactor: Option<String>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Kernel kind; Z and Q are dimensionless, zeta and eta carry the
    /// coupling prefactor.
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub params: KernelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckName {
    Causality,
    Passivity,
    Kk,
    DispersionInvariance,
    OdeResidual,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Which check to run.
    #[arg(long, value_enum)]
    pub check: CheckName,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Frequency grid `lo:hi:n` [rad/time] for causality, passivity, kk and
    /// dispersion-invariance.
    #[arg(long, default_value = "0.1:5:50")]
    pub grid_omega: String,
    /// Second dispersion relation for dispersion-invariance (first is linear).
    #[arg(long, default_value = "power:1.3:1.7")]
    pub dispersion: String,
    /// Pass threshold; defaults: kk 1e-4, dispersion-invariance 1e-12,
    /// ode-residual 1e-5·ω_q² [dimensionless or rad²/time²].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// KK integration cutoff [rad/time]; 200× the top of the grid by default.
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[command(flatten)]
    pub kernel: KernelParams,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Worked medium: vacuum, box, step or lorentz.
    #[arg(long, required_unless_present = "spec")]
    pub name: Option<String>,
    /// Full scenario spec (JSON); flags below override its parameters.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Mode frequency ω_q [rad/time].
    #[arg(long)]
    pub omega_q: Option<f64>,
    /// Bath frequency ω_k [rad/time].
    #[arg(long)]
    pub omega_k: Option<f64>,
    /// Step strength β [rad/time].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Static electric susceptibility of the box medium (dimensionless).
    #[arg(long)]
    pub chi_e0: Option<f64>,
    /// Static magnetic susceptibility of the box medium (dimensionless).
    #[arg(long)]
    pub chi_m0: Option<f64>,
    /// Box width Δ [time].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Lorentz resonance ω₀ [rad/time].
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Lorentz damping γ [rad/time].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Lorentz plasma frequency ωₚ [rad/time].
    #[arg(long)]
    pub omegap: Option<f64>,
    /// End of the time grid [time].
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of time samples.
    #[arg(long)]
    pub points: Option<usize>,
    /// Also tabulate squared couplings on the frequency grid.
    #[arg(long)]
    pub couplings: bool,
    /// Also tabulate noise weights on the frequency grid.
    #[arg(long)]
    pub noise: bool,
    /// Absolute deviation bound [units of the kernel].
    #[arg(long)]
    pub abs_tolerance: Option<f64>,
    /// Relative deviation bound (dimensionless, against the reference sup norm).
    #[arg(long)]
    pub rel_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Frequency grid `lo:hi:n` [rad/time].
    #[arg(long, default_value = "0.1:5:50")]
    pub grid_omega: String,
    /// Electric squared coupling table (`omega,f2`) checked against the model.
    #[arg(long)]
    pub coupling_table: Option<PathBuf>,
    /// Dispersion attached to --coupling-table (see `transform --help`).
    #[arg(long, default_value = "linear")]
    pub dispersion: String,
}
