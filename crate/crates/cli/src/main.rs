//! `abflux`: finite-solenoid potentials, lattice operators and resolvent sweeps.
//!
//! Exit codes: 0 success, 1 numerical alarm or solver failure, 2 configuration
//! error, 3 guard violation.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use abflux::operator::{Barrier, Grid2D};
use abflux::potential::{HalfLength, QuadratureConfig, SolenoidSpec};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Alarm(String),
    Numerical(String),
    Guard(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Alarm(_) | CliError::Numerical(_) => 1,
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Alarm(m) => write!(f, "numerical alarm: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Guard(m) => write!(f, "guard violation: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "abflux", version, about = "Finite-solenoid potentials and Aharonov-Bohm resolvent experiments")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate vector potentials
    #[command(subcommand)]
    Potential(PotentialCommand),
    /// Run resolvent-distance sweeps
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Assemble and inspect lattice operators
    #[command(subcommand)]
    Operator(OperatorCommand),
}

/// Physical parameters: a config file, explicit flags, or both (flags win).
#[derive(Args, Clone, Debug)]
pub struct PhysicsArgs {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solenoid radius a
    #[arg(long)]
    radius: Option<f64>,
    /// Magnetic flux Φ
    #[arg(long)]
    flux: Option<f64>,
    /// Coupling q/c
    #[arg(long)]
    coupling: Option<f64>,
    /// Solenoid half-length L (number or "inf")
    #[arg(long = "L", value_name = "L")]
    half_length: Option<HalfLength>,
}

impl PhysicsArgs {
    pub fn load(&self) -> Result<Option<RunConfig>, CliError> {
        self.config.as_deref().map(RunConfig::load).transpose()
    }

    /// Solenoid from config and flags; a, Φ and q/c have no defaults.
    pub fn spec(&self, cfg: Option<&RunConfig>, default_length: HalfLength) -> Result<SolenoidSpec, CliError> {
        let sol = cfg.map(|c| &c.solenoid);
        let need = |flag: Option<f64>, file: Option<f64>, name: &str| {
            flag.or(file)
                .ok_or_else(|| CliError::Config(format!("{name} must be given by --{name} or the config file")))
        };
        let radius = need(self.radius, sol.map(|s| s.radius), "radius")?;
        let flux = need(self.flux, sol.map(|s| s.flux), "flux")?;
        let coupling = need(self.coupling, sol.map(|s| s.coupling), "coupling")?;
        let half_length = self
            .half_length
            .or(sol.and_then(|s| s.half_length))
            .unwrap_or(default_length);
        SolenoidSpec::new(radius, flux, half_length, coupling).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn quadrature(&self, cfg: Option<&RunConfig>) -> QuadratureConfig {
        cfg.and_then(|c| c.quadrature).unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    Quadrature,
    Elliptic,
    /// Off-plane double integral in spherical coordinates
    ThreeD,
    FarField,
    Infinite,
}

#[derive(Subcommand)]
enum PotentialCommand {
    /// Value at a single point
    Eval {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        point: commands::potential::PointArgs,
        #[arg(long, value_enum, default_value = "elliptic")]
        method: Method,
    },
    /// Values on a uniform radial grid, optionally at several polar angles
    Table {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long, default_value_t = 0.1)]
        min: f64,
        #[arg(long, default_value_t = 10.0)]
        max: f64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Polar angles θ (radians); switches the grid to spherical r
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        #[arg(long, value_enum, default_value = "elliptic")]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the decay exponent of A_φ − A_{L,φ}
    Rate {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 20.0, 40.0, 80.0, 160.0, 320.0])]
        lengths: Vec<f64>,
    },
    /// Quadrature, elliptic, far-field and infinite-solenoid values side by side
    Compare {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 2.0, 5.0, 10.0, 20.0])]
        rho: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Debug)]
pub struct ExperimentArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory for JSON and CSV reports
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Record wall-clock time in the reports (breaks byte-identical reruns)
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Barrier sweep n → ∞ at fixed L
    Impermeability(ExperimentArgs),
    /// Length sweep L → ∞ at fixed n
    Length(ExperimentArgs),
    /// All three limit paths and their commutativity residual
    Diagram(ExperimentArgs),
}

/// Grid and barrier selection shared by operator commands.
#[derive(Args, Clone, Debug)]
pub struct LatticeArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Half-width R of the box [−R, R]²
    #[arg(long)]
    extent: Option<f64>,
    /// Grid points per side N
    #[arg(long)]
    points: Option<usize>,
    /// Barrier height n, or "hard_wall"
    #[arg(long = "n", value_name = "n", default_value = "hard_wall", value_parser = parse_barrier)]
    barrier: Barrier,
}

fn parse_barrier(s: &str) -> Result<Barrier, String> {
    match s {
        "hard_wall" | "inf" => Ok(Barrier::HardWall),
        other => other
            .parse::<f64>()
            .map(Barrier::Finite)
            .map_err(|e| format!("barrier must be a number or hard_wall: {e}")),
    }
}

impl LatticeArgs {
    pub fn grid(&self, cfg: Option<&RunConfig>) -> Result<Grid2D, CliError> {
        let base = cfg.and_then(|c| c.grid).unwrap_or(Grid2D {
            extent: 6.0,
            points_per_side: 64,
        });
        Grid2D::new(
            self.extent.unwrap_or(base.extent),
            self.points.unwrap_or(base.points_per_side),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Subcommand)]
enum OperatorCommand {
    /// Write the sparse triplet file of one operator
    Assemble {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lowest eigenvalues (small grids only)
    Spectrum {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Allow operators above the dimension guard
        #[arg(long)]
        allow_large: bool,
    },
    /// Enclosed-flux and gauge-invariance diagnostics
    GaugeCheck {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Potential(cmd) => commands::potential::run(cmd),
        Command::Experiment(cmd) => commands::experiment::run(cmd),
        Command::Operator(cmd) => commands::operator::run(cmd),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abflux: {e}");
            ExitCode::from(e.code())
        }
    }
}
