use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qhr", version, about = "Qunit state navigation with Householder reflections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a navigation plan.
    #[command(subcommand)]
    Plan(PlanCommand),
    /// Turn a plan into pulse parameters.
    Compile(CompileArgs),
    /// Integrate the N-pod dynamics of a plan or a pulse file.
    Simulate(SimulateArgs),
    /// Execute a plan exactly and check it reaches its target.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Standard,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Dephasing,
    Spontaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sech,
    Gaussian,
}

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    /// Between two pure states.
    Pure {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Generalized)]
        method: Method,
        /// Intermediate basis state for the standard method (zero-based).
        #[arg(long, default_value_t = 0)]
        via: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Between two mixed states with equal eigenvalues.
    Mixed {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Generalized)]
        method: Method,
        /// Largest eigenvalue difference accepted.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prepare a mixed state from a basis state using incoherent steps.
    Synthesize {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = Route::Dephasing)]
        route: Route,
        /// Initial basis state (zero-based).
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, value_enum, default_value_t = Method::Generalized)]
        method: Method,
        #[arg(long, default_value_t = 2.0)]
        gamma_dephase: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CompileFlags {
    /// Rosen-Zener area index; omit to put standard reflections on resonance.
    #[arg(long)]
    pub l: Option<u32>,
    /// Resonant area index, A = 2(2k+1)π.
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Which detuning root: smallest, largest or a zero-based index.
    #[arg(long, default_value = "smallest")]
    pub root_index: String,
    #[arg(long, value_enum, default_value_t = Shape::Sech)]
    pub shape: Shape,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub flags: CompileFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Plan to run; its source is the default initial state.
    #[arg(long, required_unless_present = "pulses")]
    pub plan: Option<PathBuf>,
    /// Precompiled pulses. Without a plan, each pulse set is run with the
    /// configured dissipation and `--initial` is required.
    #[arg(long)]
    pub pulses: Option<PathBuf>,
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Reference target for the mismatch column when no plan is given.
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[command(flatten)]
    pub flags: CompileFlags,
    /// Integration window per pulse, in units of the pulse width.
    #[arg(long, num_args = 2, value_names = ["START", "END"], allow_negative_numbers = true)]
    pub tspan: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    /// Qunit dephasing rate for pulse-file runs (1/T).
    #[arg(long, default_value_t = 0.0)]
    pub gamma_dephase: f64,
    /// Ancilla decay rate (1/T).
    #[arg(long, default_value_t = 1.0)]
    pub gamma_decay: f64,
    /// Samples per integrated segment.
    #[arg(long, default_value_t = 301)]
    pub samples: usize,
    /// Trajectory CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Replaces the plan's declared source.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Replaces the plan's declared target.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Frobenius endpoint tolerance; defaults to the plan's own.
    #[arg(long)]
    pub tol: Option<f64>,
}
