use std::path::Path;

use qhr_core::pulse::{compile_plan, CompileOptions, CompiledStep, RootChoice};
use qhr_core::sim::embed;
use qhr_core::{
    execute_plan, plan_dephasing_route, plan_mixed, plan_pure_generalized, plan_pure_standard,
    plan_spontaneous_route, propagate_dissipative, DensityMatrix, ExecutionMode, NavigationPlan, RouteOptions,
    SimConfig, Step, Trajectory, Variant,
};

use crate::args::{Cli, Command, CompileArgs, CompileFlags, Method, PlanCommand, Route, Shape, SimulateArgs, VerifyArgs};
use crate::formats::{write_trajectory, LoadedState, PlanFile, PulseFile, StateFile};
use crate::{read_json, to_json, write_text, CliError, EXIT_OK};

/// Largest ‖U†U − I‖_F accepted for a coherent step by `verify`.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Plan(p) => cmd_plan(p),
        Command::Compile(c) => cmd_compile(c),
        Command::Simulate(s) => cmd_simulate(s),
        Command::Verify(v) => cmd_verify(v),
    }
}

/// Writes `content` to `out`, or to stdout when no path is given. The
/// summary goes to stdout in the first case and stderr in the second.
fn emit(out: Option<&Path>, content: &str, summary: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_text(path, content)?;
            print!("{summary}");
        }
        None => {
            print!("{content}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn load_state(path: &Path) -> Result<LoadedState, CliError> {
    read_json::<StateFile>(path)?.load(&path.display().to_string())
}

fn load_pure(path: &Path) -> Result<qhr_core::QuantumState, CliError> {
    match load_state(path)? {
        LoadedState::Pure(s) => Ok(s),
        LoadedState::Mixed(_) => Err(CliError::Parse(format!("{}: expected a pure state", path.display()))),
    }
}

pub fn load_plan(path: &Path) -> Result<NavigationPlan, CliError> {
    read_json::<PlanFile>(path)?.to_plan()
}

fn variant(m: Method) -> Variant {
    match m {
        Method::Standard => Variant::Standard,
        Method::Generalized => Variant::Generalized,
    }
}

fn plan_summary(plan: &NavigationPlan) -> String {
    let incoherent = plan.steps.iter().filter(|s| !s.is_coherent()).count();
    let mut s = format!(
        "plan: N = {}, {} steps ({} reflections, {} phase gates, {} incoherent), tolerance {:e}\n",
        plan.dim(),
        plan.steps.len(),
        plan.reflection_count(),
        plan.phase_gate_count(),
        incoherent,
        plan.tolerance
    );
    for (i, step) in plan.steps.iter().enumerate() {
        s.push_str(&format!("  [{i}] {step}\n"));
    }
    s
}

pub fn cmd_plan(cmd: &PlanCommand) -> Result<i32, CliError> {
    let (plan, out) = match cmd {
        PlanCommand::Pure { source, target, method, via, out } => {
            let (psi_i, psi_f) = (load_pure(source)?, load_pure(target)?);
            let plan = match method {
                Method::Standard => plan_pure_standard(&psi_i, &psi_f, *via, None)?,
                Method::Generalized => plan_pure_generalized(&psi_i, &psi_f)?,
            };
            (plan, out)
        }
        PlanCommand::Mixed { source, target, method, tol, out } => {
            if !(*tol > 0.0) {
                return Err(CliError::Parse(format!("--tol must be positive, got {tol}")));
            }
            let rho_i = load_state(source)?.density();
            let rho_f = load_state(target)?.density();
            (plan_mixed(&rho_i, &rho_f, None, variant(*method), *tol)?, out)
        }
        PlanCommand::Synthesize { target, route, start, method, gamma_dephase, out } => {
            let rho_f = load_state(target)?.density();
            let options = RouteOptions { gamma_dephase: *gamma_dephase, variant: variant(*method) };
            let plan = match route {
                Route::Dephasing => plan_dephasing_route(*start, &rho_f, options)?,
                Route::Spontaneous => plan_spontaneous_route(*start, &rho_f, options)?,
            };
            (plan, out)
        }
    };
    emit(out.as_deref(), &to_json(&PlanFile::from_plan(&plan)), &plan_summary(&plan))?;
    Ok(EXIT_OK)
}

pub fn compile_options(flags: &CompileFlags) -> Result<CompileOptions, CliError> {
    let root = match flags.root_index.as_str() {
        "smallest" => RootChoice::Smallest,
        "largest" => RootChoice::Largest,
        other => RootChoice::Index(other.parse().map_err(|_| {
            CliError::Parse(format!("--root-index must be smallest, largest or an index, got `{other}`"))
        })?),
    };
    if flags.l == Some(0) {
        return Err(CliError::Parse("--l must be at least 1".into()));
    }
    let shape = match flags.shape {
        Shape::Sech => qhr_core::Envelope::Sech,
        Shape::Gaussian => qhr_core::Envelope::Gaussian,
    };
    Ok(CompileOptions { l: flags.l, k: flags.k, root, shape })
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn schedule_summary(schedule: &[CompiledStep]) -> String {
    let mut s = format!("pulses: {} steps\n", schedule.len());
    for (i, step) in schedule.iter().enumerate() {
        match step {
            CompiledStep::Pulses(sets) => {
                for p in sets {
                    s.push_str(&format!(
                        "  [{i}] chi·T = {}  beta = {}  area = {:.6}  delta0·T = {:.6}\n",
                        fmt_list(&p.chi.iter().map(|c| c * p.width).collect::<Vec<_>>()),
                        fmt_list(&p.beta),
                        p.area,
                        p.delta0 * p.width
                    ));
                }
            }
            CompiledStep::NoPulse { reason } => s.push_str(&format!("  [{i}] no pulse: {reason}\n")),
            CompiledStep::Incoherent(op) => s.push_str(&format!("  [{i}] {}\n", Step::Incoherent(*op))),
        }
    }
    s
}

pub fn cmd_compile(args: &CompileArgs) -> Result<i32, CliError> {
    let plan = load_plan(&args.plan)?;
    let options = compile_options(&args.flags)?;
    let schedule = compile_plan(&plan, &options)?;
    let file = PulseFile::from_schedule(plan.dim(), &options, &schedule);
    emit(args.out.as_deref(), &to_json(&file), &schedule_summary(&schedule))?;
    Ok(EXIT_OK)
}

fn sim_config(args: &SimulateArgs) -> Result<SimConfig, CliError> {
    let mut config = SimConfig {
        abs_tol: args.atol,
        rel_tol: args.rtol,
        gamma_dephase: args.gamma_dephase,
        gamma_decay: args.gamma_decay,
        sample_count: args.samples,
        ..SimConfig::default()
    };
    if let Some(span) = &args.tspan {
        config.t_start = span[0];
        config.t_end = span[1];
    }
    config.validate()?;
    Ok(config)
}

fn simulate_plan(
    plan_path: &Path,
    args: &SimulateArgs,
    config: &SimConfig,
) -> Result<(Trajectory, DensityMatrix), CliError> {
    let plan = load_plan(plan_path)?;
    let rho0 = match &args.initial {
        Some(p) => load_state(p)?.density(),
        None => plan.source.clone(),
    };
    let schedule = match &args.pulses {
        Some(p) => read_json::<PulseFile>(p)?.to_schedule()?,
        None => compile_plan(&plan, &compile_options(&args.flags)?)?,
    };
    let run = execute_plan(&plan, &rho0, ExecutionMode::Dynamic, config, Some(&schedule))?;
    let mut traj = run.joined();
    if traj.is_empty() {
        traj = Trajectory::new(vec![0.0], vec![embed(rho0.entries())]).with_mismatch(&plan.source, &plan.target);
    }
    Ok((traj, run.final_state))
}

fn simulate_pulses(
    pulse_path: &Path,
    args: &SimulateArgs,
    config: &SimConfig,
) -> Result<(Trajectory, DensityMatrix), CliError> {
    let file: PulseFile = read_json(pulse_path)?;
    let schedule = file.to_schedule()?;
    let initial = args
        .initial
        .as_ref()
        .ok_or_else(|| CliError::Parse("--initial is required when simulating a pulse file without a plan".into()))?;
    let rho0 = load_state(initial)?.density();
    if rho0.dim() != file.dimension {
        return Err(CliError::Parse(format!(
            "initial state has dimension {}, pulse file {}",
            rho0.dim(),
            file.dimension
        )));
    }
    let n = rho0.dim();
    let mut rho = DensityMatrix::new(embed(rho0.entries()))?;
    let mut parts = Vec::new();
    for (i, step) in schedule.iter().enumerate() {
        match step {
            CompiledStep::Pulses(sets) => {
                for p in sets {
                    let traj = propagate_dissipative(Some(p), &rho, config)?;
                    let last = traj.final_state().cloned().expect("non-empty trajectory");
                    rho = DensityMatrix::new(last)?;
                    parts.push(traj);
                }
            }
            CompiledStep::NoPulse { .. } => {}
            CompiledStep::Incoherent(_) => {
                return Err(CliError::Parse(format!("pulse record {i} is incoherent; simulate it with --plan")));
            }
        }
    }
    let mut traj = Trajectory::concatenate(parts);
    if traj.is_empty() {
        traj = Trajectory::new(vec![0.0], vec![rho.entries().clone()]);
    }
    if let Some(t) = &args.target {
        traj = traj.with_mismatch(&rho0, &load_state(t)?.density());
    }
    let block = rho.entries().view((0, 0), (n, n)).into_owned();
    Ok((traj, DensityMatrix::normalized(block)?))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let config = sim_config(args)?;
    let (traj, _) = match (&args.plan, &args.pulses) {
        (Some(plan), _) => simulate_plan(plan, args, &config)?,
        (None, Some(pulses)) => simulate_pulses(pulses, args, &config)?,
        (None, None) => return Err(CliError::Parse("give --plan or --pulses".into())),
    };
    let mut csv = Vec::new();
    write_trajectory(&mut csv, &traj)?;
    let csv = String::from_utf8(csv).expect("csv output is ascii");

    let last = traj.len() - 1;
    let n = traj.qunit_dim();
    let pops = traj.populations(last);
    let excited = traj.states[last][(n, n)].re;
    let d = traj.mismatch.get(last).copied().unwrap_or(f64::NAN);
    let summary = format!(
        "samples: {}\nfinal populations: {}\nfinal ancilla: {excited:e}\nfinal D: {d:e}\npeak ancilla: {:e}\ntrace drift: {:e}\n",
        traj.len(),
        fmt_list(&pops),
        traj.peak_ancilla(),
        traj.trace_drift()
    );
    emit(args.out.as_deref(), &csv, &summary)?;
    Ok(EXIT_OK)
}

fn frobenius(a: &qhr_core::CMatrix, b: &qhr_core::CMatrix) -> f64 {
    (a - b).norm()
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let plan = load_plan(&args.plan)?;
    let source = match &args.source {
        Some(p) => load_state(p)?.density(),
        None => plan.source.clone(),
    };
    let target = match &args.target {
        Some(p) => load_state(p)?.density(),
        None => plan.target.clone(),
    };
    let tol = args.tol.unwrap_or(plan.tolerance);
    if !(tol > 0.0) {
        return Err(CliError::Parse(format!("--tol must be positive, got {tol}")));
    }
    if target.dim() != plan.dim() {
        return Err(CliError::Parse(format!("target has dimension {}, plan {}", target.dim(), plan.dim())));
    }
    let run = execute_plan(&plan, &source, ExecutionMode::Analytic, &SimConfig::default(), None)?;
    let error = frobenius(run.final_state.entries(), target.entries());

    let reached = run.final_state.eigenvalues()?;
    let wanted = target.eigenvalues()?;
    let spectrum_gap = reached.iter().zip(&wanted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut worst_unitarity = 0.0f64;
    let mut report = String::new();
    for (i, step) in plan.steps.iter().enumerate() {
        match step.unitary() {
            Some(u) => {
                let m = u.matrix();
                let n = m.nrows();
                let defect = (m.adjoint() * m - qhr_core::CMatrix::identity(n, n)).norm();
                worst_unitarity = worst_unitarity.max(defect);
                report.push_str(&format!("  [{i}] {step}  unitarity defect {defect:.3e}\n"));
            }
            None => report.push_str(&format!("  [{i}] {step}\n")),
        }
    }

    let ok = error <= tol && worst_unitarity <= UNITARITY_TOL;
    println!("steps: {}", plan.steps.len());
    print!("{report}");
    println!("endpoint error: {error:.6e} (tolerance {tol:e})");
    println!("reached eigenvalues: {}", fmt_list(&reached));
    println!("target eigenvalues: {}", fmt_list(&wanted));
    println!("spectrum gap: {spectrum_gap:.3e}");
    println!("worst unitarity defect: {worst_unitarity:.3e}");
    if ok {
        println!("verify: PASS");
        Ok(EXIT_OK)
    } else {
        Err(CliError::Verify(format!(
            "verify: FAIL (endpoint error {error:.3e} vs {tol:e}, unitarity defect {worst_unitarity:.3e})"
        )))
    }
}

