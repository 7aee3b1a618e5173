//! Running a navigation plan, either through exact matrix maps or by
//! integrating the N-pod dynamics step by step.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::incoherent::{apply_incoherent, IncoherentStep};
use crate::linalg::{CMatrix, C64};
use crate::navigation::{NavigationPlan, Step};
use crate::pulse::{compile_plan, CompileOptions, CompiledStep, PulseSet};
use crate::qhr::apply_unitary;
use crate::sim::{embed, evolve_open, propagate_unitary, SimConfig, Trajectory};
use crate::state::DensityMatrix;

/// Fraction of the excited-state lifetime covered by a short pulse window.
pub const SHORT_PULSE_DURATION: f64 = 0.01;
/// Ancilla population at which free decay after a pulse is considered over.
pub const DECAY_RESIDUAL: f64 = 1e-12;
/// Driven-level population at which long depletion stops.
pub const DEPLETION_RESIDUAL: f64 = 1e-10;
const MAX_DEPLETION_CYCLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    /// Exact conjugations and incoherent maps.
    #[default]
    Analytic,
    /// Integrated pulses and master-equation segments.
    Dynamic,
}

/// Outcome of running a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub final_state: DensityMatrix,
    /// One trajectory per step in dynamic mode; a single trajectory sampled
    /// at step boundaries in analytic mode.
    pub trajectories: Vec<Trajectory>,
}

impl Execution {
    /// All step trajectories joined on one time axis.
    pub fn joined(&self) -> Trajectory {
        Trajectory::concatenate(self.trajectories.clone())
    }
}

/// Runs `plan` on `rho0`. In dynamic mode, `schedule` supplies the pulses
/// for each step; without it the plan is compiled with default options.
pub fn execute_plan(
    plan: &NavigationPlan,
    rho0: &DensityMatrix,
    mode: ExecutionMode,
    config: &SimConfig,
    schedule: Option<&[CompiledStep]>,
) -> Result<Execution> {
    if plan.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: plan.dim(), actual: rho0.dim() });
    }
    match mode {
        ExecutionMode::Analytic => execute_analytic(plan, rho0),
        ExecutionMode::Dynamic => {
            config.validate()?;
            let compiled;
            let schedule = match schedule {
                Some(s) => s,
                None => {
                    compiled = compile_plan(plan, &CompileOptions::default())?;
                    &compiled
                }
            };
            if schedule.len() != plan.steps.len() {
                return Err(Error::Validation(format!(
                    "schedule has {} entries for {} plan steps",
                    schedule.len(),
                    plan.steps.len()
                )));
            }
            execute_dynamic(plan, rho0, config, schedule)
        }
    }
}

fn execute_analytic(plan: &NavigationPlan, rho0: &DensityMatrix) -> Result<Execution> {
    let mut rho = rho0.clone();
    let mut states = vec![embed(rho.entries())];
    for step in &plan.steps {
        rho = match step {
            Step::Incoherent(s) => apply_incoherent(s, &rho)?,
            coherent => apply_unitary(&coherent.unitary().expect("coherent step"), &rho)?,
        };
        states.push(embed(rho.entries()));
    }
    let times = (0..states.len()).map(|i| i as f64).collect();
    let traj = Trajectory::new(times, states).with_mismatch(&plan.source, &plan.target);
    Ok(Execution { final_state: rho, trajectories: vec![traj] })
}

fn check_step(step: &Step, compiled: &CompiledStep, index: usize) -> Result<()> {
    let ok = matches!(
        (step, compiled),
        (Step::Reflection(_) | Step::PhaseGate(_), CompiledStep::Pulses(_) | CompiledStep::NoPulse { .. })
            | (Step::Incoherent(_), CompiledStep::Incoherent(_))
    );
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(format!("schedule entry {index} does not match plan step {step}")))
    }
}

fn execute_dynamic(
    plan: &NavigationPlan,
    rho0: &DensityMatrix,
    config: &SimConfig,
    schedule: &[CompiledStep],
) -> Result<Execution> {
    let n = rho0.dim();
    let mut rho = embed(rho0.entries());
    let mut trajectories = Vec::with_capacity(schedule.len());
    for (index, (step, compiled)) in plan.steps.iter().zip(schedule).enumerate() {
        check_step(step, compiled, index)?;
        let parts = match compiled {
            CompiledStep::Pulses(pulses) => {
                let mut parts = Vec::with_capacity(pulses.len());
                for p in pulses {
                    if p.dim() != n {
                        return Err(Error::DimensionMismatch { expected: n, actual: p.dim() });
                    }
                    let prop = propagate_unitary(p, config)?;
                    let traj = prop.trajectory(&rho)?;
                    rho = traj.final_state().cloned().expect("non-empty trajectory");
                    parts.push(traj);
                }
                parts
            }
            CompiledStep::NoPulse { .. } => vec![Trajectory::new(vec![0.0], vec![rho.clone()])],
            CompiledStep::Incoherent(s) => {
                let parts = run_incoherent(s, &rho, config)?;
                rho = parts.last().and_then(|t| t.final_state().cloned()).unwrap_or(rho);
                parts
            }
        };
        let population = rho[(n, n)].re;
        if population > config.ancilla_threshold {
            return Err(Error::AncillaLeakage { step: index, population, threshold: config.ancilla_threshold });
        }
        trajectories.push(Trajectory::concatenate(parts).with_mismatch(&plan.source, &plan.target));
    }
    let block = rho.view((0, 0), (n, n)).into_owned();
    let final_state = DensityMatrix::from_raw((&block + block.adjoint()) * C64::new(0.5, 0.0));
    Ok(Execution { final_state, trajectories })
}

fn require_decay(config: &SimConfig) -> Result<f64> {
    if config.gamma_decay > 0.0 {
        Ok(config.gamma_decay)
    } else {
        Err(Error::Validation("spontaneous-emission steps need gamma_decay > 0".into()))
    }
}

/// A short resonant pulse of `area` on `level`, then free decay until the
/// ancilla is empty.
fn pulse_and_decay(rho: &CMatrix, level: usize, area: f64, config: &SimConfig) -> Result<Vec<Trajectory>> {
    let gamma = require_decay(config)?;
    let n = rho.nrows() - 1;
    if level >= n {
        return Err(Error::Validation(format!("level {level} out of range for dimension {n}")));
    }
    let window = config.t_end - config.t_start;
    let width = SHORT_PULSE_DURATION / (gamma * window);
    let pulse = PulseSet::single_channel(n, level, area, width);
    let driven = evolve_open(
        Some(&pulse),
        rho,
        config.t_start * width,
        config.t_end * width,
        0.0,
        gamma,
        config,
    )?;
    let after = driven.final_state().cloned().expect("non-empty trajectory");
    let excited = after[(n, n)].re;
    let mut parts = vec![driven];
    if excited > DECAY_RESIDUAL {
        let duration = (excited / DECAY_RESIDUAL).ln() / gamma;
        parts.push(evolve_open(None, &after, 0.0, duration, 0.0, gamma, config)?);
    }
    Ok(parts)
}

fn run_incoherent(step: &IncoherentStep, rho: &CMatrix, config: &SimConfig) -> Result<Vec<Trajectory>> {
    match *step {
        IncoherentStep::Dephase { gamma, duration } => {
            let t = duration.resolve(gamma);
            Ok(vec![evolve_open(None, rho, 0.0, t, gamma, 0.0, config)?])
        }
        IncoherentStep::ShortPulseDecay { level, .. } => {
            let area = step.pulse_area().expect("short pulse has an area");
            pulse_and_decay(rho, level, area, config)
        }
        IncoherentStep::LongDepletion { level } => {
            let mut parts = Vec::new();
            let mut current = rho.clone();
            for _ in 0..MAX_DEPLETION_CYCLES {
                if level < current.nrows() - 1 && current[(level, level)].re < DEPLETION_RESIDUAL {
                    return Ok(parts);
                }
                let cycle = pulse_and_decay(&current, level, PI, config)?;
                current = cycle.last().and_then(|t| t.final_state().cloned()).expect("non-empty cycle");
                parts.extend(cycle);
            }
            Err(Error::Numeric(format!("level {level} not depleted after {MAX_DEPLETION_CYCLES} cycles")))
        }
    }
}
