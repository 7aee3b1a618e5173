//! Engineering arbitrary mixed states from a single basis state, using
//! dephasing or spontaneous emission through the ancilla to set the
//! eigenvalues and reflections for the rest.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{basis, CMatrix, CVector, C64};
use crate::navigation::{plan_mixed, plan_pure_standard, NavigationPlan, Step, Variant, PURE_PLAN_TOL};
use crate::qhr::Reflection;
use crate::state::{spectrum, DensityMatrix, QuantumState};

/// Off-diagonal modulus above which a matrix counts as non-diagonal.
pub const DIAGONAL_TOL: f64 = 1e-12;
/// Fraction of the initial coherence left when a dephasing step
/// "to completion" is simulated.
pub const DEPHASING_RESIDUAL: f64 = 1e-10;

/// How long dephasing is switched on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DephaseDuration {
    /// Until the coherences have decayed to [`DEPHASING_RESIDUAL`].
    ToCompletion,
    /// Fixed duration in units of T.
    Fixed(f64),
}

impl DephaseDuration {
    pub fn resolve(self, gamma: f64) -> f64 {
        match self {
            DephaseDuration::ToCompletion => -DEPHASING_RESIDUAL.ln() / gamma,
            DephaseDuration::Fixed(t) => t,
        }
    }
}

/// A non-unitary step that changes the eigenvalues of ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncoherentStep {
    /// Pure dephasing of the qunit coherences at rate `gamma` (1/T).
    Dephase { gamma: f64, duration: DephaseDuration },
    /// Short resonant pulse exciting `level` to the ancilla with
    /// probability `probability`, followed by spontaneous decay.
    ShortPulseDecay { level: usize, probability: f64 },
    /// Long pulse pumping `level` until it is empty.
    LongDepletion { level: usize },
}

impl IncoherentStep {
    pub fn dephase(gamma: f64, duration: DephaseDuration) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Validation(format!("dephasing rate must be positive, got {gamma}")));
        }
        if let DephaseDuration::Fixed(t) = duration {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Validation(format!("dephasing duration must be non-negative, got {t}")));
            }
        }
        Ok(Self::Dephase { gamma, duration })
    }

    pub fn short_pulse_decay(level: usize, probability: f64) -> Result<Self> {
        check_probability(probability)?;
        Ok(Self::ShortPulseDecay { level, probability })
    }

    /// Resonant area A = 2 arcsin √p realizing the excitation probability,
    /// assuming two-level Rabi flopping p = sin²(A/2).
    pub fn pulse_area(&self) -> Option<f64> {
        match self {
            Self::ShortPulseDecay { probability, .. } => Some(2.0 * probability.sqrt().asin()),
            _ => None,
        }
    }
}

impl fmt::Display for IncoherentStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dephase { gamma, duration: DephaseDuration::ToCompletion } => {
                write!(f, "dephase at gamma = {gamma}/T to completion")
            }
            Self::Dephase { gamma, duration: DephaseDuration::Fixed(t) } => {
                write!(f, "dephase at gamma = {gamma}/T for {t} T")
            }
            Self::ShortPulseDecay { level, probability } => write!(
                f,
                "short pulse on level {level}: p = {probability:.6} (area {:.6}), then decay",
                self.pulse_area().unwrap_or(0.0)
            ),
            Self::LongDepletion { level } => write!(f, "long pulse depleting level {level}"),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Validation(format!("excitation probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_diagonal(rho: &DensityMatrix) -> Result<()> {
    if !rho.is_diagonal(DIAGONAL_TOL) {
        return Err(Error::Validation("incoherent pump map expects a diagonal density matrix".into()));
    }
    Ok(())
}

fn check_level(rho: &DensityMatrix, level: usize) -> Result<()> {
    if level >= rho.dim() {
        return Err(Error::Validation(format!("level {level} out of range for N = {}", rho.dim())));
    }
    Ok(())
}

fn diagonal(populations: &[f64]) -> DensityMatrix {
    let n = populations.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, p) in populations.iter().enumerate() {
        m[(i, i)] = C64::from(*p);
    }
    DensityMatrix::from_raw(m)
}

/// Complete dephasing: keeps the populations, zeroes every coherence.
pub fn apply_dephasing_map(rho: &DensityMatrix) -> DensityMatrix {
    diagonal(&rho.populations())
}

/// Dephasing for a finite time: coherences shrink by e^{−Γt}.
pub fn apply_partial_dephasing(rho: &DensityMatrix, gamma: f64, duration: f64) -> DensityMatrix {
    let damp = (-gamma * duration).exp();
    let mut m = rho.entries().clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                m[(i, j)] *= damp;
            }
        }
    }
    DensityMatrix::from_raw(m)
}

/// Excites a fraction `p` of `level` to the ancilla, which decays back to all
/// N levels with equal branching 1/N.
pub fn apply_short_pulse_decay_map(rho: &DensityMatrix, level: usize, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    check_diagonal(rho)?;
    check_level(rho, level)?;
    let mut pops = rho.populations();
    let n = pops.len() as f64;
    let excited = p * pops[level];
    pops[level] -= excited;
    for x in pops.iter_mut() {
        *x += excited / n;
    }
    Ok(diagonal(&pops))
}

/// Pumps `level` until empty; its population ends up shared equally among
/// the other N − 1 levels.
pub fn apply_long_depletion_map(rho: &DensityMatrix, level: usize) -> Result<DensityMatrix> {
    check_diagonal(rho)?;
    check_level(rho, level)?;
    let mut pops = rho.populations();
    let x = std::mem::take(&mut pops[level]);
    let share = x / (pops.len() - 1) as f64;
    for (k, p) in pops.iter_mut().enumerate() {
        if k != level {
            *p += share;
        }
    }
    Ok(diagonal(&pops))
}

/// Applies an incoherent step in its analytic (completed) form.
pub fn apply_incoherent(step: &IncoherentStep, rho: &DensityMatrix) -> Result<DensityMatrix> {
    match *step {
        IncoherentStep::Dephase { duration: DephaseDuration::ToCompletion, .. } => Ok(apply_dephasing_map(rho)),
        IncoherentStep::Dephase { gamma, duration: DephaseDuration::Fixed(t) } => {
            Ok(apply_partial_dephasing(rho, gamma, t))
        }
        IncoherentStep::ShortPulseDecay { level, probability } => apply_short_pulse_decay_map(rho, level, probability),
        IncoherentStep::LongDepletion { level } => apply_long_depletion_map(rho, level),
    }
}

/// Probabilities (p₁, p₂) of the two short pulses that, with a depletion of
/// the third level in between, turn |1⟩⟨1| into diag(r₁, r₂, r₃) for
/// r₁ ≥ r₂ ≥ r₃.
pub fn spontaneous_probabilities(r: [f64; 3]) -> (f64, f64) {
    let p1 = 2.0 * (r[1] - r[2]);
    let p2 = 3.0 * r[2] / (r[0] + 2.0 * r[2]);
    (p1.clamp(0.0, 1.0), p2.clamp(0.0, 1.0))
}

/// Options shared by the two synthesis routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteOptions {
    /// Dephasing rate recorded in the plan, units of 1/T.
    pub gamma_dephase: f64,
    /// Reflection family for the coherent tail.
    pub variant: Variant,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self { gamma_dephase: 2.0, variant: Variant::Generalized }
    }
}

fn sorted_spectrum(target: &DensityMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let s = spectrum(target)?;
    let mut r: Vec<f64> = s.eigenvalues.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = r.iter().sum();
    r.iter_mut().for_each(|x| *x /= total);
    Ok((r, s.eigenvectors))
}

fn coherent_tail(from: &DensityMatrix, target: &DensityMatrix, variant: Variant) -> Result<Vec<Step>> {
    Ok(plan_mixed(from, target, None, variant, crate::navigation::DEFAULT_INVARIANT_TOL)?.steps)
}

/// Three-step synthesis from |start⟩⟨start|: one reflection to the real
/// superposition Σ√rₙ|n⟩, complete dephasing, then reflections from
/// diag(r) to the target. Pure targets need only the first reflection.
pub fn plan_dephasing_route(start: usize, target: &DensityMatrix, options: RouteOptions) -> Result<NavigationPlan> {
    let dim = target.dim();
    let initial = QuantumState::basis(dim, start)?;
    let (r, vectors) = sorted_spectrum(target)?;

    if r[1] <= DIAGONAL_TOL {
        let top = QuantumState::normalized(vectors.column(0).into_owned())?;
        let mut plan = plan_pure_standard(&initial, &top, start, None)?;
        plan.target = target.clone();
        return Ok(plan);
    }

    let amplitudes = CVector::from_iterator(dim, r.iter().map(|x| C64::from(x.sqrt())));
    let superposition = QuantumState::normalized(amplitudes)?;
    let first = plan_pure_standard(&initial, &superposition, start, None)?;
    let mut steps = first.steps;
    steps.push(Step::Incoherent(IncoherentStep::dephase(options.gamma_dephase, DephaseDuration::ToCompletion)?));
    let populations: Vec<f64> = superposition.amplitudes().iter().map(|c| c.norm_sqr()).collect();
    steps.extend(coherent_tail(&diagonal(&populations), target, options.variant)?);

    Ok(NavigationPlan { steps, source: initial.projector(), target: target.clone(), tolerance: PURE_PLAN_TOL })
}

/// Two-stage qutrit synthesis from |start⟩⟨start| using ancilla decay with
/// equal branching: short pulse on level 0 (p₁), depletion of level 2,
/// short pulse on level 0 (p₂), then reflections from diag(r) to the target.
/// A swap reflection first moves |start⟩ to |0⟩ when needed.
pub fn plan_spontaneous_route(start: usize, target: &DensityMatrix, options: RouteOptions) -> Result<NavigationPlan> {
    let dim = target.dim();
    if dim != 3 {
        return Err(Error::Unsupported(format!(
            "the spontaneous-emission route is defined for qutrits only, got N = {dim}"
        )));
    }
    let initial = QuantumState::basis(dim, start)?;
    let (r, _) = sorted_spectrum(target)?;
    let (p1, p2) = spontaneous_probabilities([r[0], r[1], r[2]]);

    let mut steps = Vec::new();
    if start != 0 {
        let v = (basis(dim, 0) - basis(dim, start)) / C64::from(2f64.sqrt());
        steps.push(Step::Reflection(Reflection::standard(v)?));
    }
    steps.push(Step::Incoherent(IncoherentStep::short_pulse_decay(0, p1)?));
    steps.push(Step::Incoherent(IncoherentStep::LongDepletion { level: 2 }));
    steps.push(Step::Incoherent(IncoherentStep::short_pulse_decay(0, p2)?));

    let mut mixed = DensityMatrix::from_raw(basis(dim, 0) * basis(dim, 0).adjoint());
    for s in &steps {
        if let Step::Incoherent(step) = s {
            mixed = apply_incoherent(step, &mixed)?;
        }
    }
    steps.extend(coherent_tail(&mixed, target, options.variant)?);
    Ok(NavigationPlan { steps, source: initial.projector(), target: target.clone(), tolerance: PURE_PLAN_TOL })
}
