//! Planning coherent transitions between pure states, and between mixed
//! states that share their eigenvalues.

use std::fmt;

use crate::decompose::{decompose_generalized, decompose_standard, generalized_between};
use crate::error::{Error, Result};
use crate::incoherent::IncoherentStep;
use crate::linalg::{arg_or_zero, basis, frobenius_distance, CMatrix, CVector, C64};
use crate::qhr::{PhaseGate, Reflection, ReflectionKind, UnitaryMatrix};
use crate::state::{spectrum, DensityMatrix, QuantumState};

/// Default tolerance τ for comparing the eigenvalues of two density matrices.
pub const DEFAULT_INVARIANT_TOL: f64 = 1e-9;
/// Endpoint tolerance declared by pure-state plans.
pub const PURE_PLAN_TOL: f64 = 1e-10;
/// Overlaps this close to one mean "same state".
const SAME_STATE_TOL: f64 = 1e-12;
/// Phases this close to zero make a generalized reflection the identity.
const TRIVIAL_PHASE_TOL: f64 = 1e-12;

/// Which reflection family a coherent plan is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// N − 1 standard reflections and a phase gate.
    Standard,
    /// N generalized reflections.
    #[default]
    Generalized,
}

/// One step of a navigation plan.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Reflection(Reflection),
    PhaseGate(PhaseGate),
    Incoherent(IncoherentStep),
}

impl Step {
    pub fn is_coherent(&self) -> bool {
        !matches!(self, Step::Incoherent(_))
    }

    /// Matrix of a coherent step.
    pub fn unitary(&self) -> Option<UnitaryMatrix> {
        match self {
            Step::Reflection(r) => Some(r.matrix()),
            Step::PhaseGate(g) => Some(g.matrix()),
            Step::Incoherent(_) => None,
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Reflection(r) => {
                let kind = match r.kind() {
                    ReflectionKind::Standard => "standard QHR",
                    ReflectionKind::Generalized => "generalized QHR",
                    ReflectionKind::Identity => "identity",
                };
                let comps: Vec<String> = r
                    .vector()
                    .iter()
                    .map(|c| format!("{:.3}e^({:+.3}pi i)", c.norm(), arg_or_zero(*c) / std::f64::consts::PI))
                    .collect();
                write!(f, "{kind} v = [{}], phi = {:.4}pi", comps.join(", "), r.phi() / std::f64::consts::PI)
            }
            Step::PhaseGate(g) => {
                let ph: Vec<String> =
                    g.phases().iter().map(|p| format!("{:+.4}pi", p / std::f64::consts::PI)).collect();
                write!(f, "phase gate [{}]", ph.join(", "))
            }
            Step::Incoherent(s) => write!(f, "{s}"),
        }
    }
}

/// Ordered list of steps, in the order they act on the state, plus the
/// endpoints the plan was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct NavigationPlan {
    pub steps: Vec<Step>,
    pub source: DensityMatrix,
    pub target: DensityMatrix,
    /// Frobenius endpoint error the plan promises under analytic execution.
    pub tolerance: f64,
}

impl NavigationPlan {
    pub fn empty(source: DensityMatrix, target: DensityMatrix, tolerance: f64) -> Self {
        Self { steps: Vec::new(), source, target, tolerance }
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn reflections(&self) -> impl Iterator<Item = &Reflection> {
        self.steps.iter().filter_map(|s| match s {
            Step::Reflection(r) => Some(r),
            _ => None,
        })
    }

    pub fn reflection_count(&self) -> usize {
        self.reflections().count()
    }

    pub fn phase_gate_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::PhaseGate(_))).count()
    }

    /// Product of all steps (last applied leftmost), if every step is coherent.
    pub fn unitary(&self) -> Option<UnitaryMatrix> {
        let n = self.dim();
        let mut u = CMatrix::identity(n, n);
        for s in &self.steps {
            u = s.unitary()?.into_inner() * u;
        }
        Some(UnitaryMatrix::from_raw(u))
    }
}

/// Unit vector |v_{αn}⟩ ∝ |Ψ⟩ − e^{i arg Ψₙ}|n⟩ whose standard reflection
/// swaps |Ψ⟩ and e^{i arg Ψₙ}|n⟩. Requires |Ψ⟩ ≠ |n⟩ up to phase.
fn basis_reflection_vector(psi: &CVector, n: usize) -> CVector {
    let phase = C64::from_polar(1.0, arg_or_zero(psi[n]));
    let diff = psi - basis(psi.len(), n) * phase;
    let norm = diff.norm();
    diff / C64::from(norm)
}

fn real_up_to_phase(psi: &CVector, tol: f64) -> bool {
    let lead = psi.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::from(1.0));
    let phase = if lead.norm() == 0.0 { C64::from(1.0) } else { lead.conj() / lead.norm() };
    psi.iter().all(|c| (c * phase).im.abs() <= tol)
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, actual: b });
    }
    Ok(())
}

/// Connects two pure states with standard reflections: U = M(v_f)·D·M(v_i),
/// routed through basis state `n` (zero-based).
///
/// When the source or target is a basis state, the two states are
/// orthogonal, or both amplitude vectors are real (up to a global phase),
/// a single reflection suffices and is emitted instead. States equal up to
/// global phase give an empty plan.
pub fn plan_pure_standard(
    psi_i: &QuantumState,
    psi_f: &QuantumState,
    n: usize,
    d: Option<&PhaseGate>,
) -> Result<NavigationPlan> {
    let dim = psi_i.dim();
    check_dims(dim, psi_f.dim())?;
    if n >= dim {
        return Err(Error::Validation(format!("intermediate basis index {n} out of range for N = {dim}")));
    }
    if let Some(g) = d {
        check_dims(dim, g.dim())?;
    }
    let mut plan = NavigationPlan::empty(psi_i.projector(), psi_f.projector(), PURE_PLAN_TOL);
    let (a, b) = (psi_i.amplitudes(), psi_f.amplitudes());
    let overlap = b.dotc(a);
    if overlap.norm() >= 1.0 - SAME_STATE_TOL {
        return Ok(plan);
    }

    let single = if let Some(m) = psi_i.basis_index(SAME_STATE_TOL) {
        Some(basis_reflection_vector(b, m))
    } else if let Some(m) = psi_f.basis_index(SAME_STATE_TOL) {
        Some(basis_reflection_vector(a, m))
    } else if overlap.norm() <= SAME_STATE_TOL {
        Some((b - a) / C64::from(2f64.sqrt()))
    } else if real_up_to_phase(a, SAME_STATE_TOL) && real_up_to_phase(b, SAME_STATE_TOL) {
        // align the target's global phase so that ⟨Ψ_f|Ψ_i⟩ is real
        let aligned = if overlap.im.abs() <= SAME_STATE_TOL { b.clone() } else { b * (overlap / overlap.norm()) };
        let diff = &aligned - a;
        let norm = diff.norm();
        Some(diff / C64::from(norm))
    } else {
        None
    };

    match single {
        Some(v) => plan.steps.push(Step::Reflection(Reflection::standard(v)?)),
        None => {
            plan.steps.push(Step::Reflection(Reflection::standard(basis_reflection_vector(a, n))?));
            if let Some(g) = d.filter(|g| !g.is_identity(0.0)) {
                plan.steps.push(Step::PhaseGate(g.clone()));
            }
            plan.steps.push(Step::Reflection(Reflection::standard(basis_reflection_vector(b, n))?));
        }
    }
    Ok(plan)
}

/// Connects two pure states with one generalized reflection that maps
/// |Ψ_i⟩ onto |Ψ_f⟩ exactly, global phase included.
pub fn plan_pure_generalized(psi_i: &QuantumState, psi_f: &QuantumState) -> Result<NavigationPlan> {
    check_dims(psi_i.dim(), psi_f.dim())?;
    let mut plan = NavigationPlan::empty(psi_i.projector(), psi_f.projector(), PURE_PLAN_TOL);
    let overlap = psi_f.amplitudes().dotc(psi_i.amplitudes());
    if (C64::from(1.0) - overlap).norm() <= SAME_STATE_TOL {
        return Ok(plan);
    }
    let r = generalized_between(psi_i.amplitudes(), psi_f.amplitudes())?;
    plan.steps.push(Step::Reflection(r));
    Ok(plan)
}

fn is_trivial(r: &Reflection) -> bool {
    match r.kind() {
        ReflectionKind::Identity => true,
        ReflectionKind::Generalized => r.phi().abs() <= TRIVIAL_PHASE_TOL,
        ReflectionKind::Standard => false,
    }
}

fn is_diagonal_step(s: &Step) -> bool {
    match s {
        Step::PhaseGate(_) => true,
        Step::Reflection(r) => {
            let peak = r.vector().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            (1.0 - peak).abs() <= 1e-14
        }
        Step::Incoherent(_) => false,
    }
}

/// Coherent steps, in application order, for U given as a matrix product.
pub fn steps_for_unitary(u: &UnitaryMatrix, variant: Variant) -> Result<Vec<Step>> {
    let mut steps = Vec::new();
    match variant {
        Variant::Standard => {
            let dec = decompose_standard(u)?;
            if !dec.phase_gate.is_identity(TRIVIAL_PHASE_TOL) {
                steps.push(Step::PhaseGate(dec.phase_gate));
            }
            steps.extend(dec.reflections.into_iter().rev().filter(|r| !is_trivial(r)).map(Step::Reflection));
        }
        Variant::Generalized => {
            let refl = decompose_generalized(u)?;
            steps.extend(refl.into_iter().rev().filter(|r| !is_trivial(r)).map(Step::Reflection));
        }
    }
    Ok(steps)
}

/// Connects two mixed states with equal eigenvalues through
/// U = R_f·D·R_i†, decomposed into reflections.
///
/// Eigenvalues are paired in descending order and must agree within `tol`.
/// If the source is diagonal, leading diagonal factors of the decomposition
/// commute with it and are dropped.
pub fn plan_mixed(
    rho_i: &DensityMatrix,
    rho_f: &DensityMatrix,
    d: Option<&PhaseGate>,
    variant: Variant,
    tol: f64,
) -> Result<NavigationPlan> {
    let dim = rho_i.dim();
    check_dims(dim, rho_f.dim())?;
    if let Some(g) = d {
        check_dims(dim, g.dim())?;
    }
    let si = spectrum(rho_i)?;
    let sf = spectrum(rho_f)?;
    let differing: Vec<(usize, f64, f64)> = si
        .eigenvalues
        .iter()
        .zip(&sf.eigenvalues)
        .enumerate()
        .filter(|(_, (a, b))| (*a - *b).abs() > tol)
        .map(|(k, (a, b))| (k, *a, *b))
        .collect();
    if !differing.is_empty() {
        return Err(Error::InvariantMismatch { tolerance: tol, differing });
    }

    let mut plan = NavigationPlan::empty(rho_i.clone(), rho_f.clone(), 10.0 * tol);
    if frobenius_distance(rho_i.entries(), rho_f.entries()) <= SAME_STATE_TOL && d.is_none() {
        return Ok(plan);
    }
    let dmat = d.map(|g| g.matrix().into_inner()).unwrap_or_else(|| CMatrix::identity(dim, dim));
    let u = UnitaryMatrix::from_raw(&sf.eigenvectors * dmat * si.eigenvectors.adjoint());
    let mut steps = steps_for_unitary(&u, variant)?;
    if rho_i.is_diagonal(SAME_STATE_TOL) {
        let lead = steps.iter().take_while(|s| is_diagonal_step(s)).count();
        steps.drain(..lead);
    }
    plan.steps = steps;
    Ok(plan)
}

/// Replaces the eigenvalues of `rho` (descending order) by `eigenvalues`,
/// keeping its eigenvectors.
pub fn project_spectrum(rho: &DensityMatrix, eigenvalues: &[f64]) -> Result<DensityMatrix> {
    check_dims(rho.dim(), eigenvalues.len())?;
    let s = spectrum(rho)?;
    DensityMatrix::normalized(s.reassemble(eigenvalues))
}

/// Normalized elementwise L1 distance Σ|ρ − ρ_f| / Σ|ρ_i − ρ_f|: one at the
/// source, zero at the target. Defined as zero when ρ_i = ρ_f.
pub fn mismatch(rho: &DensityMatrix, rho_i: &DensityMatrix, rho_f: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), rho_f.dim())?;
    check_dims(rho_i.dim(), rho_f.dim())?;
    Ok(mismatch_raw(rho.entries(), rho_i.entries(), rho_f.entries()))
}

pub(crate) fn mismatch_raw(rho: &CMatrix, rho_i: &CMatrix, rho_f: &CMatrix) -> f64 {
    let l1 = |a: &CMatrix, b: &CMatrix| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).sum::<f64>();
    let denom = l1(rho_i, rho_f);
    if denom == 0.0 {
        0.0
    } else {
        l1(rho, rho_f) / denom
    }
}
