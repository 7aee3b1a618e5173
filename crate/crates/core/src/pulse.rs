//! Compiling reflections into N-pod pulse parameters.
//!
//! A reflection vector v becomes the channel couplings χₙe^{iβₙ} = χ·vₙ.
//! Standard reflections run on resonance with rms area A = 2(2k+1)π for any
//! pulse shape. Generalized reflections use sech pulses (Rosen–Zener) with
//! A = 2πl and a constant detuning Δ₀ solving φ = 2 arg Π_{k<l}[Δ₀T + i(2k+1)].
//! Time is measured in units of the pulse width T.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::incoherent::IncoherentStep;
use crate::linalg::{arg_or_zero, basis, reduce_phase, CVector, C64};
use crate::navigation::{NavigationPlan, Step};
use crate::qhr::{PhaseGate, Reflection, ReflectionKind};
use crate::roots::brent;

/// Time dependence f(t) shared by all channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Envelope {
    /// sech(t/T)
    #[default]
    Sech,
    /// exp(−t²/T²), resonant compilation only.
    Gaussian,
}

impl Envelope {
    pub fn value(self, t: f64, width: f64) -> f64 {
        let x = t / width;
        match self {
            Envelope::Sech => 1.0 / x.cosh(),
            Envelope::Gaussian => (-x * x).exp(),
        }
    }

    /// ∫f(t)dt over the real line.
    pub fn integral(self, width: f64) -> f64 {
        match self {
            Envelope::Sech => PI * width,
            Envelope::Gaussian => PI.sqrt() * width,
        }
    }
}

/// Which area condition a pulse set satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaIndex {
    /// A = 2(2k+1)π on resonance.
    Resonant { k: u32 },
    /// A = 2πl with Rosen–Zener detuning.
    RosenZener { l: u32 },
    /// Two-level pulse of arbitrary area, used for incoherent pumping.
    Free,
}

/// Physical parameters for one set of simultaneous pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSet {
    /// Peak couplings χₙ ≥ 0, units 1/T.
    pub chi: Vec<f64>,
    /// Channel phases βₙ in (−π, π].
    pub beta: Vec<f64>,
    /// Pulse width T.
    pub width: f64,
    /// rms area A = χ∫f.
    pub area: f64,
    /// Constant detuning Δ₀, units 1/T.
    pub delta0: f64,
    pub shape: Envelope,
    pub index: AreaIndex,
}

impl PulseSet {
    /// Couplings for `v` scaled to rms area `area`.
    fn from_vector(v: &CVector, area: f64, width: f64, delta0: f64, shape: Envelope, index: AreaIndex) -> Self {
        let chi_total = area / shape.integral(width);
        Self {
            chi: v.iter().map(|c| c.norm() * chi_total).collect(),
            beta: v.iter().map(|c| reduce_phase(arg_or_zero(*c))).collect(),
            width,
            area,
            delta0,
            shape,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.chi.len()
    }

    /// χ = (Σχₙ²)^{1/2}
    pub fn chi_total(&self) -> f64 {
        self.chi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The reflection vector [χₙe^{iβₙ}]/χ realized by these couplings.
    pub fn vector(&self) -> CVector {
        let chi = self.chi_total();
        CVector::from_iterator(
            self.dim(),
            self.chi.iter().zip(&self.beta).map(|(c, b)| C64::from_polar(c / chi, *b)),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.chi.iter().all(|c| *c == 0.0)
    }

    /// Rabi frequencies Ωₙ(t) = χₙ f(t) e^{iβₙ}.
    pub fn envelope(&self, t: f64) -> Vec<C64> {
        let f = self.shape.value(t, self.width);
        self.chi.iter().zip(&self.beta).map(|(c, b)| C64::from_polar(c * f, *b)).collect()
    }

    /// Single-channel resonant pulse of area `area` on `level`.
    pub fn single_channel(dim: usize, level: usize, area: f64, width: f64) -> Self {
        Self::from_vector(&basis(dim, level), area, width, 0.0, Envelope::Sech, AreaIndex::Free)
    }
}

/// Rabi frequencies of `pulses` at time `t`.
pub fn envelope(pulses: &PulseSet, t: f64) -> Vec<C64> {
    pulses.envelope(t)
}

/// Standard reflection on resonance with A = 2(2k+1)π.
pub fn compile_standard_resonant(refl: &Reflection, k: u32, shape: Envelope) -> Result<PulseSet> {
    if !(refl.is_standard() || (refl.kind() == ReflectionKind::Generalized && refl.phi() == PI)) {
        return Err(Error::Validation(format!(
            "resonant compilation needs phi = pi, got {}; use compile_generalized",
            refl.phi()
        )));
    }
    let area = 2.0 * (2 * k + 1) as f64 * PI;
    Ok(PulseSet::from_vector(refl.vector(), area, 1.0, 0.0, shape, AreaIndex::Resonant { k }))
}

/// 2 arg Π_{k<l}[x + i(2k+1)] taken continuously: decreases monotonically
/// from 2πl at x → −∞ to 0 at x → +∞.
fn accumulated_phase(x: f64, l: u32) -> f64 {
    (0..l).map(|k| PI - 2.0 * (x / (2 * k + 1) as f64).atan()).sum()
}

fn check_index(l: u32) -> Result<()> {
    if l == 0 {
        return Err(Error::Validation("area index l must be at least 1".into()));
    }
    Ok(())
}

/// The branches φ + 2πm inside (0, 2πl), one per real detuning.
fn phase_branches(phi: f64, l: u32) -> Vec<f64> {
    let base = reduce_phase(phi);
    let top = 2.0 * PI * l as f64;
    (-1..=l as i64)
        .map(|m| base + 2.0 * PI * m as f64)
        .filter(|t| *t > 1e-14 && *t < top - 1e-14)
        .collect()
}

fn sort_roots(roots: &mut [f64]) {
    roots.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
}

/// All real Δ₀T solving the Rosen–Zener phase condition, by bracketing the
/// monotone accumulated phase. Sorted by |Δ₀T|, then by value.
pub fn solve_detuning_numeric(phi: f64, l: u32) -> Result<Vec<f64>> {
    check_index(l)?;
    let mut roots = Vec::with_capacity(l as usize);
    for target in phase_branches(phi, l) {
        let g = |x: f64| accumulated_phase(x, l) - target;
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while g(lo) < 0.0 {
            lo *= 2.0;
        }
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        roots.push(brent(g, lo, hi, 1e-15, 500)?);
    }
    if roots.is_empty() {
        return Err(Error::NoDetuning { phi, l });
    }
    sort_roots(&mut roots);
    Ok(roots)
}

/// Real detunings Δ₀T (units 1/T) producing phase `phi` with area 2πl.
/// Uses Δ₀T = cot(φ/2) for l = 1.
pub fn solve_detuning(phi: f64, l: u32) -> Result<Vec<f64>> {
    check_index(l)?;
    if l > 1 {
        return solve_detuning_numeric(phi, l);
    }
    let half = reduce_phase(phi) / 2.0;
    if half == 0.0 {
        return Err(Error::NoDetuning { phi, l });
    }
    if half == PI / 2.0 {
        return Ok(vec![0.0]);
    }
    Ok(vec![half.cos() / half.sin()])
}

/// Which of the l detuning roots to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootChoice {
    /// Smallest |Δ₀|.
    #[default]
    Smallest,
    /// Largest |Δ₀| (ties: the positive one).
    Largest,
    /// Position in the sorted root list.
    Index(usize),
}

impl RootChoice {
    fn pick(self, roots: &[f64]) -> Result<f64> {
        let i = match self {
            RootChoice::Smallest => 0,
            RootChoice::Largest => roots.len() - 1,
            RootChoice::Index(i) => i,
        };
        roots
            .get(i)
            .copied()
            .ok_or_else(|| Error::Validation(format!("root index {i} out of range ({} roots)", roots.len())))
    }
}

/// Sech pulses with A = 2πl and the chosen detuning root.
pub fn compile_generalized(refl: &Reflection, l: u32, root: RootChoice) -> Result<PulseSet> {
    check_index(l)?;
    if is_trivial(refl) {
        return Err(Error::NoDetuning { phi: refl.phi(), l });
    }
    let roots = solve_detuning(refl.phi(), l)?;
    let delta0 = root.pick(&roots)?;
    Ok(PulseSet::from_vector(
        refl.vector(),
        2.0 * PI * l as f64,
        1.0,
        delta0,
        Envelope::Sech,
        AreaIndex::RosenZener { l },
    ))
}

/// Compiler settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompileOptions {
    /// Rosen–Zener area index. `None` compiles standard reflections on
    /// resonance and generalized ones with l = 1.
    pub l: Option<u32>,
    /// Resonant area index.
    pub k: u32,
    pub root: RootChoice,
    pub shape: Envelope,
}

fn is_trivial(refl: &Reflection) -> bool {
    refl.is_identity() || (!refl.is_standard() && reduce_phase(refl.phi()).abs() < 1e-15)
}

/// Pulses for one reflection, or `None` if it is the identity.
pub fn compile_reflection(refl: &Reflection, options: &CompileOptions) -> Result<Option<PulseSet>> {
    if is_trivial(refl) {
        return Ok(None);
    }
    let pulses = match (refl.is_standard() || refl.phi() == PI, options.l) {
        (true, None) => compile_standard_resonant(refl, options.k, options.shape)?,
        (_, l) => {
            if options.shape != Envelope::Sech {
                return Err(Error::Unsupported("off-resonant reflections are compiled for sech pulses only".into()));
            }
            compile_generalized(refl, l.unwrap_or(1), options.root)?
        }
    };
    Ok(Some(pulses))
}

/// A phase gate as single-channel generalized reflections M(eₙ; φₙ),
/// skipping zero phases.
pub fn compile_phase_gate(gate: &PhaseGate, options: &CompileOptions) -> Result<Vec<PulseSet>> {
    let n = gate.dim();
    gate.phases()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.abs() > 1e-12)
        .map(|(k, p)| {
            let refl = Reflection::generalized(basis(n, k), *p)?;
            let opts = CompileOptions { l: Some(options.l.unwrap_or(1)), shape: Envelope::Sech, ..*options };
            Ok(compile_reflection(&refl, &opts)?.expect("nonzero phase"))
        })
        .collect()
}

/// Physical realization of one plan step.
#[derive(Debug, Clone, PartialEq)]
pub enum CompiledStep {
    /// Pulse sets applied one after another.
    Pulses(Vec<PulseSet>),
    /// The step acts trivially.
    NoPulse { reason: String },
    /// Incoherent steps pass through with their own parameters.
    Incoherent(IncoherentStep),
}

pub const NO_PULSE_REASON: &str = "identity reflection needs no pulse";

/// Compiles every step of `plan`, in application order.
pub fn compile_plan(plan: &NavigationPlan, options: &CompileOptions) -> Result<Vec<CompiledStep>> {
    plan.steps
        .iter()
        .map(|step| {
            Ok(match step {
                Step::Reflection(r) => match compile_reflection(r, options)? {
                    Some(p) => CompiledStep::Pulses(vec![p]),
                    None => CompiledStep::NoPulse { reason: NO_PULSE_REASON.into() },
                },
                Step::PhaseGate(g) => {
                    let pulses = compile_phase_gate(g, options)?;
                    if pulses.is_empty() {
                        CompiledStep::NoPulse { reason: "trivial phase gate needs no pulse".into() }
                    } else {
                        CompiledStep::Pulses(pulses)
                    }
                }
                Step::Incoherent(s) => CompiledStep::Incoherent(*s),
            })
        })
        .collect()
}
