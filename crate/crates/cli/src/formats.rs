//! On-disk formats. Complex numbers are `[re, im]` pairs, matrices are
//! row-major, and all floats keep full double precision.

use std::fmt;

use qhr_core::incoherent::IncoherentStep;
use qhr_core::pulse::{AreaIndex, CompileOptions, CompiledStep, Envelope, PulseSet, RootChoice};
use qhr_core::{
    CMatrix, CVector, DensityMatrix, DephaseDuration, NavigationPlan, PhaseGate, QuantumState, Reflection,
    ReflectionKind, Step, Trajectory, C64,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Inputs whose norm or trace is off by more than this are rejected rather
/// than rescaled.
pub const ROUNDING_SLACK: f64 = 1e-2;
const EXACT: f64 = 1e-9;

pub type Pair = [f64; 2];

fn pair(z: &C64) -> Pair {
    [z.re, z.im]
}

fn complex(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn warn(msg: String) {
    eprintln!("warning: {msg}");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    Mixed,
}

/// A pure state vector or a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: StateKind,
    pub dimension: usize,
    pub data: Vec<Pair>,
}

/// Parsed contents of a [`StateFile`].
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(QuantumState),
    Mixed(DensityMatrix),
}

impl LoadedState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            LoadedState::Pure(s) => s.projector(),
            LoadedState::Mixed(m) => m.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LoadedState::Pure(s) => s.dim(),
            LoadedState::Mixed(m) => m.dim(),
        }
    }
}

impl StateFile {
    pub fn from_pure(state: &QuantumState) -> Self {
        Self { kind: StateKind::Pure, dimension: state.dim(), data: state.amplitudes().iter().map(pair).collect() }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let n = rho.dim();
        let m = rho.entries();
        let data = (0..n).flat_map(|i| (0..n).map(move |j| pair(&m[(i, j)]))).collect();
        Self { kind: StateKind::Mixed, dimension: n, data }
    }

    /// Validates the entries. Rounded inputs (norm or trace off by at most
    /// [`ROUNDING_SLACK`]) are rescaled with a warning.
    pub fn load(&self, what: &str) -> Result<LoadedState, CliError> {
        let n = self.dimension;
        let bad = |msg: String| CliError::Parse(format!("{what}: {msg}"));
        if let Some((i, _)) = self.data.iter().enumerate().find(|(_, p)| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(bad(format!("entry {i} is not finite")));
        }
        match self.kind {
            StateKind::Pure => {
                if self.data.len() != n {
                    return Err(bad(format!("expected {n} amplitudes, found {}", self.data.len())));
                }
                let v = CVector::from_iterator(n, self.data.iter().map(complex));
                let norm = v.norm();
                if (norm - 1.0).abs() > EXACT && (norm - 1.0).abs() <= ROUNDING_SLACK {
                    warn(format!("{what}: rescaling state with norm {norm}"));
                    return QuantumState::normalized(v).map(LoadedState::Pure).map_err(|e| bad(e.to_string()));
                }
                QuantumState::new(v).map(LoadedState::Pure).map_err(|e| bad(e.to_string()))
            }
            StateKind::Mixed => {
                if self.data.len() != n * n {
                    return Err(bad(format!("expected {} entries for a {n}x{n} matrix, found {}", n * n, self.data.len())));
                }
                let m = CMatrix::from_row_iterator(n, n, self.data.iter().map(complex));
                let trace = m.trace().re;
                if (trace - 1.0).abs() > EXACT && (trace - 1.0).abs() <= ROUNDING_SLACK {
                    warn(format!("{what}: rescaling density matrix with trace {trace}"));
                    DensityMatrix::new(m.unscale(trace)).map(LoadedState::Mixed).map_err(|e| bad(e.to_string()))
                } else {
                    DensityMatrix::new(m).map(LoadedState::Mixed).map_err(|e| bad(e.to_string()))
                }
            }
        }
    }
}

/// One plan step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepRecord {
    Reflection {
        /// `standard`, `generalized` or `identity`
        kind: String,
        vector: Vec<Pair>,
        phi: f64,
    },
    PhaseGate {
        phases: Vec<f64>,
    },
    Dephase {
        gamma: f64,
        /// Duration in units of T; `null` dephases to completion.
        duration: Option<f64>,
    },
    ShortPulseDecay {
        level: usize,
        probability: f64,
    },
    LongDepletion {
        level: usize,
    },
}

impl StepRecord {
    pub fn from_step(step: &Step) -> Self {
        match step {
            Step::Reflection(r) => StepRecord::Reflection {
                kind: match r.kind() {
                    ReflectionKind::Standard => "standard",
                    ReflectionKind::Generalized => "generalized",
                    ReflectionKind::Identity => "identity",
                }
                .into(),
                vector: r.vector().iter().map(pair).collect(),
                phi: r.phi(),
            },
            Step::PhaseGate(g) => StepRecord::PhaseGate { phases: g.phases().to_vec() },
            Step::Incoherent(s) => Self::from_incoherent(s),
        }
    }

    pub fn from_incoherent(step: &IncoherentStep) -> Self {
        match *step {
            IncoherentStep::Dephase { gamma, duration } => StepRecord::Dephase {
                gamma,
                duration: match duration {
                    DephaseDuration::ToCompletion => None,
                    DephaseDuration::Fixed(t) => Some(t),
                },
            },
            IncoherentStep::ShortPulseDecay { level, probability } => {
                StepRecord::ShortPulseDecay { level, probability }
            }
            IncoherentStep::LongDepletion { level } => StepRecord::LongDepletion { level },
        }
    }

    pub fn to_step(&self, index: usize, dim: usize) -> Result<Step, CliError> {
        let bad = |msg: String| CliError::Parse(format!("step {index}: {msg}"));
        let check_level = |level: usize| {
            if level < dim {
                Ok(())
            } else {
                Err(bad(format!("level {level} out of range for dimension {dim}")))
            }
        };
        Ok(match self {
            StepRecord::Reflection { kind, vector, phi } => {
                if vector.len() != dim {
                    return Err(bad(format!("vector has {} components, expected {dim}", vector.len())));
                }
                let mut v = CVector::from_iterator(dim, vector.iter().map(complex));
                let norm = v.norm();
                if (norm - 1.0).abs() > EXACT && (norm - 1.0).abs() <= ROUNDING_SLACK {
                    warn(format!("step {index}: rescaling reflection vector with norm {norm}"));
                    v.unscale_mut(norm);
                }
                let r = match kind.as_str() {
                    "standard" => Reflection::standard(v),
                    "generalized" => Reflection::generalized(v, *phi),
                    "identity" => {
                        let k = v.iter().position(|z| (z.norm() - 1.0).abs() < EXACT).ok_or_else(|| {
                            bad("identity step must carry a basis vector".into())
                        })?;
                        Ok(Reflection::identity(dim, k))
                    }
                    other => return Err(bad(format!("unknown reflection kind `{other}`"))),
                };
                Step::Reflection(r.map_err(|e| bad(e.to_string()))?)
            }
            StepRecord::PhaseGate { phases } => {
                if phases.len() != dim {
                    return Err(bad(format!("{} phases for dimension {dim}", phases.len())));
                }
                Step::PhaseGate(PhaseGate::new(phases.clone()).map_err(|e| bad(e.to_string()))?)
            }
            StepRecord::Dephase { gamma, duration } => {
                let d = duration.map_or(DephaseDuration::ToCompletion, DephaseDuration::Fixed);
                Step::Incoherent(IncoherentStep::dephase(*gamma, d).map_err(|e| bad(e.to_string()))?)
            }
            StepRecord::ShortPulseDecay { level, probability } => {
                check_level(*level)?;
                Step::Incoherent(IncoherentStep::short_pulse_decay(*level, *probability).map_err(|e| bad(e.to_string()))?)
            }
            StepRecord::LongDepletion { level } => {
                check_level(*level)?;
                Step::Incoherent(IncoherentStep::LongDepletion { level: *level })
            }
        })
    }
}

/// A navigation plan with its declared endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub dimension: usize,
    pub tolerance: f64,
    pub source: StateFile,
    pub target: StateFile,
    /// In application order.
    pub steps: Vec<StepRecord>,
}

impl PlanFile {
    pub fn from_plan(plan: &NavigationPlan) -> Self {
        Self {
            dimension: plan.dim(),
            tolerance: plan.tolerance,
            source: StateFile::from_density(&plan.source),
            target: StateFile::from_density(&plan.target),
            steps: plan.steps.iter().map(StepRecord::from_step).collect(),
        }
    }

    pub fn to_plan(&self) -> Result<NavigationPlan, CliError> {
        let source = self.source.load("plan source")?.density();
        let target = self.target.load("plan target")?.density();
        for (what, d) in [("source", source.dim()), ("target", target.dim())] {
            if d != self.dimension {
                return Err(CliError::Parse(format!("plan {what} has dimension {d}, plan declares {}", self.dimension)));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(CliError::Parse(format!("plan tolerance must be positive, got {}", self.tolerance)));
        }
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| s.to_step(i, self.dimension))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NavigationPlan { steps, source, target, tolerance: self.tolerance })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeRecord {
    Sech,
    Gaussian,
}

impl From<Envelope> for ShapeRecord {
    fn from(e: Envelope) -> Self {
        match e {
            Envelope::Sech => ShapeRecord::Sech,
            Envelope::Gaussian => ShapeRecord::Gaussian,
        }
    }
}

impl From<ShapeRecord> for Envelope {
    fn from(s: ShapeRecord) -> Self {
        match s {
            ShapeRecord::Sech => Envelope::Sech,
            ShapeRecord::Gaussian => Envelope::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaRecord {
    /// A = 2(2k+1)π on resonance; `index` is k.
    Resonant,
    /// A = 2πl with a detuning root; `index` is l.
    RosenZener,
    /// Arbitrary area; `index` is 0.
    Free,
}

/// Parameters of one set of simultaneous pulses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub chi: Vec<f64>,
    pub beta: Vec<f64>,
    pub width: f64,
    pub area: f64,
    /// Δ₀ in units of 1/T.
    pub delta0: f64,
    pub shape: ShapeRecord,
    pub area_rule: AreaRecord,
    pub index: u32,
}

impl PulseRecord {
    pub fn from_pulses(p: &PulseSet) -> Self {
        let (area_rule, index) = match p.index {
            AreaIndex::Resonant { k } => (AreaRecord::Resonant, k),
            AreaIndex::RosenZener { l } => (AreaRecord::RosenZener, l),
            AreaIndex::Free => (AreaRecord::Free, 0),
        };
        Self {
            chi: p.chi.clone(),
            beta: p.beta.clone(),
            width: p.width,
            area: p.area,
            delta0: p.delta0,
            shape: p.shape.into(),
            area_rule,
            index,
        }
    }

    pub fn to_pulses(&self, dim: usize) -> Result<PulseSet, CliError> {
        if self.chi.len() != dim || self.beta.len() != dim {
            return Err(CliError::Parse(format!("pulse record has {} couplings, expected {dim}", self.chi.len())));
        }
        if self.chi.iter().any(|c| !(*c >= 0.0 && c.is_finite())) || !(self.width > 0.0) {
            return Err(CliError::Parse("pulse couplings must be non-negative and the width positive".into()));
        }
        Ok(PulseSet {
            chi: self.chi.clone(),
            beta: self.beta.clone(),
            width: self.width,
            area: self.area,
            delta0: self.delta0,
            shape: self.shape.into(),
            index: match self.area_rule {
                AreaRecord::Resonant => AreaIndex::Resonant { k: self.index },
                AreaRecord::RosenZener => AreaIndex::RosenZener { l: self.index },
                AreaRecord::Free => AreaIndex::Free,
            },
        })
    }
}

/// Realization of one plan step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PulseStepRecord {
    Pulses { step: usize, pulses: Vec<PulseRecord> },
    NoPulse { step: usize, reason: String },
    Incoherent { step: usize, operation: StepRecord },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootRecord {
    Smallest,
    Largest,
    Index(usize),
}

impl fmt::Display for RootRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootRecord::Smallest => write!(f, "smallest"),
            RootRecord::Largest => write!(f, "largest"),
            RootRecord::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Compiler settings used to produce a pulse file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionsRecord {
    pub l: Option<u32>,
    pub k: u32,
    pub root: RootRecord,
    pub shape: ShapeRecord,
}

impl From<&CompileOptions> for OptionsRecord {
    fn from(o: &CompileOptions) -> Self {
        Self {
            l: o.l,
            k: o.k,
            root: match o.root {
                RootChoice::Smallest => RootRecord::Smallest,
                RootChoice::Largest => RootRecord::Largest,
                RootChoice::Index(i) => RootRecord::Index(i),
            },
            shape: o.shape.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseFile {
    pub dimension: usize,
    pub options: OptionsRecord,
    pub steps: Vec<PulseStepRecord>,
}

impl PulseFile {
    pub fn from_schedule(dim: usize, options: &CompileOptions, schedule: &[CompiledStep]) -> Self {
        let steps = schedule
            .iter()
            .enumerate()
            .map(|(step, s)| match s {
                CompiledStep::Pulses(p) => {
                    PulseStepRecord::Pulses { step, pulses: p.iter().map(PulseRecord::from_pulses).collect() }
                }
                CompiledStep::NoPulse { reason } => PulseStepRecord::NoPulse { step, reason: reason.clone() },
                CompiledStep::Incoherent(op) => {
                    PulseStepRecord::Incoherent { step, operation: StepRecord::from_incoherent(op) }
                }
            })
            .collect();
        Self { dimension: dim, options: options.into(), steps }
    }

    pub fn to_schedule(&self) -> Result<Vec<CompiledStep>, CliError> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let step = match s {
                    PulseStepRecord::Pulses { step, .. }
                    | PulseStepRecord::NoPulse { step, .. }
                    | PulseStepRecord::Incoherent { step, .. } => *step,
                };
                if step != i {
                    return Err(CliError::Parse(format!("pulse record {i} is labelled step {step}")));
                }
                Ok(match s {
                    PulseStepRecord::Pulses { pulses, .. } => CompiledStep::Pulses(
                        pulses.iter().map(|p| p.to_pulses(self.dimension)).collect::<Result<_, _>>()?,
                    ),
                    PulseStepRecord::NoPulse { reason, .. } => CompiledStep::NoPulse { reason: reason.clone() },
                    PulseStepRecord::Incoherent { operation, .. } => match operation.to_step(i, self.dimension)? {
                        Step::Incoherent(op) => CompiledStep::Incoherent(op),
                        _ => return Err(CliError::Parse(format!("pulse record {i}: coherent step in incoherent slot"))),
                    },
                })
            })
            .collect()
    }
}

/// Column names of the trajectory table for N qunit levels.
pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((0..n).map(|k| format!("P{k}")));
    h.push("Pe".into());
    for j in 0..n {
        for k in (j + 1)..n {
            h.push(format!("re_rho{j}{k}"));
            h.push(format!("im_rho{j}{k}"));
        }
    }
    h.push("D".into());
    h
}

/// Rows of the trajectory table.
pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    let n = traj.qunit_dim();
    (0..traj.len())
        .map(|i| {
            let s = &traj.states[i];
            let mut row = vec![traj.times[i]];
            row.extend((0..=n).map(|k| s[(k, k)].re));
            for j in 0..n {
                for k in (j + 1)..n {
                    row.push(s[(j, k)].re);
                    row.push(s[(j, k)].im);
                }
            }
            row.push(traj.mismatch.get(i).copied().unwrap_or(f64::NAN));
            row
        })
        .collect()
}

pub fn write_trajectory<W: std::io::Write>(out: W, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(trajectory_header(traj.qunit_dim())).map_err(io)?;
    for row in trajectory_rows(traj) {
        w.write_record(row.iter().map(|x| x.to_string())).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Reads a trajectory table back as (header, rows).
pub fn read_trajectory<R: std::io::Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| CliError::Parse(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse(e.to_string()))?;
        let row = rec
            .iter()
            .map(|x| x.parse::<f64>().map_err(|e| CliError::Parse(format!("row {i}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
