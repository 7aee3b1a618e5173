//! Time-domain simulation of the N-pod: N qunit levels coupled to one
//! ancilla |e⟩ (index N). Units ħ = 1, times in units of the pulse width T.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};
use crate::navigation::mismatch_raw;
use crate::ode::{integrate, OdeOptions};
use crate::pulse::PulseSet;
use crate::qhr::UnitaryMatrix;
use crate::state::DensityMatrix;

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Integration window, in units of the pulse width.
    pub t_start: f64,
    pub t_end: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Qunit dephasing rate (1/T).
    pub gamma_dephase: f64,
    /// Total ancilla radiative decay rate (1/T), split equally over the qunit levels.
    pub gamma_decay: f64,
    pub sample_count: usize,
    /// Largest ancilla population tolerated between plan steps.
    pub ancilla_threshold: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_start: -15.0,
            t_end: 15.0,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            gamma_dephase: 2.0,
            gamma_decay: 1.0,
            sample_count: 301,
            ancilla_threshold: 1e-6,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start < self.t_end) {
            return Err(Error::Validation(format!("bad time window [{}, {}]", self.t_start, self.t_end)));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        if !(self.gamma_dephase >= 0.0 && self.gamma_decay >= 0.0) {
            return Err(Error::Validation("rates must be non-negative".into()));
        }
        if self.sample_count < 2 {
            return Err(Error::Validation("need at least two samples".into()));
        }
        Ok(())
    }

    pub fn ode_options(&self) -> OdeOptions {
        OdeOptions { rel_tol: self.rel_tol, abs_tol: self.abs_tol, ..OdeOptions::default() }
    }

    pub(crate) fn grid(&self, t0: f64, t1: f64) -> Vec<f64> {
        let n = self.sample_count.max(2);
        let mut ts: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
        ts[n - 1] = t1;
        ts
    }
}

/// Sampled evolution of the (N+1)-level density matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    /// D(t) against the endpoints set by [`Trajectory::with_mismatch`].
    pub mismatch: Vec<f64>,
    pub ancilla_population: Vec<f64>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<CMatrix>) -> Self {
        let ancilla_population = states
            .iter()
            .map(|s| {
                let e = s.nrows() - 1;
                s[(e, e)].re
            })
            .collect();
        Self { times, states, mismatch: Vec::new(), ancilla_population }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of qunit levels N.
    pub fn qunit_dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.nrows() - 1)
    }

    /// Qunit block of sample `i`.
    pub fn qunit_block(&self, i: usize) -> CMatrix {
        let n = self.qunit_dim();
        self.states[i].view((0, 0), (n, n)).into_owned()
    }

    /// Populations of all N+1 levels at sample `i`.
    pub fn populations(&self, i: usize) -> Vec<f64> {
        self.states[i].diagonal().iter().map(|c| c.re).collect()
    }

    /// Fills `mismatch` with D(t) between `source` and `target`.
    pub fn with_mismatch(mut self, source: &DensityMatrix, target: &DensityMatrix) -> Self {
        self.mismatch = (0..self.len())
            .map(|i| mismatch_raw(&self.qunit_block(i), source.entries(), target.entries()))
            .collect();
        self
    }

    pub fn shifted(mut self, dt: f64) -> Self {
        self.times.iter_mut().for_each(|t| *t += dt);
        self
    }

    pub fn peak_ancilla(&self) -> f64 {
        self.ancilla_population.iter().cloned().fold(0.0, f64::max)
    }

    pub fn final_state(&self) -> Option<&CMatrix> {
        self.states.last()
    }

    /// Largest |tr ρ(t) − tr ρ(t₀)| along the trajectory.
    pub fn trace_drift(&self) -> f64 {
        let Some(first) = self.states.first() else { return 0.0 };
        let t0 = first.trace().re;
        self.states.iter().map(|s| (s.trace().re - t0).abs()).fold(0.0, f64::max)
    }

    /// Joins trajectories end to end, shifting each to start where the
    /// previous one finished.
    pub fn concatenate(parts: Vec<Trajectory>) -> Trajectory {
        let mut out = Trajectory::default();
        let mut offset = 0.0;
        for part in parts {
            let start = part.times.first().copied().unwrap_or(0.0);
            let shifted = part.shifted(offset - start);
            offset = shifted.times.last().copied().unwrap_or(offset);
            out.times.extend(shifted.times);
            out.states.extend(shifted.states);
            out.mismatch.extend(shifted.mismatch);
            out.ancilla_population.extend(shifted.ancilla_population);
        }
        out
    }
}

/// H(t) = ½[[0, Ω], [Ω†, 2Δ]] on the N qunit levels plus the ancilla.
pub fn build_hamiltonian(pulses: &PulseSet, t: f64) -> CMatrix {
    let n = pulses.dim();
    let mut h = CMatrix::zeros(n + 1, n + 1);
    for (k, w) in pulses.envelope(t).into_iter().enumerate() {
        h[(k, n)] = w * 0.5;
        h[(n, k)] = w.conj() * 0.5;
    }
    h[(n, n)] = C64::new(pulses.delta0, 0.0);
    h
}

/// Propagator samples U(t) for one pulse set.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub unitary: UnitaryMatrix,
    pub times: Vec<f64>,
    pub propagators: Vec<CMatrix>,
}

impl Propagation {
    /// Top-left N×N block of the final propagator.
    pub fn qunit_block(&self) -> CMatrix {
        let n = self.unitary.dim() - 1;
        self.unitary.matrix().view((0, 0), (n, n)).into_owned()
    }

    /// Largest final transition probability from a qunit level to the ancilla.
    pub fn ancilla_leakage(&self) -> f64 {
        let u = self.unitary.matrix();
        let e = u.nrows() - 1;
        (0..e).map(|k| u[(e, k)].norm_sqr()).fold(0.0, f64::max)
    }

    /// ρ(t) = U(t) ρ₀ U(t)† at every sample.
    pub fn trajectory(&self, rho0: &CMatrix) -> Result<Trajectory> {
        let d = self.unitary.dim();
        if rho0.nrows() != d || rho0.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: rho0.nrows() });
        }
        let states = self.propagators.iter().map(|u| u * rho0 * u.adjoint()).collect();
        Ok(Trajectory::new(self.times.clone(), states))
    }
}

/// Integrates i dU/dt = H(t) U over the configured window, scaled by the
/// pulse width.
pub fn propagate_unitary(pulses: &PulseSet, config: &SimConfig) -> Result<Propagation> {
    config.validate()?;
    let d = pulses.dim() + 1;
    let (t0, t1) = (config.t_start * pulses.width, config.t_end * pulses.width);
    let times = config.grid(t0, t1);
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let u = CMatrix::from_column_slice(d, d, y);
        let du = build_hamiltonian(pulses, t) * u * minus_i;
        dy.copy_from_slice(du.as_slice());
    };
    let id = CMatrix::identity(d, d);
    let ys = integrate(rhs, t0, id.as_slice(), &times, &config.ode_options())?;
    let propagators: Vec<CMatrix> = ys.iter().map(|y| CMatrix::from_column_slice(d, d, y)).collect();
    let unitary = UnitaryMatrix::from_raw(propagators.last().cloned().unwrap_or(id));
    Ok(Propagation { unitary, times, propagators })
}

/// dρ/dt = −i[H, ρ] + dephasing and radiative-decay dissipators, written
/// out entrywise. The dephasing operators are √Γ|n⟩⟨n| on the qunit levels;
/// the decay operators are √(γ/N)|n⟩⟨e|.
pub(crate) fn lindblad_rhs(h: &CMatrix, rho: &CMatrix, gamma_dephase: f64, gamma_decay: f64) -> CMatrix {
    let d = rho.nrows();
    let e = d - 1;
    let n = e as f64;
    let minus_i = C64::new(0.0, -1.0);
    let mut out = (h * rho - rho * h) * minus_i;
    let ree = rho[(e, e)];
    for j in 0..d {
        for k in 0..d {
            let r = rho[(j, k)];
            if j != k {
                let qunit_ends = (j < e) as u32 + (k < e) as u32;
                out[(j, k)] -= r * (0.5 * gamma_dephase * qunit_ends as f64);
                if j == e || k == e {
                    out[(j, k)] -= r * (0.5 * gamma_decay);
                }
            } else if j == e {
                out[(j, k)] -= r * gamma_decay;
            } else {
                out[(j, k)] += ree * (gamma_decay / n);
            }
        }
    }
    out
}

/// Master-equation integration from `t0` to `t1` (absolute times).
pub(crate) fn evolve_open(
    pulses: Option<&PulseSet>,
    rho0: &CMatrix,
    t0: f64,
    t1: f64,
    gamma_dephase: f64,
    gamma_decay: f64,
    config: &SimConfig,
) -> Result<Trajectory> {
    let d = rho0.nrows();
    if let Some(p) = pulses {
        if p.dim() + 1 != d {
            return Err(Error::DimensionMismatch { expected: p.dim() + 1, actual: d });
        }
    }
    let idle = CMatrix::zeros(d, d);
    let times = config.grid(t0, t1);
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let rho = CMatrix::from_column_slice(d, d, y);
        let h = match pulses {
            Some(p) => build_hamiltonian(p, t),
            None => idle.clone(),
        };
        dy.copy_from_slice(lindblad_rhs(&h, &rho, gamma_dephase, gamma_decay).as_slice());
    };
    let ys = integrate(rhs, t0, rho0.as_slice(), &times, &config.ode_options())?;
    let states = ys
        .iter()
        .map(|y| {
            let m = CMatrix::from_column_slice(d, d, y);
            (&m + m.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    Ok(Trajectory::new(times, states))
}

/// Dissipative evolution over the configured window (scaled by the pulse
/// width when a drive is present) with the configured rates.
pub fn propagate_dissipative(pulses: Option<&PulseSet>, rho0: &DensityMatrix, config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let width = pulses.map_or(1.0, |p| p.width);
    evolve_open(
        pulses,
        rho0.entries(),
        config.t_start * width,
        config.t_end * width,
        config.gamma_dephase,
        config.gamma_decay,
        config,
    )
}

/// Embeds an N-level ρ into N+1 levels with an empty ancilla.
pub fn embed(rho: &CMatrix) -> CMatrix {
    let n = rho.nrows();
    let mut out = CMatrix::from_element(n + 1, n + 1, ZERO);
    out.view_mut((0, 0), (n, n)).copy_from(rho);
    out
}
