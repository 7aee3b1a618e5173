//! Quantum Householder reflections for qunit state engineering.
//!
//! The crate builds reflections and their products, plans navigation
//! between pure and mixed qunit states, adds incoherent steps that change
//! the eigenvalues of a density matrix, compiles reflections into N-pod
//! pulse parameters and checks them by integrating the dynamics.

pub mod decompose;
pub mod error;
pub mod execute;
pub mod incoherent;
pub mod linalg;
pub mod navigation;
pub mod ode;
pub mod pulse;
pub mod qhr;
pub mod roots;
pub mod sim;
pub mod state;

pub use decompose::{decompose_generalized, decompose_standard, StandardDecomposition};
pub use error::{Error, Result};
pub use execute::{execute_plan, Execution, ExecutionMode};
pub use incoherent::{
    apply_dephasing_map, apply_incoherent, apply_long_depletion_map, apply_short_pulse_decay_map,
    plan_dephasing_route, plan_spontaneous_route, spontaneous_probabilities, DephaseDuration, IncoherentStep,
    RouteOptions,
};
pub use linalg::{CMatrix, CVector, C64};
pub use navigation::{
    mismatch, plan_mixed, plan_pure_generalized, plan_pure_standard, project_spectrum, NavigationPlan, Step,
    Variant, DEFAULT_INVARIANT_TOL,
};
pub use pulse::{
    compile_generalized, compile_phase_gate, compile_plan, compile_reflection, compile_standard_resonant,
    envelope, solve_detuning, CompileOptions, CompiledStep, Envelope, PulseSet, RootChoice,
};
pub use qhr::{
    apply_unitary, make_generalized_qhr, make_standard_qhr, PhaseGate, Reflection, ReflectionKind, UnitaryMatrix,
};
pub use sim::{build_hamiltonian, propagate_dissipative, propagate_unitary, Propagation, SimConfig, Trajectory};
pub use state::{spectrum, DensityMatrix, QuantumState, Spectrum};
