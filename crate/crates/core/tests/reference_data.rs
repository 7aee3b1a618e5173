mod common;

use std::f64::consts::PI;

use common::*;
use qhr_core::execute::{execute_plan, ExecutionMode};
use qhr_core::{
    compile_plan, compile_standard_resonant, plan_dephasing_route, plan_mixed, plan_pure_standard,
    plan_spontaneous_route, spectrum, CompileOptions, CompiledStep, DensityMatrix, Envelope, IncoherentStep,
    QuantumState, Reflection, RouteOptions, SimConfig, Step, Variant,
};

#[test]
fn reference_matrices_have_rounded_traces() {
    // printed entries sum to 1.001 on the diagonal; the fixtures renormalize
    let ri = reference_rho_i();
    let rf = reference_rho_f();
    for rho in [&ri, &rf] {
        assert!((rho.entries().trace().re - 1.0).abs() < 1e-15);
    }
    let si = spectrum(&ri).unwrap().eigenvalues;
    let sf = spectrum(&rf).unwrap().eigenvalues;
    for (x, y) in si.iter().zip([0.6, 0.3, 0.1]) {
        assert!((x - y).abs() < 2e-3, "{si:?}");
    }
    for (x, y) in si.iter().zip(&sf) {
        assert!((x - y).abs() < 2e-2);
    }
    assert!(plan_mixed(&ri, &rf, None, Variant::Generalized, 1e-9).is_err());
}

#[test]
fn resonant_couplings_for_final_reflection() {
    let (a, b) = two_to_three_pair();
    let plan = plan_pure_standard(&QuantumState::new(a).unwrap(), &QuantumState::new(b).unwrap(), 0, None).unwrap();
    let last = plan.reflections().last().unwrap().clone();
    let p = compile_standard_resonant(&last, 0, Envelope::Sech).unwrap();
    let chi = p.chi_total();
    for (x, y) in p.chi.iter().zip([0.460, 0.628, 0.628]) {
        assert!((x / chi - y).abs() < 1e-3);
    }
    // negative first component becomes phase π; the others keep π/3 and π/7
    for (x, y) in p.beta.iter().zip([PI, PI / 3.0, PI / 7.0]) {
        assert!(phase_gap(*x, y) < 1e-3, "{:?}", p.beta);
    }
    assert!((p.area - 2.0 * PI).abs() < 1e-15);
}

#[test]
fn dephasing_route_for_reference_target() {
    let target = reference_rho_f();
    let plan = plan_dephasing_route(0, &target, RouteOptions::default()).unwrap();
    // one reflection, dephasing, then two generalized reflections
    assert_eq!(plan.steps.len(), 4);
    let first = match &plan.steps[0] {
        Step::Reflection(r) => r.clone(),
        other => panic!("unexpected first step {other}"),
    };
    assert!(first.is_standard());
    let printed = cvec(&[c(-0.336, 0.0), c(0.816, 0.0), c(0.471, 0.0)]);
    assert!(printed_deviation(first.vector(), &printed) < 2e-3);
    assert!(matches!(plan.steps[1], Step::Incoherent(IncoherentStep::Dephase { .. })));
    let tail: Vec<&Reflection> = plan.reflections().skip(1).collect();
    assert_eq!(tail.len(), 2);

    let rho0 = DensityMatrix::from_pure(&QuantumState::basis(3, 0).unwrap());
    let out = execute_plan(&plan, &rho0, ExecutionMode::Analytic, &SimConfig::default(), None).unwrap();
    assert!(frob(out.final_state.entries(), target.entries()) < 1e-10);

    // tail detunings come from the phases of the two reflections
    let schedule = compile_plan(&plan, &CompileOptions::default()).unwrap();
    let detunings: Vec<f64> = schedule
        .iter()
        .skip(2)
        .map(|s| match s {
            CompiledStep::Pulses(p) => p[0].delta0,
            other => panic!("unexpected compiled step {other:?}"),
        })
        .collect();
    for (refl, delta) in tail.iter().zip(&detunings) {
        assert!((delta - 1.0 / (refl.phi() / 2.0).tan()).abs() < 1e-12);
    }
}

#[test]
fn spontaneous_route_for_reference_spectrum() {
    let target = DensityMatrix::diagonal(&[0.6, 0.3, 0.1]).unwrap();
    let plan = plan_spontaneous_route(0, &target, RouteOptions::default()).unwrap();
    let probs: Vec<f64> = plan
        .steps
        .iter()
        .filter_map(|s| match s {
            Step::Incoherent(IncoherentStep::ShortPulseDecay { probability, .. }) => Some(*probability),
            _ => None,
        })
        .collect();
    assert_eq!(probs.len(), 2);
    assert!((probs[0] - 0.4).abs() < 1e-12 && (probs[1] - 0.375).abs() < 1e-12);
    let rho0 = DensityMatrix::from_pure(&QuantumState::basis(3, 0).unwrap());
    let out = execute_plan(&plan, &rho0, ExecutionMode::Analytic, &SimConfig::default(), None).unwrap();
    assert!(frob(out.final_state.entries(), target.entries()) < 1e-12);
}

#[test]
fn phase_gate_factor_has_no_population_effect() {
    let (v3, phi3) = reference_generalized_factors().pop().unwrap();
    let m = Reflection::generalized(v3, phi3 * PI).unwrap().matrix().into_inner();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert_eq!(m[(i, j)].norm(), 0.0);
            }
        }
        assert!((m[(i, i)].norm() - 1.0).abs() < 1e-15);
    }
}
