//! Factorization of a unitary into quantum Householder reflections, by
//! column-wise triangularization as in Householder QR.
//!
//! Standard variant: U = M(v₁)⋯M(v_{N−1})·Φ. At step n the working column is
//! reflected onto e^{iθ}eₙ with θ the argument of its diagonal entry; the
//! collected phases form the trailing phase gate Φ.
//!
//! Generalized variant: U = M(v₁;φ₁)⋯M(v_N;φ_N). Each step maps eₙ exactly
//! onto the working column, so no phase gate is left over and the last
//! factor is a pure phase on e_N.

use std::f64::consts::PI;

use crate::error::Result;
use crate::linalg::{arg_or_zero, basis, CMatrix, CVector, C64};
use crate::qhr::{PhaseGate, Reflection, UnitaryMatrix};

/// Columns closer than this to eₙ·e^{iθ} get no reflection.
pub const IDENTITY_COLUMN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StandardDecomposition {
    /// N − 1 reflections; some may be identity-marked.
    pub reflections: Vec<Reflection>,
    pub phase_gate: PhaseGate,
}

impl StandardDecomposition {
    /// M(v₁)⋯M(v_{N−1})·Φ
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.phase_gate.dim();
        crate::qhr::product(&self.reflections, n) * self.phase_gate.matrix().into_inner()
    }
}

fn reflect_rows_in_place(w: &mut CMatrix, r: &Reflection) {
    for j in 0..w.ncols() {
        let col: CVector = w.column(j).into_owned();
        w.set_column(j, &r.apply(&col));
    }
}

/// Working column `n` with the (numerically zero) entries above the diagonal cleared.
fn trailing_column(w: &CMatrix, n: usize) -> CVector {
    let mut x: CVector = w.column(n).into_owned();
    for k in 0..n {
        x[k] = C64::from(0.0);
    }
    x
}

pub fn decompose_standard(u: &UnitaryMatrix) -> Result<StandardDecomposition> {
    let dim = u.dim();
    let mut w = u.matrix().clone();
    let mut reflections = Vec::with_capacity(dim.saturating_sub(1));
    for n in 0..dim.saturating_sub(1) {
        let x = trailing_column(&w, n);
        let theta = arg_or_zero(x[n]);
        let target = basis(dim, n) * C64::from_polar(1.0, theta);
        let diff = &x - &target;
        let dist = diff.norm();
        if dist <= IDENTITY_COLUMN_TOL {
            reflections.push(Reflection::identity(dim, n));
            continue;
        }
        let r = Reflection::standard(diff / C64::from(dist))?;
        reflect_rows_in_place(&mut w, &r);
        reflections.push(r);
    }
    let phases = (0..dim).map(|k| arg_or_zero(w[(k, k)])).collect();
    Ok(StandardDecomposition { reflections, phase_gate: PhaseGate::new(phases)? })
}

/// The generalized reflection sending |from⟩ exactly onto |to⟩ (both unit
/// vectors, not equal): v ∝ |to⟩ − |from⟩, φ = π − 2 arg(1 − ⟨to|from⟩).
pub(crate) fn generalized_between(from: &CVector, to: &CVector) -> Result<Reflection> {
    let overlap = to.dotc(from);
    let diff = to - from;
    let norm = diff.norm();
    let phi = PI - 2.0 * (C64::from(1.0) - overlap).arg();
    Reflection::generalized(diff / C64::from(norm), phi)
}

pub fn decompose_generalized(u: &UnitaryMatrix) -> Result<Vec<Reflection>> {
    let dim = u.dim();
    let mut w = u.matrix().clone();
    let mut reflections = Vec::with_capacity(dim);
    for n in 0..dim {
        let x = trailing_column(&w, n);
        let theta = arg_or_zero(x[n]);
        let e_n = basis(dim, n);
        let near_basis = (&x - &e_n * C64::from_polar(1.0, theta)).norm() <= IDENTITY_COLUMN_TOL;
        let r = if n + 1 == dim || near_basis {
            Reflection::generalized(e_n, theta)?
        } else {
            generalized_between(&e_n, &x)?
        };
        reflect_rows_in_place(&mut w, &r.inverse());
        reflections.push(r);
    }
    Ok(reflections)
}
