//! Quantum Householder reflections: construction, action, and the unitary
//! and phase-gate types they compose into.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::linalg::{basis, frobenius, reduce_phase, unitarity_defect, CMatrix, CVector, C64, ONE};
use crate::state::{DensityMatrix, QuantumState};

/// Maximum |‖v‖ − 1| accepted when building a reflection.
pub const VECTOR_NORM_TOL: f64 = 1e-9;
/// Frobenius tolerance on U†U − I.
pub const UNITARY_TOL: f64 = 1e-10;

/// Square matrix with U†U = I.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Validation(format!(
                "unitary must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("unitary has non-finite entries".into()));
        }
        let defect = unitarity_defect(&m);
        if defect > UNITARY_TOL {
            return Err(Error::Validation(format!("matrix is not unitary: ||U^dag U - I||_F = {defect:e}")));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub(crate) fn from_raw(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }
}

impl Mul for &UnitaryMatrix {
    type Output = UnitaryMatrix;

    fn mul(self, rhs: Self) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

impl fmt::Display for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::state::write_matrix(f, &self.0)
    }
}

/// diag(e^{iφ₁}, …, e^{iφ_N})
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGate {
    phases: Vec<f64>,
}

impl PhaseGate {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.len() < 2 {
            return Err(Error::Validation("phase gate needs at least 2 levels".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation("phase gate has non-finite phases".into()));
        }
        Ok(Self { phases: phases.into_iter().map(reduce_phase).collect() })
    }

    pub fn identity(n: usize) -> Self {
        Self { phases: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.phases.iter().all(|p| p.abs() <= tol)
    }

    pub fn matrix(&self) -> UnitaryMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (i, p) in self.phases.iter().enumerate() {
            m[(i, i)] = C64::from_polar(1.0, *p);
        }
        UnitaryMatrix(m)
    }
}

/// How a [`Reflection`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionKind {
    /// I − 2|v⟩⟨v|, phase fixed at π.
    Standard,
    /// I + (e^{iφ} − 1)|v⟩⟨v|.
    Generalized,
    /// Placeholder for a decomposition step that needed no reflection.
    Identity,
}

/// A quantum Householder reflection M(v; φ).
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    v: CVector,
    phi: f64,
    kind: ReflectionKind,
}

fn checked_unit_vector(v: CVector) -> Result<CVector> {
    if v.len() < 2 {
        return Err(Error::Validation("reflection vector needs at least 2 components".into()));
    }
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > VECTOR_NORM_TOL {
        return Err(Error::Validation(format!("reflection vector is not normalized: |v| = {norm}")));
    }
    Ok(v / C64::from(norm))
}

impl Reflection {
    /// Standard reflection I − 2|v⟩⟨v|. `v` must be normalized to within
    /// [`VECTOR_NORM_TOL`]; the stored vector is renormalized exactly.
    pub fn standard(v: CVector) -> Result<Self> {
        Ok(Self { v: checked_unit_vector(v)?, phi: PI, kind: ReflectionKind::Standard })
    }

    /// Generalized reflection I + (e^{iφ} − 1)|v⟩⟨v|, with φ reduced to (−π, π].
    pub fn generalized(v: CVector, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::Validation("reflection phase is not finite".into()));
        }
        Ok(Self { v: checked_unit_vector(v)?, phi: reduce_phase(phi), kind: ReflectionKind::Generalized })
    }

    /// Identity-marked step, stored as v = e_k with φ = 0.
    pub fn identity(dim: usize, k: usize) -> Self {
        Self { v: basis(dim, k), phi: 0.0, kind: ReflectionKind::Identity }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn vector(&self) -> &CVector {
        &self.v
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn kind(&self) -> ReflectionKind {
        self.kind
    }

    /// True for reflections tagged standard; φ is exactly π.
    pub fn is_standard(&self) -> bool {
        self.kind == ReflectionKind::Standard
    }

    pub fn is_identity(&self) -> bool {
        self.kind == ReflectionKind::Identity
    }

    fn factor(&self) -> C64 {
        match self.kind {
            ReflectionKind::Standard => C64::from(-2.0),
            ReflectionKind::Identity => C64::from(0.0),
            ReflectionKind::Generalized => C64::from_polar(1.0, self.phi) - ONE,
        }
    }

    pub fn matrix(&self) -> UnitaryMatrix {
        let n = self.dim();
        UnitaryMatrix(CMatrix::identity(n, n) + &self.v * self.v.adjoint() * self.factor())
    }

    /// M(v; φ)|x⟩ in O(N).
    pub fn apply(&self, x: &CVector) -> CVector {
        let proj = self.v.dotc(x);
        x + &self.v * (self.factor() * proj)
    }

    /// M(v; φ)⁻¹ = M(v; −φ).
    pub fn inverse(&self) -> Self {
        match self.kind {
            ReflectionKind::Generalized => Self { v: self.v.clone(), phi: reduce_phase(-self.phi), kind: self.kind },
            _ => self.clone(),
        }
    }
}

/// I − 2|v⟩⟨v|
pub fn make_standard_qhr(v: &CVector) -> Result<UnitaryMatrix> {
    Ok(Reflection::standard(v.clone())?.matrix())
}

/// I + (e^{iφ} − 1)|v⟩⟨v|
pub fn make_generalized_qhr(v: &CVector, phi: f64) -> Result<UnitaryMatrix> {
    Ok(Reflection::generalized(v.clone(), phi)?.matrix())
}

/// States a unitary can act on.
pub trait UnitaryAction: Sized {
    fn dim(&self) -> usize;
    fn transform(&self, u: &CMatrix) -> Self;
}

impl UnitaryAction for QuantumState {
    fn dim(&self) -> usize {
        QuantumState::dim(self)
    }

    fn transform(&self, u: &CMatrix) -> Self {
        QuantumState::from_raw(u * self.amplitudes())
    }
}

impl UnitaryAction for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn transform(&self, u: &CMatrix) -> Self {
        let m = u * self.entries() * u.adjoint();
        // restore exact Hermiticity lost to rounding
        DensityMatrix::from_raw((&m + m.adjoint()) * C64::from(0.5))
    }
}

/// U|Ψ⟩ for pure states, UρU† for mixed states.
pub fn apply_unitary<S: UnitaryAction>(u: &UnitaryMatrix, state: &S) -> Result<S> {
    if u.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), actual: state.dim() });
    }
    Ok(state.transform(u.matrix()))
}

/// Product of a sequence of reflections in matrix order (leftmost first).
pub fn product(reflections: &[Reflection], dim: usize) -> CMatrix {
    reflections.iter().fold(CMatrix::identity(dim, dim), |acc, r| acc * r.matrix().0)
}

/// Frobenius distance between two unitaries, exposed for reporting.
pub fn unitary_distance(a: &UnitaryMatrix, b: &UnitaryMatrix) -> f64 {
    frobenius(&(&a.0 - &b.0))
}
