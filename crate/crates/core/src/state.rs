//! Pure and mixed qunit states.

use std::fmt;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, CMatrix, CVector, C64};

/// Allowed deviation of Σ|cₙ|² (or tr ρ) from one.
pub const NORM_TOL: f64 = 1e-12;
/// Allowed deviation of ρ from ρ†.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// Normalized amplitude vector of an N-level system, N ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::Validation(format!(
                "a qunit needs at least 2 levels, got {}",
                amplitudes.len()
            )));
        }
        if let Some(i) = amplitudes.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Validation(format!("amplitude {i} is not finite")));
        }
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state is not normalized: sum |c_n|^2 = {norm2:.15}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm before validating.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes / C64::from(norm))
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// The computational basis state |k⟩ (zero-based).
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Validation(format!("basis index {k} out of range for N = {dim}")));
        }
        Self::new(crate::linalg::basis(dim, k))
    }

    pub(crate) fn from_raw(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_inner(self) -> CVector {
        self.amplitudes
    }

    /// Index `k` if the state equals e^{iθ}|k⟩ within `tol`.
    pub fn basis_index(&self, tol: f64) -> Option<usize> {
        let (k, c) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
        if 1.0 - c.norm() <= tol {
            Some(k)
        } else {
            None
        }
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_raw(&self.amplitudes * self.amplitudes.adjoint())
    }
}

/// Hermitian, unit-trace, positive-semidefinite N×N matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return Err(Error::Validation(format!(
                "density matrix must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::Validation(format!("a qunit needs at least 2 levels, got {n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let z = entries[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Validation(format!("entry ({i}, {j}) is not finite")));
                }
                let d = (z - entries[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL {
                    return Err(Error::Validation(format!(
                        "not Hermitian at entries ({i}, {j}) / ({j}, {i}): deviation {d:e}"
                    )));
                }
            }
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::Validation(format!("trace is {trace}, expected 1")));
        }
        let rho = Self { entries };
        let lowest = rho.eigenvalues_unsorted()?.into_iter().fold(f64::INFINITY, f64::min);
        if lowest < -PSD_TOL {
            return Err(Error::Validation(format!(
                "not positive semidefinite: smallest eigenvalue {lowest:e}"
            )));
        }
        Ok(rho)
    }

    /// Hermitizes and rescales to unit trace before validating. Meant for
    /// literature data printed to a few decimals.
    pub fn normalized(entries: CMatrix) -> Result<Self> {
        let herm = (&entries + entries.adjoint()) * C64::from(0.5);
        let trace = herm.trace().re;
        if trace <= 0.0 || !trace.is_finite() {
            return Err(Error::Validation(format!("cannot normalize matrix with trace {trace}")));
        }
        Self::new(herm / C64::from(trace))
    }

    pub fn from_pure(state: &QuantumState) -> Self {
        state.projector()
    }

    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let n = populations.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, p) in populations.iter().enumerate() {
            m[(i, i)] = C64::from(*p);
        }
        Self::new(m)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0 / n as f64; n])
    }

    pub(crate) fn from_raw(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_inner(self) -> CMatrix {
        self.entries
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        crate::linalg::is_diagonal(&self.entries, tol)
    }

    /// tr ρ²
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues sorted in descending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(spectrum(self)?.eigenvalues)
    }

    fn eigenvalues_unsorted(&self) -> Result<Vec<f64>> {
        let eig = hermitian_eigen(&self.entries)?;
        Ok(eig.eigenvalues.iter().copied().collect())
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_matrix(f, &self.entries)
    }
}

pub(crate) fn write_matrix(f: &mut fmt::Formatter<'_>, m: &CMatrix) -> fmt::Result {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:+.6}{:+.6}i", m[(i, j)].re, m[(i, j)].im))
            .collect();
        writeln!(f, "[{}]", row.join(", "))?;
    }
    Ok(())
}

/// Eigen-decomposition ρ = R diag(r) R†.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are gauge-fixed eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    /// R diag(r) R† for a replacement set of eigenvalues.
    pub fn reassemble(&self, eigenvalues: &[f64]) -> CMatrix {
        let n = self.eigenvectors.nrows();
        let mut d = CMatrix::zeros(n, n);
        for (i, r) in eigenvalues.iter().enumerate() {
            d[(i, i)] = C64::from(*r);
        }
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }
}

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

fn hermitian_eigen(m: &CMatrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        let mut echo = String::new();
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
            echo.push_str(&format!("[{}]", row.join(", ")));
        }
        Error::Numeric(format!("Hermitian eigensolver did not converge for {echo}"))
    })
}

/// Spectral decomposition with eigenvalues sorted descending (ties keep the
/// solver's order) and each eigenvector scaled so that its largest-magnitude
/// component is real and positive.
///
/// Within a degenerate cluster the eigenvectors are any orthonormal basis of
/// the eigenspace.
pub fn spectrum(rho: &DensityMatrix) -> Result<Spectrum> {
    let eig = hermitian_eigen(rho.entries())?;
    let n = rho.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let peak = v.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        // first component within rounding of the peak wins, for determinism
        let k = v.iter().position(|z| z.norm() >= peak * (1.0 - 1e-12)).unwrap_or(0);
        let phase = if v[k].norm() == 0.0 { C64::from(1.0) } else { v[k].conj() / v[k].norm() };
        for row in 0..n {
            vectors[(row, col)] = v[row] * phase;
        }
    }
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: vectors,
    })
}

/// ‖R†ρR − diag(r)‖_F, a consistency check on a decomposition.
pub fn diagonalization_residual(rho: &DensityMatrix, s: &Spectrum) -> f64 {
    let mut d = s.eigenvectors.adjoint() * rho.entries() * &s.eigenvectors;
    for (i, r) in s.eigenvalues.iter().enumerate() {
        d[(i, i)] -= C64::from(*r);
    }
    frobenius(&d)
}
