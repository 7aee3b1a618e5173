//! Small dense complex linear-algebra helpers shared by every module.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Reduce an angle to the half-open interval (-π, π].
pub fn reduce_phase(phi: f64) -> f64 {
    let mut r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Argument of a complex number, with arg(0) := 0.
pub fn arg_or_zero(z: C64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        z.arg()
    }
}

/// ⟨a|b⟩ with the bra conjugated.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// |a⟩⟨b|
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a - b))
}

pub fn basis(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = ONE;
    v
}

/// Frobenius norm of U†U − I.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    frobenius(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Largest off-diagonal modulus.
pub fn off_diagonal_max(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

pub fn is_diagonal(m: &CMatrix, tol: f64) -> bool {
    off_diagonal_max(m) <= tol
}

/// Smallest distance between `a` and `e^{iθ} b` over all global phases θ.
pub fn distance_up_to_phase(a: &CVector, b: &CVector) -> f64 {
    let overlap = inner(b, a);
    let phase = if overlap.norm() == 0.0 {
        ONE
    } else {
        overlap / overlap.norm()
    };
    (a - b * phase).norm()
}

/// Same as [`distance_up_to_phase`] for matrices, Frobenius norm.
pub fn matrix_distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() == 0.0 {
        ONE
    } else {
        overlap / overlap.norm()
    };
    frobenius(&(a - b * phase))
}

/// Determinant via LU on a copy.
pub fn determinant(m: &CMatrix) -> C64 {
    m.clone().determinant()
}
