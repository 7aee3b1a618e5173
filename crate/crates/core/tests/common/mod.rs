//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use qhr_core::{CMatrix, CVector, DensityMatrix, UnitaryMatrix, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// m·e^{iπa}
pub fn polar(m: f64, a: f64) -> C64 {
    C64::from_polar(m, PI * a)
}

pub fn cvec(xs: &[C64]) -> CVector {
    CVector::from_vec(xs.to_vec())
}

pub fn gaussian(rng: &mut StdRng) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_unit_vector(rng: &mut StdRng, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal moved into Q.
pub fn random_unitary(rng: &mut StdRng, n: usize) -> UnitaryMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = d / d.norm();
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    UnitaryMatrix::new(q).expect("QR factor is unitary")
}

/// Eigenvalues drawn uniformly from the simplex, sorted descending.
pub fn random_spectrum(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x.sort_by(|a, b| b.total_cmp(a));
    x
}

pub fn density_from(u: &UnitaryMatrix, eigenvalues: &[f64]) -> DensityMatrix {
    let n = eigenvalues.len();
    let d = CMatrix::from_diagonal(&CVector::from_iterator(n, eigenvalues.iter().map(|e| c(*e, 0.0))));
    let m = u.matrix() * d * u.matrix().adjoint();
    DensityMatrix::new((&m + m.adjoint()) * c(0.5, 0.0)).expect("valid density matrix")
}

pub fn random_density(rng: &mut StdRng, n: usize) -> DensityMatrix {
    let eigs = random_spectrum(rng, n);
    let u = random_unitary(rng, n);
    density_from(&u, &eigs)
}

pub fn frob(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest per-component deviation between a computed vector and a printed
/// one, compared in the printed representation (modulus, phase in units of
/// π) after removing the best global phase. Components with printed modulus
/// below 1e-3 are compared by modulus only.
pub fn printed_deviation(computed: &CVector, printed: &CVector) -> f64 {
    let overlap: C64 = printed.iter().zip(computed.iter()).map(|(p, x)| x.conj() * p).sum();
    let g = overlap / overlap.norm();
    let mut worst = 0.0f64;
    for (x, p) in computed.iter().zip(printed.iter()) {
        let x = x * g;
        worst = worst.max((x.norm() - p.norm()).abs());
        if p.norm() > 1e-3 {
            let mut dphi = (x.arg() - p.arg()) / PI;
            dphi -= 2.0 * (dphi / 2.0).round();
            worst = worst.max(dphi.abs());
        }
    }
    worst
}

/// Difference of two phases in units of π, folded into [0, 1].
pub fn phase_gap(a: f64, b: f64) -> f64 {
    let mut d = (a - b) / PI;
    d -= 2.0 * (d / 2.0).round();
    d.abs()
}

/// Two-level (Givens) elimination of a unitary to diagonal form; returns the
/// number of non-trivial two-level rotations used.
pub fn givens_operation_count(u: &UnitaryMatrix) -> usize {
    let mut m = u.matrix().clone();
    let n = m.nrows();
    let mut count = 0;
    for j in 0..n {
        for i in (j + 1)..n {
            let (a, b) = (m[(j, j)], m[(i, j)]);
            if b.norm() < 1e-14 {
                continue;
            }
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (cc, s) = (a / r, b / r);
            for k in 0..n {
                let (x, y) = (m[(j, k)], m[(i, k)]);
                m[(j, k)] = cc.conj() * x + s.conj() * y;
                m[(i, k)] = -s * x + cc * y;
            }
            count += 1;
        }
    }
    let off: f64 = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).filter(|(i, k)| i != k).map(|p| m[p].norm()).sum();
    assert!(off < 1e-9, "Givens elimination left off-diagonal weight {off}");
    count
}

/// Eigenvalues of a 3×3 Hermitian matrix from its characteristic cubic,
/// sorted descending.
pub fn cubic_eigenvalues(m: &CMatrix) -> [f64; 3] {
    let a = m[(0, 0)].re;
    let b = m[(1, 1)].re;
    let cc = m[(2, 2)].re;
    let (d, e, f) = (m[(0, 1)], m[(1, 2)], m[(0, 2)]);
    let p1 = d.norm_sqr() + e.norm_sqr() + f.norm_sqr();
    let q = (a + b + cc) / 3.0;
    let p2 = (a - q).powi(2) + (b - q).powi(2) + (cc - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let bm = (m - CMatrix::identity(3, 3) * c(q, 0.0)).unscale(p);
    let det = (bm[(0, 0)] * (bm[(1, 1)] * bm[(2, 2)] - bm[(1, 2)] * bm[(2, 1)])
        - bm[(0, 1)] * (bm[(1, 0)] * bm[(2, 2)] - bm[(1, 2)] * bm[(2, 0)])
        + bm[(0, 2)] * (bm[(1, 0)] * bm[(2, 1)] - bm[(1, 1)] * bm[(2, 0)]))
        .re;
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    [l1, 3.0 * q - l1 - l3, l3]
}

/// Composite trapezoid rule with Richardson refinement until two levels agree.
pub fn integrate_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut n = 64usize;
    let trap = |n: usize| {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|k| f(a + h * k as f64)).sum();
        h * (0.5 * (f(a) + f(b)) + inner)
    };
    let mut prev = trap(n);
    loop {
        n *= 2;
        let next = trap(n);
        let extrapolated = next + (next - prev) / 3.0;
        if (next - prev).abs() < tol || n > 1 << 22 {
            return extrapolated;
        }
        prev = next;
    }
}

// Reference qutrit density matrices (their printed traces are 1.001).
pub fn reference_rho_i() -> DensityMatrix {
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            c(0.490, 0.0),
            polar(0.115, -0.789),
            polar(0.158, 0.107),
            polar(0.115, 0.789),
            c(0.336, 0.0),
            polar(0.018, -0.675),
            polar(0.158, -0.107),
            polar(0.018, 0.675),
            c(0.175, 0.0),
        ],
    );
    DensityMatrix::normalized(m).expect("reference state")
}

pub fn reference_rho_f() -> DensityMatrix {
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            c(0.298, 0.0),
            polar(0.022, 0.689),
            polar(0.033, 0.319),
            polar(0.022, -0.689),
            c(0.180, 0.0),
            polar(0.177, 0.909),
            polar(0.033, -0.319),
            polar(0.177, -0.909),
            c(0.523, 0.0),
        ],
    );
    DensityMatrix::normalized(m).expect("reference state")
}

/// Printed standard factorization: vectors v₁, v₂ and phase-gate phases (units of π).
pub fn reference_standard_factors() -> (CVector, CVector, [f64; 3]) {
    (
        cvec(&[polar(0.612, 0.532), polar(0.091, 0.211), polar(0.785, 0.690)]),
        cvec(&[c(0.0, 0.0), polar(0.533, -0.181), polar(0.846, 0.859)]),
        [-0.468, 0.819, -0.350],
    )
}

/// Printed generalized factorization: (vector, phase in units of π), in product order.
pub fn reference_generalized_factors() -> Vec<(CVector, f64)> {
    vec![
        (cvec(&[polar(0.721, 0.659), polar(0.080, -0.209), polar(0.689, 0.270)]), -0.841),
        (cvec(&[c(0.0, 0.0), polar(0.813, 0.469), polar(0.582, -0.261)]), 0.969),
        (cvec(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]), -0.128),
    ]
}

/// (|1⟩ + |3⟩)/√2 and (|1⟩ + e^{iπ/3}|2⟩ + e^{iπ/7}|3⟩)/√3.
pub fn two_to_three_pair() -> (CVector, CVector) {
    let s2 = 1.0 / 2f64.sqrt();
    let s3 = 1.0 / 3f64.sqrt();
    (
        cvec(&[c(s2, 0.0), c(0.0, 0.0), c(s2, 0.0)]),
        cvec(&[c(s3, 0.0), C64::from_polar(s3, PI / 3.0), C64::from_polar(s3, PI / 7.0)]),
    )
}

/// Largest complex deviation |e^{iθ}xₖ − pₖ| after the best global phase θ.
pub fn aligned_deviation(computed: &CVector, printed: &CVector) -> f64 {
    let overlap: C64 = printed.iter().zip(computed.iter()).map(|(p, x)| x.conj() * p).sum();
    let g = if overlap.norm() == 0.0 { c(1.0, 0.0) } else { overlap / overlap.norm() };
    computed.iter().zip(printed.iter()).map(|(x, p)| (x * g - p).norm()).fold(0.0, f64::max)
}

/// Qutrit populations after a short pulse exciting `level` with probability
/// `p`, followed by decay with equal branching.
pub fn oracle_short_pulse(pops: [f64; 3], level: usize, p: f64) -> [f64; 3] {
    let moved = pops[level] * p;
    let mut out = pops;
    out[level] -= moved;
    for x in out.iter_mut() {
        *x += moved / 3.0;
    }
    out
}

/// Qutrit populations after pumping `level` until it is empty: each cycle
/// returns a third of the driven population, so the geometric series sends
/// half of it to each other level.
pub fn oracle_depletion(pops: [f64; 3], level: usize) -> [f64; 3] {
    let mut out = pops;
    let mut x = pops[level];
    out[level] = 0.0;
    while x > 1e-18 {
        for (k, o) in out.iter_mut().enumerate() {
            if k != level {
                *o += x / 3.0;
            }
        }
        x /= 3.0;
    }
    out
}

/// Rescales a printed (rounded) vector to unit norm.
pub fn unit(v: &CVector) -> CVector {
    v.unscale(v.norm())
}
