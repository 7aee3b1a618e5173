//! Adaptive Dormand–Prince 5(4) integrator for complex-valued systems.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-10, max_steps: 5_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn scaled_norm(v: &[C64], y: &[C64], opts: &OdeOptions) -> f64 {
    v.iter()
        .zip(y)
        .map(|(e, y)| e.norm() / (opts.abs_tol + opts.rel_tol * y.norm()))
        .fold(0.0, f64::max)
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[C64], f0: &[C64], span: f64, opts: &OdeOptions) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let d0 = scaled_norm(y0, y0, opts);
    let d1 = scaled_norm(f0, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, k)| y + k * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y0.len()];
    f(t0 + h0, &y1, &mut f1);
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| (a - b) / h0).collect();
    let d2 = scaled_norm(&diff, y0, opts);
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6 * span) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates dy/dt = f(t, y) from `t0`, returning y at each time in
/// `samples` (ascending, all ≥ `t0`). Steps are shortened to land exactly
/// on sample times.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[C64], samples: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(Error::Validation("integrator tolerances must be positive".into()));
    }
    if samples.windows(2).any(|w| w[1] < w[0]) || samples.first().is_some_and(|s| *s < t0) {
        return Err(Error::Validation("sample times must be ascending and not before the start".into()));
    }
    let n = y0.len();
    let mut out = Vec::with_capacity(samples.len());
    let Some(&t_end) = samples.last() else {
        return Ok(out);
    };
    let span = t_end - t0;
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    f(t, &y, &mut k[0]);
    let mut h = if span > 0.0 { initial_step(&mut f, t0, &y, &k[0], span, opts) } else { 0.0 };
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut err = vec![C64::new(0.0, 0.0); n];
    let mut steps = 0usize;

    for &ts in samples {
        while t < ts {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integrator { t, reason: format!("exceeded {} steps", opts.max_steps) });
            }
            let remaining = ts - t;
            let h_try = h.min(remaining);
            if h_try <= 1e-14 * t.abs().max(span) && h_try < remaining {
                return Err(Error::Integrator { t, reason: format!("step size underflow (h = {h_try:e})") });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        if A[s][j] != 0.0 {
                            acc += kj[i] * (h_try * A[s][j]);
                        }
                    }
                    stage[i] = acc;
                }
                f(t + C[s] * h_try, &stage, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }
            for i in 0..n {
                let mut e = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += kj[i] * E[j];
                    }
                }
                err[i] = e * h_try;
            }
            let scale: Vec<C64> = y.iter().zip(&y_new).map(|(a, b)| if a.norm() > b.norm() { *a } else { *b }).collect();
            let en = scaled_norm(&err, &scale, opts);
            if !en.is_finite() {
                return Err(Error::Integrator { t, reason: "non-finite error estimate".into() });
            }
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            if en <= 1.0 {
                t = if h_try == remaining { ts } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                // first-same-as-last: the final stage is f at the new point
                k.swap(0, 6);
                if h_try == h || factor < 1.0 {
                    h = h_try * factor;
                } else {
                    h = h.max(h_try * factor);
                }
            } else {
                h = h_try * factor.min(1.0);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
