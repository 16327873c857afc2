//! Independent 2x2 complex-matrix route used to cross-check the quaternion
//! implementation: a Taylor-series matrix exponential with scaling and
//! squaring, plain matrix products, and the trace overlap. Nothing here
//! shares arithmetic with the library's rotor path.
//!
//! Shared between test binaries that each use a different slice of it.
#![allow(dead_code)]

use num_complex::Complex64;

pub type M2 = [[Complex64; 2]; 2];

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity() -> M2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn matmul(a: &M2, b: &M2) -> M2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn add(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn scale(a: &M2, s: Complex64) -> M2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

fn max_abs(a: &M2) -> f64 {
    a.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `exp(h)` by scaling and squaring around a 24-term Taylor series.
pub fn expm(h: &M2) -> M2 {
    let mut squarings = 0u32;
    let mut norm = max_abs(h);
    while norm > 0.25 {
        norm /= 2.0;
        squarings += 1;
    }
    let hs = scale(h, Complex64::new(1.0 / f64::powi(2.0, squarings as i32), 0.0));
    let mut sum = identity();
    let mut term = identity();
    for k in 1..=24 {
        term = scale(&matmul(&term, &hs), Complex64::new(1.0 / k as f64, 0.0));
        sum = add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// The pulse generator `-i theta (I_x cos phi + I_y sin phi + f I_z)` with
/// `I_k = sigma_k / 2`, written out entry by entry.
pub fn pulse_generator(theta: f64, phi: f64, f: f64) -> M2 {
    let half = Complex64::new(0.0, -theta / 2.0);
    let lower = Complex64::from_polar(1.0, phi);
    [
        [half * Complex64::new(f, 0.0), half * lower.conj()],
        [half * lower, half * Complex64::new(-f, 0.0)],
    ]
}

/// Propagator of one pulse through the matrix-exponential route.
pub fn pulse_matrix(theta: f64, phi: f64, f: f64) -> M2 {
    expm(&pulse_generator(theta, phi, f))
}

pub fn dagger(a: &M2) -> M2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Global-phase-invariant overlap `|Tr(b^dag a)| / 2`.
pub fn trace_overlap(a: &M2, b: &M2) -> f64 {
    let p = matmul(&dagger(b), a);
    (p[0][0] + p[1][1]).norm() / 2.0
}

/// `1 - trace_overlap`, the matrix-side twin of the rotor distance.
pub fn matrix_distance(a: &M2, b: &M2) -> f64 {
    (1.0 - trace_overlap(a, b)).max(0.0)
}

/// Entrywise maximum difference, phase included.
pub fn entrywise_gap(a: &M2, b: &M2) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}
