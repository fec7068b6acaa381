//! Instrumented complex vector kernels. Each call charges its cost to a
//! [`FlopCounter`] using the convention documented in [`crate::complexity`].

use num_complex::Complex64;

use crate::complexity::{FlopCounter, ABS2, CADD, CMAC, REAL};

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64], flops: &mut FlopCounter) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    flops.add(CMAC * x.len() as u64);
}

/// `a^H b`.
#[inline]
pub fn dot_conj(a: &[Complex64], b: &[Complex64], flops: &mut FlopCounter) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (ai, bi) in a.iter().zip(b) {
        acc += ai.conj() * bi;
    }
    flops.add(CMAC * a.len() as u64);
    acc
}

/// `a^T b`, no conjugation.
#[inline]
pub fn dot(a: &[Complex64], b: &[Complex64], flops: &mut FlopCounter) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (ai, bi) in a.iter().zip(b) {
        acc += ai * bi;
    }
    flops.add(CMAC * a.len() as u64);
    acc
}

/// `||v||^2`.
#[inline]
pub fn norm_sqr(v: &[Complex64], flops: &mut FlopCounter) -> f64 {
    flops.add(norm_cost(v.len()));
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// `||a + b||^2` without materializing the sum.
#[inline]
pub fn norm_sqr_of_sum(a: &[Complex64], b: &[Complex64], flops: &mut FlopCounter) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    flops.add(CADD * a.len() as u64 + norm_cost(a.len()));
    a.iter().zip(b).map(|(x, y)| (x + y).norm_sqr()).sum()
}

/// `||y - q h||^2` for a scalar `q`.
#[inline]
pub fn norm_sqr_minus_scaled(
    y: &[Complex64],
    q: Complex64,
    h: &[Complex64],
    flops: &mut FlopCounter,
) -> f64 {
    debug_assert_eq!(y.len(), h.len());
    flops.add(CMAC * y.len() as u64 + norm_cost(y.len()));
    y.iter()
        .zip(h)
        .map(|(yi, hi)| (yi - q * hi).norm_sqr())
        .sum()
}

/// `a += b`.
#[inline]
pub fn add_assign(a: &mut [Complex64], b: &[Complex64], flops: &mut FlopCounter) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    flops.add(CADD * a.len() as u64);
}

fn norm_cost(n: usize) -> u64 {
    (ABS2 + REAL) * n as u64 - REAL.min(n as u64)
}
