//! Linear MMSE equalization of the stacked `N_r x UM` channel followed by a
//! per-user largest-entry pattern decision.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::complexity::{FlopCounter, CMAC, REAL};
use crate::error::{MbmError, Result};
use crate::model::{MbmConfig, MbmSymbol};

use super::common::{argmax_magnitude, check_inputs, quantize_cost, Residual};
use super::DetectionOutcome;

pub fn mmse_detect(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    sigma2: f64,
) -> Result<DetectionOutcome> {
    mmse_detect_with(y, channels, config, sigma2, &mut FlopCounter::enabled())
}

/// `x = (H^H H + sigma^2 I)^-1 H^H y`, evaluated in the smaller of its two
/// equivalent forms; the `N_r x N_r` form `H^H (H H^H + sigma^2 I)^-1 y` is
/// used when `UM > N_r` and `sigma^2 > 0`.
pub fn mmse_detect_with(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    sigma2: f64,
    flops: &mut FlopCounter,
) -> Result<DetectionOutcome> {
    check_inputs(y, channels, config)?;
    let n_r = config.n_r();
    let maps = config.maps();
    let cols = config.users() * maps;
    let h = DMatrix::from_fn(n_r, cols, |i, c| channels.user(c / maps).entry(i, c % maps));
    let yv = DVector::from_column_slice(y);
    let reg = Complex64::new(sigma2, 0.0);

    let soft = if cols <= n_r {
        let hh = h.adjoint();
        let mut gram = &hh * &h;
        for i in 0..cols {
            gram[(i, i)] += reg;
        }
        charge_solve(flops, cols, n_r);
        let chol = gram.cholesky().ok_or(MbmError::SingularGram)?;
        chol.solve(&(&hh * &yv))
    } else {
        if sigma2 <= 0.0 {
            return Err(MbmError::SingularGram);
        }
        let mut outer = &h * h.adjoint();
        for i in 0..n_r {
            outer[(i, i)] += reg;
        }
        charge_solve(flops, n_r, cols);
        let chol = outer.cholesky().ok_or(MbmError::SingularGram)?;
        h.adjoint() * chol.solve(&yv)
    };
    if soft.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MbmError::SingularGram);
    }

    let constellation = config.constellation();
    let estimates: Vec<MbmSymbol> = soft
        .as_slice()
        .chunks_exact(maps)
        .map(|block| {
            let m = argmax_magnitude(block, flops);
            flops.add(quantize_cost(config));
            MbmSymbol::new(m, constellation.nearest_point(block[m]))
        })
        .collect();

    let s = channels.superpose(config, &estimates);
    let r: Vec<Complex64> = y.iter().zip(&s).map(|(a, b)| a - b).collect();
    let residual = Residual::new(&r, flops);
    Ok(DetectionOutcome {
        estimates,
        iterations_used: 1,
        residual_trace: vec![residual.norm_sqr],
        residual_norm_sqr: residual.norm_sqr,
        flops: flops.value(),
    })
}

/// Gram product of an `n x n` system over `inner` terms, Cholesky, two
/// triangular solves and the matched filter.
fn charge_solve(flops: &mut FlopCounter, n: usize, inner: usize) {
    let (n, inner) = (n as u64, inner as u64);
    let gram = CMAC * inner * n * (n + 1) / 2;
    let chol = CMAC * n * n * n / 3 + REAL * n;
    let solves = CMAC * n * n;
    let matched = CMAC * n * inner;
    flops.add(gram + chol + solves + matched);
}
