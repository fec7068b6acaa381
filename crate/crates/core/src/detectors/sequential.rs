//! Sequential per-user detectors driven by the diagonal pseudo-inverse:
//! plain ISD and MAP-ISD.
//!
//! For user `j` both compute `e_j = W_j (r + H_j x_j)`, take the pattern
//! with the largest `|e_{j,k}|` and quantize `e_{j,k}`. MAP-ISD only adopts
//! the candidate when it strictly lowers `||r||^2` and stops once a full
//! sweep changes nothing; ISD always adopts and always runs `L` sweeps.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::complexity::{FlopCounter, CSCALE, REAL};
use crate::error::Result;
use crate::kernels;
use crate::model::{MbmConfig, MbmSymbol};

use super::common::{
    argmax_magnitude, check_inputs, finish, pattern_metric, quantize_cost, symbol_delta, Residual,
};
use super::DetectionOutcome;

/// Cost of building `W_k` for every user.
pub(crate) fn pinv_setup_cost(config: &MbmConfig) -> u64 {
    let n_r = config.n_r() as u64;
    // ||h||^2, one reciprocal, N_r conjugate-scalings per column
    let per_column = (4 * n_r - 1) + REAL + CSCALE * n_r;
    per_column * (config.maps() * config.users()) as u64
}

/// Pattern decision for one user: argmax of `|e_j|`, then quantize.
fn favorable_candidate(e: &[Complex64], config: &MbmConfig, flops: &mut FlopCounter) -> MbmSymbol {
    let k = argmax_magnitude(e, flops);
    flops.add(quantize_cost(config));
    MbmSymbol::new(k, config.constellation().quantize(e[k]))
}

pub fn isd_detect(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
) -> Result<DetectionOutcome> {
    isd_detect_with(y, channels, config, &mut FlopCounter::enabled())
}

pub fn isd_detect_with(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    flops: &mut FlopCounter,
) -> Result<DetectionOutcome> {
    run_sequential(y, channels, config, flops, false)
}

pub fn map_isd_detect(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
) -> Result<DetectionOutcome> {
    map_isd_detect_with(y, channels, config, &mut FlopCounter::enabled())
}

pub fn map_isd_detect_with(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    flops: &mut FlopCounter,
) -> Result<DetectionOutcome> {
    run_sequential(y, channels, config, flops, true)
}

fn run_sequential(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    flops: &mut FlopCounter,
    guarded: bool,
) -> Result<DetectionOutcome> {
    check_inputs(y, channels, config)?;
    flops.add(pinv_setup_cost(config));

    let users = config.users();
    let mut estimates = vec![MbmSymbol::Zero; users];
    let mut last_candidate = vec![MbmSymbol::Zero; users];
    let mut residual = Residual::new(y, flops);
    let mut trace = Vec::with_capacity(config.iterations());
    let mut iterations_used = 0;

    for _ in 0..config.iterations() {
        iterations_used += 1;
        let mut changed = false;
        for j in 0..users {
            let user = channels.user(j);
            let y_j = residual.plus_own(user, config, estimates[j], flops);
            let e = pattern_metric(user, &y_j, flops);
            let cand = favorable_candidate(&e, config, flops);
            last_candidate[j] = cand;
            if cand == estimates[j] {
                continue;
            }
            let d = symbol_delta(user, config, estimates[j], cand, flops);
            if guarded {
                let n = residual.trial_norm(&d, flops);
                flops.add(REAL);
                if n < residual.norm_sqr {
                    residual.apply(&d, n, flops);
                    estimates[j] = cand;
                    changed = true;
                }
            } else {
                kernels::add_assign(&mut residual.r, &d, flops);
                estimates[j] = cand;
                changed = true;
            }
        }
        if !guarded {
            residual.norm_sqr = kernels::norm_sqr(&residual.r, flops);
        }
        trace.push(residual.norm_sqr);
        if guarded && !changed {
            break;
        }
    }

    Ok(finish(
        channels,
        config,
        estimates,
        &last_candidate,
        residual,
        iterations_used,
        trace,
        flops,
    ))
}
