//! Exhaustive joint maximum-likelihood search.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::complexity::{FlopCounter, REAL};
use crate::error::{MbmError, Result};
use crate::kernels;
use crate::model::{MbmConfig, MbmSymbol};

use super::common::{check_inputs, Residual};
use super::DetectionOutcome;

/// Largest joint signal set `ml_detect` agrees to enumerate.
pub const DEFAULT_ML_CAP: u128 = 1_000_000;

pub fn ml_detect(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
) -> Result<DetectionOutcome> {
    ml_detect_with(
        y,
        channels,
        config,
        DEFAULT_ML_CAP,
        &mut FlopCounter::enabled(),
    )
}

/// Global minimizer of `||y - sum_k H_k x_k||^2`. Ties resolve to the
/// lexicographically smallest `(map, point)` sequence, user 0 first.
pub fn ml_detect_with(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    cap: u128,
    flops: &mut FlopCounter,
) -> Result<DetectionOutcome> {
    let size = match config.signal_set_size() {
        Ok((_, joint)) => joint,
        Err(_) => u128::MAX,
    };
    if size > cap {
        return Err(MbmError::SearchSpaceTooLarge { size, cap });
    }
    check_inputs(y, channels, config)?;

    let users = config.users();
    let n_r = config.n_r();
    let alphabet: Vec<MbmSymbol> = config.signal_set().collect();
    // contributions[k][c] = H_k s_c
    let contributions: Vec<Vec<Vec<Complex64>>> = (0..users)
        .map(|k| {
            let user = channels.user(k);
            alphabet
                .iter()
                .map(|s| {
                    let mut v = vec![Complex64::new(0.0, 0.0); n_r];
                    let m = s.map_index().expect("signal set symbols are active");
                    kernels::axpy(config.symbol_value(*s), user.column(m), &mut v, flops);
                    v
                })
                .collect()
        })
        .collect();

    // partial[l] = y - sum_{k < l} H_k x_k along the current branch.
    let mut partial = vec![y.to_vec(); users + 1];
    let mut digits = vec![0usize; users];
    let mut best_digits = digits.clone();
    let mut best_cost = f64::INFINITY;
    let last = users - 1;
    let mut level = 0;
    loop {
        if level == last {
            for (c, contrib) in contributions[last].iter().enumerate() {
                let cost = norm_sqr_of_diff(&partial[last], contrib, flops);
                flops.add(REAL);
                if cost < best_cost {
                    best_cost = cost;
                    digits[last] = c;
                    best_digits.copy_from_slice(&digits);
                }
            }
            // Backtrack to the deepest level with an untried candidate.
            loop {
                if level == 0 {
                    return Ok(finish_ml(
                        y,
                        channels,
                        config,
                        &alphabet,
                        &best_digits,
                        flops,
                    ));
                }
                level -= 1;
                digits[level] += 1;
                if digits[level] < alphabet.len() {
                    digits[level + 1..].fill(0);
                    break;
                }
            }
        }
        let (head, tail) = partial.split_at_mut(level + 1);
        let next = &mut tail[0];
        next.copy_from_slice(&head[level]);
        for (a, b) in next.iter_mut().zip(&contributions[level][digits[level]]) {
            *a -= b;
        }
        flops.add(2 * n_r as u64);
        level += 1;
    }
}

fn norm_sqr_of_diff(a: &[Complex64], b: &[Complex64], flops: &mut FlopCounter) -> f64 {
    flops.add(6 * a.len() as u64);
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

fn finish_ml(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    alphabet: &[MbmSymbol],
    digits: &[usize],
    flops: &mut FlopCounter,
) -> DetectionOutcome {
    let estimates: Vec<MbmSymbol> = digits.iter().map(|&c| alphabet[c]).collect();
    let s = channels.superpose(config, &estimates);
    let r: Vec<Complex64> = y.iter().zip(&s).map(|(a, b)| a - b).collect();
    let residual = Residual::new(&r, flops);
    DetectionOutcome {
        estimates,
        iterations_used: 1,
        residual_trace: vec![residual.norm_sqr],
        residual_norm_sqr: residual.norm_sqr,
        flops: flops.value(),
    }
}
