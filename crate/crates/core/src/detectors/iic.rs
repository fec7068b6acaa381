//! Iterative interference cancellation (IIC) and its K-favorable-pattern
//! variant (KMAP-IIC).
//!
//! Each outer iteration first computes, for every user, a candidate that
//! minimizes `||y_j - H_j s||^2` over a search set, where `y_j = r + H_j x_j`.
//! IIC searches the full signal set; KMAP-IIC restricts it to the `K`
//! patterns with the largest `|W_j y_j|` and picks the point per pattern with
//! the PAM slicer. A greedy pass then repeatedly adopts the candidate that
//! yields the smallest `||r + H_v (x_v - s_v)||^2`, as long as that strictly
//! lowers `||r||^2`.

use num_complex::Complex64;

use crate::channel::{ChannelSet, UserChannel};
use crate::complexity::{FlopCounter, REAL};
use crate::error::{MbmError, Result};
use crate::kernels;
use crate::model::{MbmConfig, MbmSymbol};

use super::common::{
    check_inputs, finish, pattern_metric, quantize_cost, ranked, symbol_delta, Residual,
};
use super::sequential::pinv_setup_cost;
use super::DetectionOutcome;

pub fn iic_detect(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
) -> Result<DetectionOutcome> {
    iic_detect_with(y, channels, config, &mut FlopCounter::enabled())
}

pub fn iic_detect_with(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    flops: &mut FlopCounter,
) -> Result<DetectionOutcome> {
    check_inputs(y, channels, config)?;
    run_greedy_ic(y, channels, config, flops, full_search)
}

pub fn kmap_iic_detect(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
) -> Result<DetectionOutcome> {
    kmap_iic_detect_with(y, channels, config, &mut FlopCounter::enabled())
}

pub fn kmap_iic_detect_with(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    flops: &mut FlopCounter,
) -> Result<DetectionOutcome> {
    check_inputs(y, channels, config)?;
    let k = config.list_size();
    if k == 0 || k > config.maps() {
        return Err(MbmError::InvalidListSize {
            k,
            maps: config.maps(),
        });
    }
    flops.add(pinv_setup_cost(config));
    run_greedy_ic(y, channels, config, flops, reduced_search)
}

/// Exhaustive `argmin_s ||y_j - H_j s||^2` over all `M |A|` symbols.
fn full_search(
    user: &UserChannel,
    y_j: &[Complex64],
    config: &MbmConfig,
    flops: &mut FlopCounter,
) -> MbmSymbol {
    let points = config.constellation().points();
    let mut best = MbmSymbol::Zero;
    let mut best_cost = f64::INFINITY;
    for m in 0..user.maps() {
        let h = user.column(m);
        for (p, &q) in points.iter().enumerate() {
            let cost = kernels::norm_sqr_minus_scaled(y_j, q, h, flops);
            if cost < best_cost {
                best_cost = cost;
                best = MbmSymbol::new(m, p);
            }
        }
    }
    flops.add(REAL * (user.maps() * points.len()) as u64);
    best
}

/// Search over the `K` most favorable patterns, one sliced point per pattern.
fn reduced_search(
    user: &UserChannel,
    y_j: &[Complex64],
    config: &MbmConfig,
    flops: &mut FlopCounter,
) -> MbmSymbol {
    let e = pattern_metric(user, y_j, flops);
    let list = ranked(&e, config.list_size(), flops);
    let constellation = config.constellation();
    let mut best = MbmSymbol::Zero;
    let mut best_key = (f64::INFINITY, usize::MAX);
    for &m in &list {
        flops.add(quantize_cost(config));
        let p = constellation.quantize(e[m]);
        let cost =
            kernels::norm_sqr_minus_scaled(y_j, constellation.point(p), user.column(m), flops);
        flops.add(REAL);
        if cost < best_key.0 || (cost == best_key.0 && m < best_key.1) {
            best_key = (cost, m);
            best = MbmSymbol::new(m, p);
        }
    }
    best
}

fn run_greedy_ic<F>(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    flops: &mut FlopCounter,
    search: F,
) -> Result<DetectionOutcome>
where
    F: Fn(&UserChannel, &[Complex64], &MbmConfig, &mut FlopCounter) -> MbmSymbol,
{
    let users = config.users();
    let mut estimates = vec![MbmSymbol::Zero; users];
    let mut candidates = vec![MbmSymbol::Zero; users];
    let mut residual = Residual::new(y, flops);
    let mut trace = Vec::with_capacity(config.iterations());
    let mut iterations_used = 0;

    for _ in 0..config.iterations() {
        iterations_used += 1;
        for (j, cand) in candidates.iter_mut().enumerate() {
            let user = channels.user(j);
            let y_j = residual.plus_own(user, config, estimates[j], flops);
            *cand = search(user, &y_j, config, flops);
        }

        // Residual change of each pending candidate; cleared once adopted.
        let mut deltas: Vec<Option<Vec<Complex64>>> = (0..users)
            .map(|j| {
                (candidates[j] != estimates[j]).then(|| {
                    symbol_delta(channels.user(j), config, estimates[j], candidates[j], flops)
                })
            })
            .collect();

        let mut changed = false;
        for _ in 0..users {
            let mut pick: Option<(usize, f64)> = None;
            for (i, d) in deltas.iter().enumerate() {
                if let Some(d) = d {
                    let n = residual.trial_norm(d, flops);
                    flops.add(REAL);
                    if pick.is_none_or(|(_, best)| n < best) {
                        pick = Some((i, n));
                    }
                }
            }
            let Some((v, n)) = pick else { break };
            flops.add(REAL);
            if n < residual.norm_sqr {
                let d = deltas[v].take().expect("picked a pending delta");
                residual.apply(&d, n, flops);
                estimates[v] = candidates[v];
                changed = true;
            } else {
                break;
            }
        }
        trace.push(residual.norm_sqr);
        if !changed {
            break;
        }
    }

    Ok(finish(
        channels,
        config,
        estimates,
        &candidates,
        residual,
        iterations_used,
        trace,
        flops,
    ))
}
