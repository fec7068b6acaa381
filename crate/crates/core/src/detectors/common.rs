use num_complex::Complex64;

use crate::channel::{ChannelSet, UserChannel};
use crate::complexity::{FlopCounter, ABS2, REAL};
use crate::error::{MbmError, Result};
use crate::kernels;
use crate::model::{MbmConfig, MbmSymbol};

use super::DetectionOutcome;

/// `||y - sum_k H_k x_k||^2`; zero symbols contribute nothing.
pub fn ml_cost(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
    symbols: &[MbmSymbol],
) -> f64 {
    let s = channels.superpose(config, symbols);
    y.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// The `K` most favorable patterns of one user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSet {
    pub owner_user: usize,
    pub map_indices: Vec<usize>,
}

/// Indices of the `k` largest `|e_i|`, largest first, ties to the lower index.
pub fn rank_by_magnitude(e: &[Complex64], k: usize) -> Vec<usize> {
    let mags: Vec<f64> = e.iter().map(|v| v.norm_sqr()).collect();
    let mut idx: Vec<usize> = (0..e.len()).collect();
    idx.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Favorable-pattern metric `e_j = W_j y_j`.
pub(crate) fn pattern_metric(
    user: &UserChannel,
    y_j: &[Complex64],
    flops: &mut FlopCounter,
) -> Vec<Complex64> {
    (0..user.maps())
        .map(|m| kernels::dot(user.pinv_row(m), y_j, flops))
        .collect()
}

/// `W_j (r + H_j x_j)` ranked by magnitude, truncated to `k` patterns.
pub fn select_maps(
    residual_plus_self: &[Complex64],
    user: &UserChannel,
    owner_user: usize,
    k: usize,
    flops: &mut FlopCounter,
) -> Result<ReducedSet> {
    if k == 0 || k > user.maps() {
        return Err(MbmError::InvalidListSize {
            k,
            maps: user.maps(),
        });
    }
    let e = pattern_metric(user, residual_plus_self, flops);
    Ok(ReducedSet {
        owner_user,
        map_indices: ranked(&e, k, flops),
    })
}

pub(crate) fn ranked(e: &[Complex64], k: usize, flops: &mut FlopCounter) -> Vec<usize> {
    flops.add(ABS2 * e.len() as u64 + REAL * (e.len() * k) as u64);
    rank_by_magnitude(e, k)
}

/// Index of the largest `|e_i|`; index 0 when every entry is zero.
pub(crate) fn argmax_magnitude(e: &[Complex64], flops: &mut FlopCounter) -> usize {
    flops.add((ABS2 + REAL) * e.len() as u64);
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (i, v) in e.iter().enumerate() {
        let m = v.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    best
}

/// Cost of one hard decision on a scalar.
pub(crate) fn quantize_cost(config: &MbmConfig) -> u64 {
    match config.constellation().pam_sizes() {
        // scale, two slicers of add/mul/round/mul/sub/clamp
        Some(_) => 2 + 2 * 6,
        None => config.constellation().len() as u64 * (2 + ABS2 + REAL),
    }
}

/// Residual vector with its cached squared norm.
#[derive(Debug, Clone)]
pub(crate) struct Residual {
    pub r: Vec<Complex64>,
    pub norm_sqr: f64,
}

impl Residual {
    pub fn new(y: &[Complex64], flops: &mut FlopCounter) -> Self {
        Self {
            r: y.to_vec(),
            norm_sqr: kernels::norm_sqr(y, flops),
        }
    }

    /// `r + H_j x_j`.
    pub fn plus_own(
        &self,
        user: &UserChannel,
        config: &MbmConfig,
        current: MbmSymbol,
        flops: &mut FlopCounter,
    ) -> Vec<Complex64> {
        let mut y_j = self.r.clone();
        if let MbmSymbol::Active { map_index, .. } = current {
            kernels::axpy(
                config.symbol_value(current),
                user.column(map_index),
                &mut y_j,
                flops,
            );
        }
        y_j
    }

    /// `||r + d||^2`.
    pub fn trial_norm(&self, delta: &[Complex64], flops: &mut FlopCounter) -> f64 {
        kernels::norm_sqr_of_sum(&self.r, delta, flops)
    }

    /// `r += d`, adopting a norm computed by [`Residual::trial_norm`] on the same `d`.
    pub fn apply(&mut self, delta: &[Complex64], new_norm: f64, flops: &mut FlopCounter) {
        kernels::add_assign(&mut self.r, delta, flops);
        self.norm_sqr = new_norm;
    }
}

/// `H_j (old - new)`, the residual change when user `j` moves from `old` to `new`.
pub(crate) fn symbol_delta(
    user: &UserChannel,
    config: &MbmConfig,
    old: MbmSymbol,
    new: MbmSymbol,
    flops: &mut FlopCounter,
) -> Vec<Complex64> {
    let mut d = vec![Complex64::new(0.0, 0.0); user.n_r()];
    if let MbmSymbol::Active { map_index, .. } = old {
        kernels::axpy(
            config.symbol_value(old),
            user.column(map_index),
            &mut d,
            flops,
        );
    }
    if let MbmSymbol::Active { map_index, .. } = new {
        kernels::axpy(
            -config.symbol_value(new),
            user.column(map_index),
            &mut d,
            flops,
        );
    }
    d
}

pub(crate) fn check_inputs(
    y: &[Complex64],
    channels: &ChannelSet,
    config: &MbmConfig,
) -> Result<()> {
    channels.check_matches(config)?;
    if y.len() != config.n_r() {
        return Err(MbmError::Dimension(format!(
            "received vector has length {}, expected {}",
            y.len(),
            config.n_r()
        )));
    }
    Ok(())
}

/// Replaces estimates still at zero with the user's last candidate and
/// packages the outcome.
#[allow(clippy::too_many_arguments)]
pub(crate) fn finish(
    channels: &ChannelSet,
    config: &MbmConfig,
    mut estimates: Vec<MbmSymbol>,
    fallback: &[MbmSymbol],
    mut residual: Residual,
    iterations_used: usize,
    residual_trace: Vec<f64>,
    flops: &mut FlopCounter,
) -> DetectionOutcome {
    for (j, est) in estimates.iter_mut().enumerate() {
        if est.is_zero() {
            let cand = fallback[j];
            let user = channels.user(j);
            let d = symbol_delta(user, config, MbmSymbol::Zero, cand, flops);
            let n = residual.trial_norm(&d, flops);
            residual.apply(&d, n, flops);
            *est = cand;
        }
    }
    DetectionOutcome {
        estimates,
        iterations_used,
        residual_trace,
        residual_norm_sqr: residual.norm_sqr,
        flops: flops.value(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rank_examples() {
        let e = [c(0.1), c(2.0), c(0.5), c(1.2)];
        assert_eq!(rank_by_magnitude(&e, 2), vec![1, 3]);
        assert_eq!(rank_by_magnitude(&e, 4), vec![1, 3, 2, 0]);
        let tie = [c(1.0), c(-1.0), Complex64::new(0.0, 1.0)];
        assert_eq!(rank_by_magnitude(&tie, 3), vec![0, 1, 2]);
        let mut f = FlopCounter::enabled();
        assert_eq!(argmax_magnitude(&[c(0.0); 4], &mut f), 0);
        assert_eq!(argmax_magnitude(&e, &mut f), 1);
    }
}
