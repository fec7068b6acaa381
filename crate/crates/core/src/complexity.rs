//! Closed-form FLOP models for IIC, MAP-ISD and KMAP-IIC, and the runtime
//! counter that instrumented kernels charge.
//!
//! The closed forms are exact integer evaluations of the per-step budgets:
//!
//! | detector | one-time | per iteration |
//! |----------|----------|---------------|
//! | IIC      | 0 | `2N_r + (4N_r-1) M U |A| + (6N_r-1) U^2` |
//! | MAP-ISD  | `(2N_r-1) M U` | `2 M N_r U + (4N_r-1) U` |
//! | KMAP-IIC | `(2N_r-1) M U` | `2 M N_r U + (2N_r+4) K U + (6N_r-1) U^2` |
//!
//! The measured counter uses its own real-FLOP convention:
//!
//! | operation | FLOPs |
//! |-----------|-------|
//! | complex multiply-accumulate | 8 |
//! | complex multiply | 6 |
//! | complex add / subtract | 2 |
//! | complex times real | 2 |
//! | `\|z\|^2` | 3 |
//! | real add, multiply, divide, compare | 1 |
//!
//! Absolute counts under the two conventions differ; compare them as ratios.

use crate::error::{MbmError, Result};
use crate::model::MbmConfig;

pub const CMAC: u64 = 8;
pub const CMUL: u64 = 6;
pub const CADD: u64 = 2;
pub const CSCALE: u64 = 2;
pub const ABS2: u64 = 3;
pub const REAL: u64 = 1;

/// Monotone tally of floating-point operations for one detector run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopCounter {
    tally: Option<u64>,
}

impl FlopCounter {
    pub fn enabled() -> Self {
        Self { tally: Some(0) }
    }

    pub fn disabled() -> Self {
        Self { tally: None }
    }

    #[inline]
    pub fn add(&mut self, flops: u64) {
        if let Some(t) = self.tally.as_mut() {
            *t += flops;
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.tally.is_some()
    }

    pub fn value(&self) -> Option<u64> {
        self.tally
    }
}

impl Default for FlopCounter {
    fn default() -> Self {
        Self::enabled()
    }
}

/// Dimensions fed to the closed-form models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopModelInput {
    pub n_r: u64,
    pub users: u64,
    pub maps: u64,
    pub alphabet_size: u64,
    pub list_size: u64,
    pub iterations: u64,
}

impl FlopModelInput {
    pub fn new(
        n_r: u64,
        users: u64,
        maps: u64,
        alphabet_size: u64,
        list_size: u64,
        iterations: u64,
    ) -> Result<Self> {
        let dims = [n_r, users, maps, alphabet_size, list_size, iterations];
        if dims.contains(&0) {
            return Err(MbmError::InvalidConfig(format!(
                "flop model dimensions must be positive, got {dims:?}"
            )));
        }
        if list_size > maps {
            return Err(MbmError::InvalidListSize {
                k: list_size as usize,
                maps: maps as usize,
            });
        }
        Ok(Self {
            n_r,
            users,
            maps,
            alphabet_size,
            list_size,
            iterations,
        })
    }

    pub fn from_config(config: &MbmConfig) -> Self {
        Self {
            n_r: config.n_r() as u64,
            users: config.users() as u64,
            maps: config.maps() as u64,
            alphabet_size: config.constellation().len() as u64,
            list_size: config.list_size() as u64,
            iterations: config.iterations() as u64,
        }
    }
}

/// One-time and per-iteration cost of a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopModel {
    pub once: u64,
    pub per_iter: u64,
}

impl FlopModel {
    /// Total for `iterations` outer iterations.
    pub fn total(&self, iterations: u64) -> u64 {
        self.once + self.per_iter * iterations
    }

    /// Total for a possibly fractional mean iteration count.
    pub fn total_for_mean(&self, mean_iterations: f64) -> f64 {
        self.once as f64 + self.per_iter as f64 * mean_iterations
    }
}

pub fn flops_iic_iter(input: &FlopModelInput) -> u64 {
    let FlopModelInput {
        n_r,
        users: u,
        maps: m,
        alphabet_size: a,
        ..
    } = *input;
    2 * n_r + (4 * n_r - 1) * m * u * a + (6 * n_r - 1) * u * u
}

pub fn flops_iic(input: &FlopModelInput) -> FlopModel {
    FlopModel {
        once: 0,
        per_iter: flops_iic_iter(input),
    }
}

pub fn flops_map_isd(input: &FlopModelInput) -> FlopModel {
    let FlopModelInput {
        n_r,
        users: u,
        maps: m,
        ..
    } = *input;
    FlopModel {
        once: (2 * n_r - 1) * m * u,
        per_iter: 2 * m * n_r * u + (4 * n_r - 1) * u,
    }
}

pub fn flops_kmap_iic(input: &FlopModelInput) -> FlopModel {
    let FlopModelInput {
        n_r,
        users: u,
        maps: m,
        list_size: k,
        ..
    } = *input;
    FlopModel {
        once: (2 * n_r - 1) * m * u,
        per_iter: 2 * m * n_r * u + (2 * n_r + 4) * k * u + (6 * n_r - 1) * u * u,
    }
}

/// Fractional savings `1 - cost / baseline`.
pub fn savings(cost: f64, baseline: f64) -> f64 {
    1.0 - cost / baseline
}
