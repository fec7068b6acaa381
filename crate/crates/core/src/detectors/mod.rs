//! Uplink MBM detectors.
//!
//! All detectors start from the all-zero estimate, keep a residual
//! `r = y - sum_k H_k x_k` up to date incrementally, and break every tie
//! (over users, patterns and constellation points) toward the lowest index.

mod common;
mod iic;
mod ml;
mod mmse;
mod sequential;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::complexity::{
    flops_iic, flops_kmap_iic, flops_map_isd, FlopCounter, FlopModel, FlopModelInput,
};
use crate::error::{MbmError, Result};
use crate::model::{MbmConfig, MbmSymbol};

pub use common::{ml_cost, rank_by_magnitude, select_maps, ReducedSet};
pub use iic::{iic_detect, iic_detect_with, kmap_iic_detect, kmap_iic_detect_with};
pub use ml::{ml_detect, ml_detect_with, DEFAULT_ML_CAP};
pub use mmse::{mmse_detect, mmse_detect_with};
pub use sequential::{isd_detect, isd_detect_with, map_isd_detect, map_isd_detect_with};

/// Output of one detector run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    /// One estimate per user; never [`MbmSymbol::Zero`].
    pub estimates: Vec<MbmSymbol>,
    pub iterations_used: usize,
    /// `||r||^2` after each outer iteration.
    pub residual_trace: Vec<f64>,
    /// `||y - sum_k H_k x_k||^2` of the returned estimates, maintained incrementally.
    pub residual_norm_sqr: f64,
    pub flops: Option<u64>,
}

/// Runtime FLOP tally of `outcome`, including one-time setup work.
pub fn measured_flops(outcome: &DetectionOutcome) -> Result<u64> {
    outcome.flops.ok_or(MbmError::InstrumentationDisabled)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Ml,
    Mmse,
    Isd,
    Iic,
    MapIsd,
    KmapIic,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Ml,
        DetectorKind::Mmse,
        DetectorKind::Isd,
        DetectorKind::Iic,
        DetectorKind::MapIsd,
        DetectorKind::KmapIic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ml => "ml",
            Self::Mmse => "mmse",
            Self::Isd => "isd",
            Self::Iic => "iic",
            Self::MapIsd => "map-isd",
            Self::KmapIic => "kmap-iic",
        }
    }

    pub fn is_iterative(&self) -> bool {
        !matches!(self, Self::Ml | Self::Mmse)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = MbmError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == key || k.as_str().replace('-', "") == key)
            .ok_or_else(|| MbmError::InvalidConfig(format!("unknown detector `{s}`")))
    }
}

/// A detector together with its iteration count and list size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Detector {
    pub kind: DetectorKind,
    pub iterations: usize,
    pub list_size: Option<usize>,
}

impl Detector {
    pub fn ml() -> Self {
        Self::new(DetectorKind::Ml, 1, None)
    }

    pub fn mmse() -> Self {
        Self::new(DetectorKind::Mmse, 1, None)
    }

    pub fn isd(iterations: usize) -> Self {
        Self::new(DetectorKind::Isd, iterations, None)
    }

    pub fn iic(iterations: usize) -> Self {
        Self::new(DetectorKind::Iic, iterations, None)
    }

    pub fn map_isd(iterations: usize) -> Self {
        Self::new(DetectorKind::MapIsd, iterations, None)
    }

    pub fn kmap_iic(iterations: usize, list_size: usize) -> Self {
        Self::new(DetectorKind::KmapIic, iterations, Some(list_size))
    }

    fn new(kind: DetectorKind, iterations: usize, list_size: Option<usize>) -> Self {
        Self {
            kind,
            iterations,
            list_size,
        }
    }

    /// Stable identifier such as `map-isd/L6` or `kmap-iic/K4/L6`.
    pub fn label(&self) -> String {
        match (self.kind.is_iterative(), self.list_size) {
            (false, _) => self.kind.to_string(),
            (true, Some(k)) => format!("{}/K{}/L{}", self.kind, k, self.iterations),
            (true, None) => format!("{}/L{}", self.kind, self.iterations),
        }
    }

    /// `base` with this detector's iteration count and list size applied.
    pub fn configure(&self, base: &MbmConfig) -> Result<MbmConfig> {
        let cfg = base.clone().with_iterations(self.iterations.max(1))?;
        match (self.kind, self.list_size) {
            (DetectorKind::KmapIic, Some(k)) => cfg.with_list_size(k),
            (DetectorKind::KmapIic, None) => Err(MbmError::InvalidConfig(
                "kmap-iic requires a list size".into(),
            )),
            _ => Ok(cfg),
        }
    }

    pub fn validate(&self, base: &MbmConfig) -> Result<()> {
        if self.iterations == 0 {
            return Err(MbmError::InvalidConfig(format!(
                "{}: iterations must be >= 1",
                self.kind
            )));
        }
        self.configure(base).map(|_| ())
    }

    /// Runs the detector; `sigma2` is only read by MMSE.
    pub fn detect(
        &self,
        y: &[Complex64],
        channels: &ChannelSet,
        base: &MbmConfig,
        sigma2: f64,
        flops: &mut FlopCounter,
    ) -> Result<DetectionOutcome> {
        let config = self.configure(base)?;
        match self.kind {
            DetectorKind::Ml => ml_detect_with(y, channels, &config, DEFAULT_ML_CAP, flops),
            DetectorKind::Mmse => mmse_detect_with(y, channels, &config, sigma2, flops),
            DetectorKind::Isd => isd_detect_with(y, channels, &config, flops),
            DetectorKind::Iic => iic_detect_with(y, channels, &config, flops),
            DetectorKind::MapIsd => map_isd_detect_with(y, channels, &config, flops),
            DetectorKind::KmapIic => kmap_iic_detect_with(y, channels, &config, flops),
        }
    }

    /// Closed-form FLOP model, for detectors that have one.
    pub fn flop_model(&self, base: &MbmConfig) -> Option<FlopModel> {
        let config = self.configure(base).ok()?;
        let input = FlopModelInput::from_config(&config);
        match self.kind {
            DetectorKind::Iic => Some(flops_iic(&input)),
            DetectorKind::MapIsd => Some(flops_map_isd(&input)),
            DetectorKind::KmapIic => Some(flops_kmap_iic(&input)),
            _ => None,
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
