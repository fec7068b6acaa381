//! TOML experiment files.
//!
//! ```toml
//! snr_db = [0.0, 2.0, 4.0]
//! seed = 7                 # default 0
//! min_bit_errors = 200     # default 200
//! max_frames = 100000      # default 1000000
//!
//! [system]
//! n_r = 128
//! users = 20
//! n_rf = 3
//! constellation = "4qam"
//!
//! [[detector]]
//! kind = "kmap-iic"        # ml, mmse, isd, iic, map-isd, kmap-iic
//! iterations = 6           # default 6, iterative detectors only
//! k = 4                    # kmap-iic only, 1 <= k <= 2^n_rf
//! ```

use std::ops::Range;
use std::path::Path;

use mbm_core::detectors::{Detector, DetectorKind};
use mbm_core::sim::SweepConfig;
use mbm_core::{Constellation, MbmConfig};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, ConfigError};

pub const DEFAULT_ITERATIONS: usize = 6;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Spanned<RawSystem>,
    snr_db: Spanned<Vec<f64>>,
    seed: Option<u64>,
    min_bit_errors: Option<Spanned<u64>>,
    max_frames: Option<Spanned<u64>>,
    #[serde(rename = "detector")]
    detectors: Spanned<Vec<Spanned<RawDetector>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n_r: usize,
    users: usize,
    n_rf: usize,
    constellation: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    kind: Spanned<String>,
    iterations: Option<Spanned<usize>>,
    k: Option<Spanned<usize>>,
}

fn line_of(src: &str, span: Range<usize>) -> usize {
    let end = span.start.min(src.len());
    src.as_bytes()[..end]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

pub fn parse_config(path: &Path) -> Result<SweepConfig, CliError> {
    let src = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&src).map_err(|error| CliError::Config {
        origin: path.display().to_string(),
        error,
    })
}

pub fn parse_config_str(src: &str) -> Result<SweepConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let message = e.message().to_string();
        match e.span() {
            Some(span) => ConfigError::at(line_of(src, span), message),
            None => ConfigError::new(message),
        }
    })?;
    let at = |span: Range<usize>, msg: String| ConfigError::at(line_of(src, span), msg);

    let sys_span = raw.system.span();
    let sys = raw.system.into_inner();
    let constellation = Constellation::from_name(sys.constellation.get_ref())
        .map_err(|e| at(sys.constellation.span(), e.to_string()))?;
    let mbm = MbmConfig::new(sys.n_r, sys.users, sys.n_rf, constellation)
        .map_err(|e| at(sys_span, e.to_string()))?;

    let det_span = raw.detectors.span();
    let raw_dets = raw.detectors.into_inner();
    if raw_dets.is_empty() {
        return Err(at(det_span, "at least one [[detector]] is required".into()));
    }
    let mut detectors = Vec::with_capacity(raw_dets.len());
    for d in raw_dets {
        let span = d.span();
        let d = d.into_inner();
        let detector = build_detector(&d, src)?;
        detector
            .validate(&mbm)
            .map_err(|e| at(span, e.to_string()))?;
        detectors.push(detector);
    }

    let snr_span = raw.snr_db.span();
    let mut sweep = SweepConfig::new(mbm, raw.snr_db.into_inner(), detectors);
    sweep.seed = raw.seed.unwrap_or(0);
    if let Some(m) = &raw.min_bit_errors {
        sweep.min_bit_errors = *m.get_ref();
    }
    if let Some(m) = &raw.max_frames {
        sweep.max_frames = *m.get_ref();
    }
    sweep.validate().map_err(|e| {
        let span = match &e {
            mbm_core::MbmError::InvalidSweep(m) if m.starts_with("min_bit_errors") => {
                raw.min_bit_errors.as_ref().map(|s| s.span())
            }
            mbm_core::MbmError::InvalidSweep(m) if m.starts_with("max_frames") => {
                raw.max_frames.as_ref().map(|s| s.span())
            }
            _ => Some(snr_span.clone()),
        };
        match span {
            Some(s) => at(s, e.to_string()),
            None => ConfigError::new(e.to_string()),
        }
    })?;
    Ok(sweep)
}

fn build_detector(d: &RawDetector, src: &str) -> Result<Detector, ConfigError> {
    let at = |span: Range<usize>, msg: String| ConfigError::at(line_of(src, span), msg);
    let kind: DetectorKind = d
        .kind
        .get_ref()
        .parse()
        .map_err(|e: mbm_core::MbmError| at(d.kind.span(), e.to_string()))?;
    let iterations = match (&d.iterations, kind.is_iterative()) {
        (Some(it), false) => {
            return Err(at(
                it.span(),
                format!("`iterations` does not apply to {kind}"),
            ));
        }
        (Some(it), true) => *it.get_ref(),
        (None, true) => DEFAULT_ITERATIONS,
        (None, false) => 1,
    };
    match (kind, &d.k) {
        (DetectorKind::KmapIic, Some(k)) => Ok(Detector::kmap_iic(iterations, *k.get_ref())),
        (DetectorKind::KmapIic, None) => Err(at(d.kind.span(), "kmap-iic requires `k`".into())),
        (_, Some(k)) => Err(at(k.span(), format!("`k` does not apply to {kind}"))),
        (DetectorKind::Ml, None) => Ok(Detector::ml()),
        (DetectorKind::Mmse, None) => Ok(Detector::mmse()),
        (DetectorKind::Isd, None) => Ok(Detector::isd(iterations)),
        (DetectorKind::Iic, None) => Ok(Detector::iic(iterations)),
        (DetectorKind::MapIsd, None) => Ok(Detector::map_isd(iterations)),
    }
}
