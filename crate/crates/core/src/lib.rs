//! Symbol detection for uplink massive-MIMO systems where every user
//! transmits with media-based modulation (MBM).
//!
//! Each user owns `n_rf` RF mirrors, i.e. `M = 2^n_rf` mirror activation
//! patterns, and sends one constellation point through the channel column
//! selected by the active pattern. The crate provides:
//!
//! - [`model`] and [`constellation`]: the MBM alphabet and bit mapping;
//! - [`channel`]: Rayleigh channel ensembles, AWGN transmission and the
//!   diagonal pseudo-inverse `W_k = D_k^-1 H_k^H`;
//! - [`detectors`]: ML, MMSE, ISD, IIC, MAP-ISD and KMAP-IIC;
//! - [`complexity`]: closed-form FLOP models and the runtime FLOP counter;
//! - [`sim`]: seeded Monte Carlo BER sweeps.
//!
//! ```
//! use mbm_core::{channel, detectors, rng, Constellation, MbmConfig, MbmSymbol, NoiseModel};
//!
//! let config = MbmConfig::new(64, 4, 2, Constellation::qam4())?;
//! let mut stream = rng::frame_stream(1, 0);
//! let h = channel::generate_channel(&mut stream, &config)?;
//! let sent = vec![MbmSymbol::new(1, 2); 4];
//! let y = channel::transmit(&h, &config, &sent, NoiseModel::noiseless(), &mut stream)?;
//! let out = detectors::kmap_iic_detect(&y, &h, &config.with_list_size(2)?)?;
//! assert_eq!(out.estimates, sent);
//! # Ok::<(), mbm_core::MbmError>(())
//! ```

pub mod channel;
pub mod complexity;
pub mod constellation;
pub mod detectors;
pub mod error;
pub mod kernels;
pub mod model;
pub mod rng;
pub mod sim;

pub use channel::{ChannelSet, NoiseModel, UserChannel};
pub use constellation::{Constellation, GridPoint};
pub use detectors::{DetectionOutcome, Detector, DetectorKind};
pub use error::{MbmError, Result};
pub use model::{MbmConfig, MbmSymbol};
pub use sim::{BerRecord, SweepConfig};
