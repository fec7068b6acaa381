//! Monte Carlo BER sweeps.
//!
//! Every detector at a given frame sees the same channel, bits and noise.
//! Frame `i` draws, in order, the channel, the users' bits and a unit noise
//! vector from [`frame_stream`]`(seed, i)`; the noise is scaled by the SNR
//! point's `sigma`, so frame `i` is the same realization at every SNR.
//! Accumulation for a `(detector, SNR)` pair stops at the first frame where
//! it reaches `min_bit_errors` or `max_frames`; counts do not depend on the
//! number of worker threads.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{generate_channel, transmit, NoiseModel};
use crate::complexity::FlopCounter;
use crate::detectors::Detector;
use crate::error::{MbmError, Result};
use crate::model::{MbmConfig, MbmSymbol};
use crate::rng::{frame_stream, SimRng};

const MAX_REDRAWS: u32 = 64;
const FIRST_BATCH: u64 = 16;
const MAX_BATCH: u64 = 1024;

/// Noise variance for an SNR defined as `U E|x|^2 / sigma^2` per receive antenna.
pub fn snr_to_sigma2(snr_db: f64, config: &MbmConfig) -> f64 {
    config.users() as f64 / 10f64.powf(snr_db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mbm: MbmConfig,
    pub snr_db: Vec<f64>,
    pub detectors: Vec<Detector>,
    pub min_bit_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
}

impl SweepConfig {
    pub const DEFAULT_MIN_BIT_ERRORS: u64 = 200;
    pub const DEFAULT_MAX_FRAMES: u64 = 1_000_000;

    pub fn new(mbm: MbmConfig, snr_db: Vec<f64>, detectors: Vec<Detector>) -> Self {
        Self {
            mbm,
            snr_db,
            detectors,
            min_bit_errors: Self::DEFAULT_MIN_BIT_ERRORS,
            max_frames: Self::DEFAULT_MAX_FRAMES,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MbmError::InvalidSweep(m));
        if self.snr_db.is_empty() {
            return bad("SNR list is empty".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite".into());
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("SNR list must be strictly increasing".into());
        }
        if self.min_bit_errors == 0 {
            return bad("min_bit_errors must be >= 1".into());
        }
        if self.max_frames == 0 {
            return bad("max_frames must be >= 1".into());
        }
        if self.detectors.is_empty() {
            return bad("no detectors selected".into());
        }
        for d in &self.detectors {
            d.validate(&self.mbm)?;
        }
        Ok(())
    }
}

/// Error counts of one detector on one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialCounts {
    pub bit_errors: u64,
    pub vector_errors: u64,
    pub flops: u64,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Same order as the detector list passed to [`run_trial`].
    pub counts: Vec<TrialCounts>,
    /// Channel draws discarded as degenerate before this frame's channel.
    pub redraws: u32,
}

/// Draws one frame and runs every detector on the same `(y, H)`.
pub fn run_trial(
    rng: &mut SimRng,
    config: &MbmConfig,
    sigma2: f64,
    detectors: &[Detector],
) -> Result<TrialOutcome> {
    let noise = NoiseModel::new(sigma2)?;
    let mut redraws = 0;
    let channels = loop {
        match generate_channel(rng, config) {
            Ok(c) => break c,
            Err(MbmError::DegenerateChannel { .. }) if redraws < MAX_REDRAWS => redraws += 1,
            Err(e) => return Err(e),
        }
    };
    let bits: Vec<bool> = (0..config.bits_per_frame()).map(|_| rng.random()).collect();
    let sent = bits
        .chunks_exact(config.bits_per_user())
        .map(|b| config.encode(b))
        .collect::<Result<Vec<MbmSymbol>>>()?;
    let y: Vec<Complex64> = transmit(&channels, config, &sent, noise, rng)?;

    let mut counts = Vec::with_capacity(detectors.len());
    let mut decoded = Vec::with_capacity(bits.len());
    for det in detectors {
        let mut flops = FlopCounter::enabled();
        let out = det.detect(&y, &channels, config, sigma2, &mut flops)?;
        decoded.clear();
        for s in &out.estimates {
            config.decode_into(*s, &mut decoded)?;
        }
        counts.push(TrialCounts {
            bit_errors: decoded.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64,
            vector_errors: out
                .estimates
                .iter()
                .zip(&sent)
                .filter(|(a, b)| a != b)
                .count() as u64,
            flops: out.flops.unwrap_or(0),
            iterations: out.iterations_used as u64,
        });
    }
    Ok(TrialOutcome { counts, redraws })
}

/// Monte Carlo result of one detector at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub detector: String,
    pub snr_db: f64,
    pub frames: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub vector_errors: u64,
    pub symbols_sent: u64,
    pub ber: f64,
    pub ver: f64,
    pub mean_measured_flops: f64,
    /// Closed-form model evaluated at `mean_iterations`, if the detector has one.
    pub flops_model: Option<f64>,
    pub mean_iterations: f64,
    pub redraws: u64,
}

impl BerRecord {
    /// Binomial standard error of `ber`.
    pub fn stderr_ber(&self) -> f64 {
        if self.bits_sent == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits_sent as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    frames: u64,
    bit_errors: u64,
    vector_errors: u64,
    flops: u128,
    iterations: u64,
    redraws: u64,
    done: bool,
}

impl Accumulator {
    fn push(&mut self, c: &TrialCounts, redraws: u32, sweep: &SweepConfig) {
        self.frames += 1;
        self.bit_errors += c.bit_errors;
        self.vector_errors += c.vector_errors;
        self.flops += c.flops as u128;
        self.iterations += c.iterations;
        self.redraws += redraws as u64;
        self.done = self.bit_errors >= sweep.min_bit_errors || self.frames >= sweep.max_frames;
    }

    fn record(&self, det: &Detector, snr_db: f64, sweep: &SweepConfig) -> BerRecord {
        let cfg = &sweep.mbm;
        let bits_sent = self.frames * cfg.bits_per_frame() as u64;
        let symbols_sent = self.frames * cfg.users() as u64;
        let frames = self.frames.max(1) as f64;
        let mean_iterations = self.iterations as f64 / frames;
        BerRecord {
            detector: det.label(),
            snr_db,
            frames: self.frames,
            bits_sent,
            bit_errors: self.bit_errors,
            vector_errors: self.vector_errors,
            symbols_sent,
            ber: ratio(self.bit_errors, bits_sent),
            ver: ratio(self.vector_errors, symbols_sent),
            mean_measured_flops: self.flops as f64 / frames,
            flops_model: det
                .flop_model(cfg)
                .map(|m| m.total_for_mean(mean_iterations)),
            mean_iterations,
            redraws: self.redraws,
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Runs every `(detector, SNR)` pair of the sweep. Records are ordered by
/// detector (as listed), then by SNR.
pub fn run_sweep(sweep: &SweepConfig) -> Result<Vec<BerRecord>> {
    sweep.validate()?;
    let n_det = sweep.detectors.len();
    let mut per_snr = Vec::with_capacity(sweep.snr_db.len());
    for &snr in &sweep.snr_db {
        let sigma2 = snr_to_sigma2(snr, &sweep.mbm);
        let mut acc = vec![Accumulator::default(); n_det];
        let mut next_frame = 0u64;
        let mut batch = FIRST_BATCH;
        while acc.iter().any(|a| !a.done) {
            let active: Vec<usize> = (0..n_det).filter(|&d| !acc[d].done).collect();
            let dets: Vec<Detector> = active.iter().map(|&d| sweep.detectors[d]).collect();
            let end = (next_frame + batch).min(sweep.max_frames);
            let results = (next_frame..end)
                .into_par_iter()
                .map(|f| run_trial(&mut frame_stream(sweep.seed, f), &sweep.mbm, sigma2, &dets))
                .collect::<Result<Vec<_>>>()?;
            for trial in &results {
                for (slot, &d) in active.iter().enumerate() {
                    if !acc[d].done {
                        acc[d].push(&trial.counts[slot], trial.redraws, sweep);
                    }
                }
            }
            next_frame = end;
            batch = (batch * 2).min(MAX_BATCH);
        }
        per_snr.push(acc);
    }
    let mut records = Vec::with_capacity(n_det * sweep.snr_db.len());
    for (d, det) in sweep.detectors.iter().enumerate() {
        for (s, &snr) in sweep.snr_db.iter().enumerate() {
            records.push(per_snr[s][d].record(det, snr, sweep));
        }
    }
    Ok(records)
}

/// SNR at which a BER curve first crosses `target`, by linear interpolation
/// of `log10(ber)` against SNR between the bracketing points.
pub fn snr_at_ber(records: &[BerRecord], target: f64) -> Result<f64> {
    let out_of_range = MbmError::TargetOutOfRange { target };
    if !(target > 0.0 && target < 1.0) {
        return Err(out_of_range);
    }
    let mut curve: Vec<(f64, f64)> = records.iter().map(|r| (r.snr_db, r.ber)).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in curve.windows(2) {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 <= target {
            if b0 == b1 {
                return Ok(s0);
            }
            if b1 <= 0.0 {
                return Err(out_of_range);
            }
            let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
            return Ok(s0 + (s1 - s0) * (l0 - lt) / (l0 - l1));
        }
    }
    Err(out_of_range)
}

/// `snr_a - snr_b` at `target` BER. Positive means curve `a` needs more SNR.
pub fn snr_gap_at_ber(
    records_a: &[BerRecord],
    records_b: &[BerRecord],
    target: f64,
) -> Result<f64> {
    Ok(snr_at_ber(records_a, target)? - snr_at_ber(records_b, target)?)
}

/// Records of one detector label, in SNR order.
pub fn curve<'a>(records: &'a [BerRecord], detector: &str) -> Vec<&'a BerRecord> {
    let mut v: Vec<&BerRecord> = records.iter().filter(|r| r.detector == detector).collect();
    v.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    v
}
