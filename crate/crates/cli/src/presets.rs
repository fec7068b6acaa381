//! Built-in experiments, one per figure of the reference evaluation.
//!
//! SNR grids are placed around each system's BER waterfall under the
//! harness's per-receive-antenna SNR definition.

use mbm_core::detectors::Detector;
use mbm_core::sim::SweepConfig;
use mbm_core::{Constellation, MbmConfig};

use crate::{Experiment, SystemRun};

pub const L: usize = 6;
pub const PRESET_SEED: u64 = 2021;
pub const BER_MAX_FRAMES: u64 = 200_000;
pub const FLOP_FRAMES: u64 = 200;
pub const FLOP_SNR_DB: f64 = 5.0;

pub const NAMES: [&str; 11] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11",
];

fn system(n_r: usize, users: usize, n_rf: usize, c: Constellation) -> MbmConfig {
    MbmConfig::new(n_r, users, n_rf, c).expect("preset systems are valid")
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

/// `K = 1, M/4, M/2`, deduplicated for small `M`.
pub fn list_sizes(maps: usize) -> Vec<usize> {
    let mut ks = vec![1, (maps / 4).max(1), (maps / 2).max(1)];
    ks.dedup();
    ks
}

fn kmap_set(maps: usize) -> Vec<Detector> {
    list_sizes(maps)
        .into_iter()
        .map(|k| Detector::kmap_iic(L, k))
        .collect()
}

fn comparison(mbm: &MbmConfig, with_mmse: bool) -> Vec<Detector> {
    let mut d = Vec::new();
    if with_mmse {
        d.push(Detector::mmse());
    }
    d.push(Detector::iic(L));
    d.push(Detector::map_isd(L));
    d.extend(kmap_set(mbm.maps()));
    d
}

fn ber_sweep(mbm: MbmConfig, snr_db: Vec<f64>, detectors: Vec<Detector>) -> SweepConfig {
    let mut s = SweepConfig::new(mbm, snr_db, detectors);
    s.seed = PRESET_SEED;
    s.max_frames = BER_MAX_FRAMES;
    s
}

fn flop_sweep(mbm: MbmConfig) -> SweepConfig {
    let detectors = comparison(&mbm, false);
    let mut s = SweepConfig::new(mbm, vec![FLOP_SNR_DB], detectors);
    s.seed = PRESET_SEED;
    s.min_bit_errors = u64::MAX;
    s.max_frames = FLOP_FRAMES;
    s
}

fn single(name: &str, note: &str, sweep: SweepConfig) -> Experiment {
    Experiment {
        name: name.into(),
        note: note.into(),
        runs: vec![SystemRun { tag: None, sweep }],
    }
}

pub fn preset(name: &str) -> Option<Experiment> {
    let q4 = Constellation::qam4;
    let q16 = Constellation::qam16;
    let exp = match name {
        "fig1" => {
            let mbm = system(128, 20, 3, q4());
            let dets = [1, 2, 4, 6, 8].map(Detector::map_isd).to_vec();
            single(
                name,
                "MAP-ISD vs L, 128x20, n_rf=3, 4-QAM",
                ber_sweep(mbm, grid(0.0, 8.0, 1.0), dets),
            )
        }
        "fig2" => {
            let mbm = system(128, 16, 4, q4());
            let dets = [1, 2, 4, 6, 8].map(Detector::map_isd).to_vec();
            single(
                name,
                "MAP-ISD vs L, 128x16, n_rf=4, 4-QAM",
                ber_sweep(mbm, grid(0.0, 8.0, 1.0), dets),
            )
        }
        "fig3" => {
            let mbm = system(128, 20, 3, q4());
            let k = mbm.maps() / 2;
            let dets = [1, 2, 4, 6].map(|l| Detector::kmap_iic(l, k)).to_vec();
            single(
                name,
                "KMAP-IIC (K=M/2) vs L, 128x20, n_rf=3, 4-QAM",
                ber_sweep(mbm, grid(0.0, 7.0, 1.0), dets),
            )
        }
        "fig4" => {
            let mbm = system(128, 20, 3, q4());
            let dets = comparison(&mbm, true);
            single(
                name,
                "detector comparison, 128x20, n_rf=3, 4-QAM, L=6",
                ber_sweep(mbm, grid(0.0, 7.0, 1.0), dets),
            )
        }
        "fig5" => {
            let mbm = system(128, 20, 4, q4());
            let dets = comparison(&mbm, true);
            single(
                name,
                "detector comparison, 128x20, n_rf=4, 4-QAM, L=6",
                ber_sweep(mbm, grid(0.0, 8.0, 1.0), dets),
            )
        }
        "fig6" => {
            let mbm = system(128, 16, 6, q4());
            let dets = comparison(&mbm, true);
            single(
                name,
                "detector comparison, 128x16, n_rf=6, 4-QAM, L=6",
                ber_sweep(mbm, grid(0.0, 10.0, 1.0), dets),
            )
        }
        "fig7" => {
            let mbm = system(128, 20, 3, q16());
            let dets = comparison(&mbm, true);
            single(
                name,
                "detector comparison, 128x20, n_rf=3, 16-QAM, L=6",
                ber_sweep(mbm, grid(4.0, 14.0, 1.0), dets),
            )
        }
        "fig8" => {
            let mbm = system(128, 20, 5, q16());
            let dets = comparison(&mbm, true);
            single(
                name,
                "detector comparison, 128x20, n_rf=5, 16-QAM, L=6",
                ber_sweep(mbm, grid(4.0, 14.0, 1.0), dets),
            )
        }
        "fig9" => Experiment {
            name: name.into(),
            note: format!("BER vs N_r at {FIG9_SNR_DB} dB, U=20, n_rf=4, 4-QAM, L=6"),
            runs: (80..=140)
                .step_by(10)
                .map(|n_r| {
                    let mbm = system(n_r, 20, 4, q4());
                    let dets = comparison(&mbm, false);
                    SystemRun {
                        tag: Some(format!("nr{n_r}")),
                        sweep: ber_sweep(mbm, vec![FIG9_SNR_DB], dets),
                    }
                })
                .collect(),
        },
        "fig10" => Experiment {
            name: name.into(),
            note: "mean FLOPs at 5 dB: sys1 128x20 n_rf=3, sys2 128x20 n_rf=4, sys3 128x16 n_rf=6"
                .into(),
            runs: FIG10_SYSTEMS
                .iter()
                .enumerate()
                .map(|(i, &(n_r, u, n_rf))| SystemRun {
                    tag: Some(format!("sys{}", i + 1)),
                    sweep: flop_sweep(system(n_r, u, n_rf, q4())),
                })
                .collect(),
        },
        "fig11" => Experiment {
            name: name.into(),
            note: "mean FLOPs vs N_r at 5 dB, U=16, n_rf=4, 4-QAM".into(),
            runs: (80..=160)
                .step_by(20)
                .map(|n_r| SystemRun {
                    tag: Some(format!("nr{n_r}")),
                    sweep: flop_sweep(system(n_r, 16, 4, q4())),
                })
                .collect(),
        },
        _ => return None,
    };
    Some(exp)
}

pub const FIG9_SNR_DB: f64 = 3.0;

/// `(N_r, U, n_rf)` of the three complexity-comparison systems.
pub const FIG10_SYSTEMS: [(usize, usize, usize); 3] = [(128, 20, 3), (128, 20, 4), (128, 16, 6)];

pub fn all() -> Vec<Experiment> {
    NAMES.iter().filter_map(|n| preset(n)).collect()
}
