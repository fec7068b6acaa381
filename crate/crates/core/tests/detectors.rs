use mbm_core::channel::{generate_channel, transmit, NoiseModel};
use mbm_core::complexity::FlopCounter;
use mbm_core::detectors::{
    iic_detect, isd_detect, kmap_iic_detect, map_isd_detect, measured_flops, ml_cost, ml_detect,
    mmse_detect, select_maps, Detector,
};
use mbm_core::rng::frame_stream;
use mbm_core::sim::snr_to_sigma2;
use mbm_core::{ChannelSet, Constellation, MbmConfig, MbmSymbol};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

struct Instance {
    h: ChannelSet,
    y: Vec<Complex64>,
    sent: Vec<MbmSymbol>,
}

fn random_symbols<R: Rng>(rng: &mut R, cfg: &MbmConfig) -> Vec<MbmSymbol> {
    (0..cfg.users())
        .map(|_| {
            MbmSymbol::new(
                rng.random_range(0..cfg.maps()),
                rng.random_range(0..cfg.constellation().len()),
            )
        })
        .collect()
}

fn instance(cfg: &MbmConfig, seed: u64, frame: u64, sigma2: f64) -> Instance {
    let mut rng = frame_stream(seed, frame);
    let h = generate_channel(&mut rng, cfg).unwrap();
    let sent = random_symbols(&mut rng, cfg);
    let y = transmit(&h, cfg, &sent, NoiseModel::new(sigma2).unwrap(), &mut rng).unwrap();
    Instance { h, y, sent }
}

/// Every joint symbol vector, user 0 as the most significant digit.
fn naive_ml(cfg: &MbmConfig, inst: &Instance) -> (Vec<MbmSymbol>, f64) {
    let alphabet: Vec<MbmSymbol> = (0..cfg.maps())
        .flat_map(|m| (0..cfg.constellation().len()).map(move |p| MbmSymbol::new(m, p)))
        .collect();
    let users = cfg.users();
    let total = alphabet.len().pow(users as u32);
    let mut best = (Vec::new(), f64::INFINITY);
    for code in 0..total {
        let mut c = code;
        let mut x = vec![MbmSymbol::Zero; users];
        for k in (0..users).rev() {
            x[k] = alphabet[c % alphabet.len()];
            c /= alphabet.len();
        }
        let mut r = inst.y.clone();
        for (k, s) in x.iter().enumerate() {
            let MbmSymbol::Active {
                map_index,
                point_index,
            } = *s
            else {
                unreachable!()
            };
            let q = cfg.constellation().point(point_index);
            for (i, ri) in r.iter_mut().enumerate() {
                *ri -= inst.h.user(k).entry(i, map_index) * q;
            }
        }
        let cost: f64 = r.iter().map(|v| v.norm_sqr()).sum();
        if cost < best.1 {
            best = (x, cost);
        }
    }
    best
}

#[test]
fn ml_matches_naive_enumeration() {
    let cfg = MbmConfig::new(6, 2, 2, Constellation::qam4()).unwrap();
    for frame in 0..150 {
        let inst = instance(&cfg, 11, frame, snr_to_sigma2(4.0, &cfg));
        let (x, cost) = naive_ml(&cfg, &inst);
        let out = ml_detect(&inst.y, &inst.h, &cfg).unwrap();
        assert_eq!(out.estimates, x, "frame {frame}");
        assert!((out.residual_norm_sqr - cost).abs() <= 1e-9 * cost.max(1.0));
    }
}

#[test]
fn every_detector_costs_at_least_ml() {
    let cfg = MbmConfig::new(8, 2, 2, Constellation::qam4()).unwrap();
    let dets = [
        Detector::mmse(),
        Detector::isd(6),
        Detector::iic(6),
        Detector::map_isd(6),
        Detector::kmap_iic(6, 2),
    ];
    for frame in 0..100 {
        let sigma2 = snr_to_sigma2(2.0, &cfg);
        let inst = instance(&cfg, 12, frame, sigma2);
        let ml = ml_detect(&inst.y, &inst.h, &cfg).unwrap();
        for d in &dets {
            let out = d
                .detect(&inst.y, &inst.h, &cfg, sigma2, &mut FlopCounter::enabled())
                .unwrap();
            let c = ml_cost(&inst.y, &inst.h, &cfg, &out.estimates);
            assert!(
                c >= ml.residual_norm_sqr * (1.0 - 1e-12),
                "{d} frame {frame}"
            );
        }
    }
}

#[test]
fn kmap_with_all_patterns_is_iic() {
    let cfg = MbmConfig::new(24, 3, 2, Constellation::qam16()).unwrap();
    for frame in 0..200 {
        let inst = instance(
            &cfg,
            13,
            frame,
            snr_to_sigma2((frame % 4) as f64 * 4.0, &cfg),
        );
        let iic = iic_detect(&inst.y, &inst.h, &cfg).unwrap();
        let kmap =
            kmap_iic_detect(&inst.y, &inst.h, &cfg.clone().with_list_size(4).unwrap()).unwrap();
        assert_eq!(kmap.estimates, iic.estimates, "frame {frame}");
        assert_eq!(kmap.residual_trace, iic.residual_trace, "frame {frame}");
    }
}

#[test]
fn residual_matches_recomputation_and_never_grows() {
    let cfg = MbmConfig::new(16, 4, 3, Constellation::qam4()).unwrap();
    for frame in 0..200 {
        let inst = instance(&cfg, 14, frame, snr_to_sigma2(3.0, &cfg));
        let kmap_cfg = cfg.clone().with_list_size(2).unwrap();
        let outs = [
            iic_detect(&inst.y, &inst.h, &cfg).unwrap(),
            map_isd_detect(&inst.y, &inst.h, &cfg).unwrap(),
            kmap_iic_detect(&inst.y, &inst.h, &kmap_cfg).unwrap(),
        ];
        let y_norm: f64 = inst.y.iter().map(|v| v.norm_sqr()).sum();
        for out in &outs {
            let direct = ml_cost(&inst.y, &inst.h, &cfg, &out.estimates);
            assert!((direct - out.residual_norm_sqr).abs() <= 1e-9 * y_norm);
            assert!(out.residual_trace[0] <= y_norm * (1.0 + 1e-12));
            for w in out.residual_trace.windows(2) {
                assert!(w[1] <= w[0], "{:?}", out.residual_trace);
            }
            assert!(out.estimates.iter().all(|s| !s.is_zero()));
        }
    }
}

#[test]
fn noiseless_desk_scale_recovery() {
    let cfg = MbmConfig::new(64, 4, 2, Constellation::qam4()).unwrap();
    let kmap_cfg = cfg.clone().with_list_size(2).unwrap();
    for frame in 0..300 {
        let inst = instance(&cfg, 15, frame, 0.0);
        assert_eq!(
            iic_detect(&inst.y, &inst.h, &cfg).unwrap().estimates,
            inst.sent,
            "iic {frame}"
        );
        assert_eq!(
            kmap_iic_detect(&inst.y, &inst.h, &kmap_cfg)
                .unwrap()
                .estimates,
            inst.sent,
            "kmap {frame}"
        );
    }
    let small = MbmConfig::new(8, 2, 2, Constellation::qam4()).unwrap();
    for frame in 0..100 {
        let inst = instance(&small, 15, frame, 0.0);
        let out = ml_detect(&inst.y, &inst.h, &small).unwrap();
        assert_eq!(out.estimates, inst.sent);
        assert!(out.residual_norm_sqr < 1e-20);
    }
}

/// Columns of a unitary DFT matrix scaled by `sqrt(n)`, handed out to users in turn.
fn orthogonal_channel(n_r: usize, users: usize, maps: usize) -> ChannelSet {
    let per_user = (0..users)
        .map(|k| {
            (0..maps)
                .flat_map(|m| {
                    let c = k * maps + m;
                    (0..n_r).map(move |i| {
                        Complex64::from_polar(
                            1.0,
                            2.0 * std::f64::consts::PI * (i * c) as f64 / n_r as f64,
                        )
                    })
                })
                .collect()
        })
        .collect();
    ChannelSet::from_columns(n_r, per_user).unwrap()
}

#[test]
fn orthogonal_channel_is_solved_in_one_sweep() {
    let cfg = MbmConfig::new(16, 3, 2, Constellation::qam16()).unwrap();
    let h = orthogonal_channel(16, 3, 4);
    let mut rng = frame_stream(16, 0);
    for _ in 0..50 {
        let sent = random_symbols(&mut rng, &cfg);
        let y = transmit(&h, &cfg, &sent, NoiseModel::noiseless(), &mut rng).unwrap();
        let isd = isd_detect(&y, &h, &cfg.clone().with_iterations(1).unwrap()).unwrap();
        assert_eq!(isd.estimates, sent);
        let map_isd = map_isd_detect(&y, &h, &cfg).unwrap();
        assert_eq!(map_isd.estimates, sent);
        assert!(map_isd.iterations_used <= 2);
        // A second ISD sweep from the exact solution changes nothing.
        let isd6 = isd_detect(&y, &h, &cfg).unwrap();
        assert_eq!(isd6.estimates, sent);
        assert!(isd6.residual_trace.iter().all(|&r| r < 1e-18));
        assert_eq!(mmse_detect(&y, &h, &cfg, 1e-3).unwrap().estimates, sent);
    }
}

#[test]
fn favorable_pattern_is_found_with_many_antennas() {
    let cfg = MbmConfig::new(512, 8, 3, Constellation::qam4()).unwrap();
    let sigma2 = snr_to_sigma2(10.0, &cfg);
    let (mut hits, mut total) = (0, 0);
    for frame in 0..40 {
        let inst = instance(&cfg, 17, frame, sigma2);
        for j in 0..cfg.users() {
            let set =
                select_maps(&inst.y, inst.h.user(j), j, 1, &mut FlopCounter::disabled()).unwrap();
            total += 1;
            hits += usize::from(Some(set.map_indices[0]) == inst.sent[j].map_index());
        }
    }
    assert!(hits as f64 > 0.99 * total as f64, "{hits}/{total}");
}

#[test]
fn detectors_are_pure_and_deterministic() {
    let cfg = MbmConfig::new(32, 4, 2, Constellation::qam4()).unwrap();
    let sigma2 = snr_to_sigma2(3.0, &cfg);
    let inst = instance(&cfg, 18, 0, sigma2);
    let y0 = inst.y.clone();
    let bytes = inst.h.to_bytes();
    for d in [
        Detector::mmse(),
        Detector::isd(6),
        Detector::iic(6),
        Detector::map_isd(6),
        Detector::kmap_iic(6, 2),
    ] {
        let a = d
            .detect(&inst.y, &inst.h, &cfg, sigma2, &mut FlopCounter::enabled())
            .unwrap();
        let b = d
            .detect(&inst.y, &inst.h, &cfg, sigma2, &mut FlopCounter::enabled())
            .unwrap();
        assert_eq!(a, b);
        assert!(measured_flops(&a).unwrap() > 0);
        let c = d
            .detect(&inst.y, &inst.h, &cfg, sigma2, &mut FlopCounter::disabled())
            .unwrap();
        assert_eq!(c.estimates, a.estimates);
        assert!(measured_flops(&c).is_err());
    }
    assert_eq!(inst.y, y0);
    assert_eq!(inst.h.to_bytes(), bytes);
}

#[test]
fn iic_tally_is_linear_in_iterations() {
    // Noise large enough that the estimate keeps moving for 4 iterations.
    let cfg = MbmConfig::new(16, 4, 2, Constellation::qam4()).unwrap();
    let mut checked = 0;
    for frame in 0..200 {
        let inst = instance(&cfg, 19, frame, snr_to_sigma2(-6.0, &cfg));
        let runs: Vec<_> = (1..=4)
            .map(|l| {
                iic_detect(&inst.y, &inst.h, &cfg.clone().with_iterations(l).unwrap()).unwrap()
            })
            .collect();
        if runs[3].iterations_used < 4 {
            continue;
        }
        let f: Vec<i64> = runs.iter().map(|o| o.flops.unwrap() as i64).collect();
        let deltas = [f[1] - f[0], f[2] - f[1], f[3] - f[2]];
        let mean = deltas.iter().sum::<i64>() as f64 / 3.0;
        // Only the greedy stage varies between iterations.
        assert!(
            deltas
                .iter()
                .all(|&d| (d as f64 - mean).abs() <= 0.1 * mean),
            "{f:?}"
        );
        assert!(f[0] > 0 && mean > 0.0);
        checked += 1;
    }
    assert!(checked > 5, "only {checked} instances ran 4 iterations");
}

#[test]
fn ml_refuses_large_search_spaces() {
    let cfg = MbmConfig::new(128, 20, 3, Constellation::qam4()).unwrap();
    let inst = instance(&cfg, 20, 0, 1.0);
    assert!(ml_detect(&inst.y, &inst.h, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Scaling y and H by a common unit-modulus factor leaves decisions unchanged.
    #[test]
    fn phase_rotation_invariance(seed in any::<u64>(), phase in 0.0f64..std::f64::consts::TAU) {
        let cfg = MbmConfig::new(24, 3, 2, Constellation::qam4()).unwrap();
        let inst = instance(&cfg, seed, 0, snr_to_sigma2(4.0, &cfg));
        let rot = Complex64::from_polar(1.0, phase);
        let per_user: Vec<Vec<Complex64>> = (0..3)
            .map(|k| (0..4).flat_map(|m| inst.h.user(k).column(m).iter().map(|&v| v * rot).collect::<Vec<_>>()).collect())
            .collect();
        let h2 = ChannelSet::from_columns(24, per_user).unwrap();
        let y2: Vec<Complex64> = inst.y.iter().map(|&v| v * rot).collect();
        let a = iic_detect(&inst.y, &inst.h, &cfg).unwrap();
        let b = iic_detect(&y2, &h2, &cfg).unwrap();
        prop_assert_eq!(a.estimates, b.estimates);
        let a = map_isd_detect(&inst.y, &inst.h, &cfg).unwrap();
        let b = map_isd_detect(&y2, &h2, &cfg).unwrap();
        prop_assert_eq!(a.estimates, b.estimates);
    }

    // The received vector is linear in the transmitted symbols.
    #[test]
    fn superposition_is_linear(seed in any::<u64>()) {
        let cfg = MbmConfig::new(12, 3, 2, Constellation::qam16()).unwrap();
        let mut rng = frame_stream(seed, 1);
        let h = generate_channel(&mut rng, &cfg).unwrap();
        let x = random_symbols(&mut rng, &cfg);
        let full = h.superpose(&cfg, &x);
        let mut sum = vec![Complex64::new(0.0, 0.0); 12];
        for k in 0..3 {
            let mut only = vec![MbmSymbol::Zero; 3];
            only[k] = x[k];
            for (s, v) in sum.iter_mut().zip(h.superpose(&cfg, &only)) {
                *s += v;
            }
        }
        for (a, b) in full.iter().zip(&sum) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
