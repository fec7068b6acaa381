//! Plain-text summary: FLOP savings against IIC and SNR gaps at target BERs.

use std::collections::BTreeMap;
use std::fmt::Write;

use mbm_core::complexity::savings;
use mbm_core::sim::{snr_gap_at_ber, BerRecord};

pub const DEFAULT_TARGETS: [f64; 2] = [1e-3, 1e-4];

fn split_label(label: &str) -> (&str, &str) {
    match label.split_once(':') {
        Some((tag, det)) => (tag, det),
        None => ("", label),
    }
}

fn is_iic(det: &str) -> bool {
    det.starts_with("iic/")
}

/// Per-detector curves of one system, in first-seen order.
type Curves = Vec<(String, Vec<BerRecord>)>;

/// Records grouped by system tag, then detector label, in first-seen order.
fn group(records: &[BerRecord]) -> Vec<(String, Curves)> {
    let mut systems: Vec<(String, Curves)> = Vec::new();
    for r in records {
        let (tag, det) = split_label(&r.detector);
        let sys = match systems.iter().position(|(t, _)| t == tag) {
            Some(i) => &mut systems[i].1,
            None => {
                systems.push((tag.to_string(), Vec::new()));
                &mut systems.last_mut().unwrap().1
            }
        };
        match sys.iter_mut().find(|(d, _)| d == det) {
            Some((_, v)) => v.push(r.clone()),
            None => sys.push((det.to_string(), vec![r.clone()])),
        }
    }
    systems
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

pub fn report_summary(records: &[BerRecord], targets: &[f64]) -> String {
    let mut out = String::new();
    for (tag, curves) in group(records) {
        let title = if tag.is_empty() {
            "results"
        } else {
            tag.as_str()
        };
        let _ = writeln!(out, "== {title}");
        let Some((iic_label, iic)) = curves.iter().find(|(d, _)| is_iic(d)) else {
            let _ = writeln!(out, "  no IIC baseline: savings and gaps skipped");
            continue;
        };

        let _ = writeln!(out, "  FLOP savings vs {iic_label} (measured / model):");
        let by_snr: BTreeMap<u64, &BerRecord> =
            iic.iter().map(|r| (r.snr_db.to_bits(), r)).collect();
        for (det, recs) in curves.iter().filter(|(d, _)| !is_iic(d)) {
            for r in recs {
                let Some(base) = by_snr.get(&r.snr_db.to_bits()) else {
                    continue;
                };
                let measured = savings(r.mean_measured_flops, base.mean_measured_flops);
                let model = match (r.flops_model, base.flops_model) {
                    (Some(a), Some(b)) => pct(savings(a, b)),
                    _ => "n/a".into(),
                };
                let _ = writeln!(
                    out,
                    "    {det:<18} {:>6.2} dB  {:>7} / {model}",
                    r.snr_db,
                    pct(measured)
                );
            }
        }

        if curves.len() < 2 {
            let _ = writeln!(out, "  single detector: gap section skipped");
            continue;
        }
        if iic.len() < 2 {
            let _ = writeln!(out, "  single SNR point: gap section skipped");
            continue;
        }
        let _ = writeln!(out, "  SNR gap to {iic_label}:");
        for &target in targets {
            for (det, recs) in curves.iter().filter(|(d, _)| !is_iic(d)) {
                let gap = match snr_gap_at_ber(recs, iic, target) {
                    Ok(g) => format!("{g:+.2} dB"),
                    Err(_) => "n/a (target outside a curve)".into(),
                };
                let _ = writeln!(out, "    BER {target:.0e}  {det:<18} {gap}");
            }
        }
    }
    out
}
