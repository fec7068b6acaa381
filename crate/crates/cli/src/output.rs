//! CSV results. Reals are written as `{:.16e}` (17 significant digits), so
//! reading a file back reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use mbm_core::sim::BerRecord;
use serde::Deserialize;

use crate::error::CliError;

pub const HEADER: [&str; 11] = [
    "detector",
    "snr_db",
    "frames",
    "bits_sent",
    "bit_errors",
    "ber",
    "ver",
    "mean_flops_measured",
    "flops_model",
    "mean_iters",
    "stderr_ber",
];

/// One CSV row; `flops_model` is empty for detectors without a closed form.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub detector: String,
    pub snr_db: f64,
    pub frames: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ver: f64,
    pub mean_flops_measured: f64,
    pub flops_model: Option<f64>,
    pub mean_iters: f64,
    pub stderr_ber: f64,
}

impl From<&BerRecord> for CsvRow {
    fn from(r: &BerRecord) -> Self {
        Self {
            detector: r.detector.clone(),
            snr_db: r.snr_db,
            frames: r.frames,
            bits_sent: r.bits_sent,
            bit_errors: r.bit_errors,
            ber: r.ber,
            ver: r.ver,
            mean_flops_measured: r.mean_measured_flops,
            flops_model: r.flops_model,
            mean_iters: r.mean_iterations,
            stderr_ber: r.stderr_ber(),
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

impl CsvRow {
    fn fields(&self) -> [String; 11] {
        [
            self.detector.clone(),
            real(self.snr_db),
            self.frames.to_string(),
            self.bits_sent.to_string(),
            self.bit_errors.to_string(),
            real(self.ber),
            real(self.ver),
            real(self.mean_flops_measured),
            self.flops_model.map(real).unwrap_or_default(),
            real(self.mean_iters),
            real(self.stderr_ber),
        ]
    }
}

pub fn write_csv<W: Write>(records: &[BerRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(CsvRow::from(r).fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(records: &[BerRecord], path: &Path) -> Result<(), CliError> {
    if records.is_empty() {
        return Err(CliError::CsvFormat("no records to write".into()));
    }
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut buf = BufWriter::new(file);
    write_csv(records, &mut buf)?;
    buf.flush().map_err(io_err)
}

/// Parses a file produced by [`write_csv`]; the header must match exactly.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(CliError::CsvFormat(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(detector: &str, snr_db: f64, flops_model: Option<f64>) -> BerRecord {
        BerRecord {
            detector: detector.into(),
            snr_db,
            frames: 1234,
            bits_sent: 123_400,
            bit_errors: 211,
            vector_errors: 90,
            symbols_sent: 24_680,
            ber: 211.0 / 123_400.0,
            ver: 90.0 / 24_680.0,
            mean_measured_flops: 1.0 / 3.0 * 1e6,
            flops_model,
            mean_iterations: std::f64::consts::E,
            redraws: 0,
        }
    }

    #[test]
    fn header_and_row_layout() {
        let recs = [
            record("iic/L6", 0.1, Some(2.5e5)),
            record("mmse", 0.1, None),
        ];
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], HEADER.join(","));
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("iic/L6,1.0000000000000001e-1,1234,123400,211,"));
        assert!(lines[2].contains(",,"), "{}", lines[2]);
    }

    #[test]
    fn round_trip_is_exact() {
        let recs = [
            record("kmap-iic/K4/L6", -3.25, Some(1.0 / 7.0)),
            record("ml", 12.0, None),
        ];
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let rows = read_csv(buf.as_slice()).unwrap();
        let expect: Vec<CsvRow> = recs.iter().map(CsvRow::from).collect();
        assert_eq!(rows, expect);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let bad = format!("{}\nx,1,notanumber,1,1,1,1,1,,1,1\n", HEADER.join(","));
        assert!(read_csv(bad.as_bytes()).is_err());
    }
}
