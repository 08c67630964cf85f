//! CSV and JSON persistence.
//!
//! Every CSV starts with a `# schema=vN` comment line followed by a header
//! row. Readers reject files whose schema line does not match.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frozen::{FrozenRunConfig, FrozenSummary, SweepCell, SweepResult};
use crate::lattice::SeriesRecord;
use crate::macro_model::MixtureDensity;
use crate::stats::DensityEstimate;

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_line() -> String {
    format!("# schema=v{SCHEMA_VERSION}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub side: usize,
    pub h: f64,
    pub sigma: f64,
    pub sigma_stderr: f64,
    pub mean_lb: f64,
    pub kurtosis: f64,
    pub ac1: f64,
    pub seed: u64,
    pub steps: usize,
}

impl From<&FrozenSummary> for SweepRow {
    fn from(s: &FrozenSummary) -> Self {
        SweepRow {
            side: s.side,
            h: s.h0,
            sigma: s.sigma,
            sigma_stderr: s.sigma_stderr,
            mean_lb: s.mean_lb,
            kurtosis: s.kurtosis,
            ac1: s.ac1,
            seed: s.seed,
            steps: s.steps,
        }
    }
}

impl SweepRow {
    /// Summary with the fields the CSV does not carry set to neutral values
    /// (mean m = 0, not saturated).
    pub fn to_summary(&self) -> FrozenSummary {
        FrozenSummary {
            side: self.side,
            h0: self.h,
            seed: self.seed,
            steps: self.steps,
            sigma: self.sigma,
            sigma_stderr: self.sigma_stderr,
            mean_m: 0.0,
            mean_lb: self.mean_lb,
            kurtosis: self.kurtosis,
            ac1: self.ac1,
            saturated: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub density: f64,
    pub count: Option<u64>,
}

pub fn density_rows(est: &DensityEstimate) -> Vec<DensityRow> {
    est.edges
        .windows(2)
        .zip(est.density.iter().zip(&est.counts))
        .map(|(w, (&density, &count))| DensityRow { bin_lo: w[0], bin_hi: w[1], density, count: Some(count) })
        .collect()
}

pub fn mixture_rows(md: &MixtureDensity) -> Vec<DensityRow> {
    md.edges
        .windows(2)
        .zip(&md.density)
        .map(|(w, &density)| DensityRow { bin_lo: w[0], bin_hi: w[1], density, count: None })
        .collect()
}

/// Writes the schema line, a header and one row per item.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut writer = writer;
    writeln!(writer, "{}", schema_line())?;
    let mut csv = csv::Writer::from_writer(writer);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: DeserializeOwned>(reader: R) -> Result<Vec<T>> {
    let mut reader = BufReader::new(reader);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != schema_line() {
        return Err(Error::Parse(format!(
            "expected '{}' as the first line, found '{}'",
            schema_line(),
            first.trim_end()
        )));
    }
    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    csv.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(BufWriter::new(file), rows)
}

pub fn read_csv_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(file).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Columns t, m, dm, lb, h_smoothed; lb is empty for macroscopic runs.
pub fn write_timeseries(path: &Path, records: &[SeriesRecord]) -> Result<()> {
    write_csv_file(path, records)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<SeriesRecord>> {
    read_csv_file(path)
}

/// Completed cells only; failures are listed in the JSON summary.
pub fn write_sweep(path: &Path, result: &SweepResult) -> Result<()> {
    let rows: Vec<SweepRow> = result.summaries().map(SweepRow::from).collect();
    write_csv_file(path, &rows)
}

/// Rebuilds a sweep from CSV rows. Protocol metadata not stored in the CSV
/// comes from `template`.
pub fn read_sweep(path: &Path, template: &FrozenRunConfig) -> Result<SweepResult> {
    let rows: Vec<SweepRow> = read_csv_file(path)?;
    let cells = rows
        .iter()
        .map(|r| SweepCell { side: r.side, h: r.h, seed: r.seed, summary: Some(r.to_summary()), error: None })
        .collect();
    Ok(SweepResult::assemble(template, cells))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timeseries_round_trip_is_exact() {
        let records = vec![
            SeriesRecord { t: 1, m: 0.1 + 0.2, dm: -1.0 / 3.0, lb: Some(256), h_smoothed: 2.0 / 7.0 },
            SeriesRecord { t: 2, m: -1e-300, dm: 5e-17, lb: None, h_smoothed: -0.0 },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# schema=v1\nt,m,dm,lb,h_smoothed\n"));
        let back: Vec<SeriesRecord> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn missing_schema_line_is_rejected() {
        let text = "t,m,dm,lb,h_smoothed\n1,0,0,,0\n";
        assert!(matches!(read_csv::<_, SeriesRecord>(text.as_bytes()), Err(Error::Parse(_))));
        let text = "# schema=v2\nt,m,dm,lb,h_smoothed\n";
        assert!(read_csv::<_, SeriesRecord>(text.as_bytes()).is_err());
    }

    #[test]
    fn sweep_and_density_headers() {
        let mut buf = Vec::new();
        let row = SweepRow {
            side: 64,
            h: 1.5,
            sigma: 1e-3,
            sigma_stderr: 1e-5,
            mean_lb: 150.0,
            kurtosis: 3.0,
            ac1: 0.0,
            seed: 9,
            steps: 10_000,
        };
        write_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().nth(1), Some("L,h,sigma,sigma_stderr,mean_lb,kurtosis,ac1,seed,steps"));
        assert_eq!(read_csv::<_, SweepRow>(buf.as_slice()).unwrap(), vec![row]);

        let est = crate::stats::density(&[1.0, 2.0, 3.0], &crate::stats::Binning::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &density_rows(&est)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("bin_lo,bin_hi,density,count"));
    }
}
