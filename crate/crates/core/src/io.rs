//! File formats: 16-bit PCM mono WAV, one-sample-per-line CSV signals, and
//! feature tables with a `phi_1..phi_d` header.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::ar::Signal;
use crate::error::{Error, Result};
use crate::synth::PCM_SCALE;

pub fn write_wav(path: &Path, signal: &Signal) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in &signal.samples {
        writer.write_sample((s.clamp(-1.0, 1.0) * PCM_SCALE).round() as i16)?;
    }
    writer.finalize()?;
    Ok(())
}

pub fn read_wav(path: &Path) -> Result<Signal> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
    {
        return Err(Error::Format(format!(
            "{}: expected 16-bit PCM mono, found {} channel(s) at {} bits",
            path.display(),
            spec.channels,
            spec.bits_per_sample
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / PCM_SCALE))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Signal::new(spec.sample_rate, samples)
}

/// One sample per line; blank lines are skipped.
pub fn read_csv_signal(path: &Path, sample_rate_hz: u32) -> Result<Signal> {
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        let v: f64 = field.parse().map_err(|_| {
            Error::Format(format!(
                "{}:{}: not a number: {field:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        samples.push(v);
    }
    Signal::new(sample_rate_hz, samples)
}

/// Loads a signal by extension: `.wav` or anything else as CSV.
pub fn read_signal(path: &Path, csv_sample_rate_hz: u32) -> Result<Signal> {
    let is_wav = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("wav"))
        .unwrap_or(false);
    if is_wav {
        read_wav(path)
    } else {
        read_csv_signal(path, csv_sample_rate_hz)
    }
}

pub fn feature_header(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("phi_{i}")).collect()
}

pub fn write_features<W: Write>(out: W, rows: &[Vec<f64>]) -> Result<()> {
    let d = rows.first().map(Vec::len).unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(feature_header(d))?;
    for row in rows {
        if row.len() != d {
            return Err(Error::invalid("ragged feature table"));
        }
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let d = header.len();
    if header
        .iter()
        .ne(feature_header(d).iter().map(String::as_str))
    {
        return Err(Error::Format(format!(
            "{}: feature header must be phi_1..phi_{d}",
            path.display()
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            rec.iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad feature value {f:?}")))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wav_round_trip_on_pcm_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let samples: Vec<f64> = (-50..50).map(|i| f64::from(i * 300) / PCM_SCALE).collect();
        let sig = Signal::new(16_000, samples).unwrap();
        write_wav(&path, &sig).unwrap();
        assert_eq!(read_wav(&path).unwrap(), sig);
        assert_eq!(read_signal(&path, 1).unwrap(), sig);
    }

    #[test]
    fn csv_signal_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "0.5\n-0.25\n\n1e-3\n").unwrap();
        let sig = read_csv_signal(&path, 8000).unwrap();
        assert_eq!(sig.samples, vec![0.5, -0.25, 0.001]);
        assert_eq!(sig.sample_rate_hz, 8000);
        std::fs::write(&path, "0.5\nabc\n").unwrap();
        assert!(matches!(
            read_csv_signal(&path, 8000),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn feature_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let rows = vec![vec![0.1, -0.2, 1.0 / 3.0], vec![2.0, 0.0, -7.5e-9]];
        write_features(File::create(&path).unwrap(), &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("phi_1,phi_2,phi_3\n"));
        assert_eq!(read_features(&path).unwrap(), rows);
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_features(&path).is_err());
    }
}
