//! Sample CSV, event JSON Lines and ground-truth JSON.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use faultsense::engine::EventRecord;
use faultsense::sim::GroundTruth;
use faultsense::RawSample;

use crate::error::CliError;

pub const CSV_HEADER: [&str; 2] = ["t", "value"];

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_err(path, e))
}

/// Writes samples as `t,value`. Rust's float `Display` is the shortest
/// decimal that parses back to the same bits.
pub fn write_samples<W: Write>(
    out: W,
    samples: impl IntoIterator<Item = RawSample>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in samples {
        w.write_record([s.t.to_string(), s.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One data row of a sample file.
#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Sample(RawSample),
    /// 1-based data row number and a reason.
    Malformed(u64, String),
}

/// Streaming reader over a sample CSV.
pub struct SampleReader<R: Read> {
    records: csv::StringRecordsIntoIter<R>,
    row: u64,
}

impl<R: Read> SampleReader<R> {
    /// Checks the header. An empty input yields no rows.
    pub fn new(input: R) -> Result<Self, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(input);
        let header = rdr
            .headers()
            .map_err(|e| CliError::Corrupt(format!("unreadable header: {e}")))?;
        let trimmed: Vec<&str> = header.iter().map(str::trim).collect();
        if !header.is_empty() && trimmed != CSV_HEADER {
            return Err(CliError::Corrupt(format!(
                "expected header 't,value', found '{}'",
                trimmed.join(",")
            )));
        }
        Ok(Self {
            records: rdr.into_records(),
            row: 0,
        })
    }
}

fn parse_row(rec: &csv::StringRecord) -> Result<RawSample, String> {
    if rec.len() != 2 {
        return Err(format!("expected 2 fields, found {}", rec.len()));
    }
    let t = rec[0]
        .trim()
        .parse::<u64>()
        .map_err(|_| format!("bad index '{}'", &rec[0]))?;
    let value = rec[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad value '{}'", &rec[1]))?;
    if !value.is_finite() {
        return Err(format!("non-finite value '{}'", &rec[1]));
    }
    Ok(RawSample::new(t, value))
}

impl<R: Read> Iterator for SampleReader<R> {
    type Item = Row;

    fn next(&mut self) -> Option<Row> {
        let rec = self.records.next()?;
        self.row += 1;
        Some(match rec {
            Ok(rec) => match parse_row(&rec) {
                Ok(s) => Row::Sample(s),
                Err(reason) => Row::Malformed(self.row, reason),
            },
            Err(e) => Row::Malformed(self.row, e.to_string()),
        })
    }
}

/// Reads a whole sample file, failing on the first malformed row.
pub fn read_samples(path: &Path) -> Result<Vec<RawSample>, CliError> {
    SampleReader::new(open(path)?)?
        .map(|row| match row {
            Row::Sample(s) => Ok(s),
            Row::Malformed(n, why) => Err(CliError::Corrupt(format!("row {n}: {why}"))),
        })
        .collect()
}

pub fn write_event<W: Write>(out: &mut W, e: &EventRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, e)?;
    out.write_all(b"\n")
}

pub fn read_events(path: &Path) -> Result<Vec<EventRecord>, CliError> {
    let mut events = Vec::new();
    for (no, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|e| {
            CliError::Config(format!("{} line {}: {e}", path.display(), no + 1))
        })?;
        events.push(e);
    }
    Ok(events)
}

pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, truth).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_truth(path: &Path) -> Result<GroundTruth, CliError> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
