//! CSV with a `#`-prefixed JSON header line, and an optional JSON-lines
//! mirror of the same records.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;

pub struct RecordWriter {
    csv: csv::Writer<BufWriter<File>>,
    jsonl: Option<BufWriter<File>>,
}

impl RecordWriter {
    pub fn create(csv_path: &Path, jsonl_path: Option<&Path>, header: &impl Serialize) -> CliResult<Self> {
        let mut file = BufWriter::new(File::create(csv_path)?);
        writeln!(file, "# {}", serde_json::to_string(header)?)?;
        let csv = csv::WriterBuilder::new().has_headers(true).from_writer(file);
        let jsonl = match jsonl_path {
            Some(p) => Some(BufWriter::new(File::create(p)?)),
            None => None,
        };
        Ok(Self { csv, jsonl })
    }

    pub fn write<R: Serialize>(&mut self, record: &R) -> CliResult<()> {
        self.csv.serialize(record)?;
        if let Some(j) = &mut self.jsonl {
            serde_json::to_writer(&mut *j, record)?;
            j.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> CliResult<()> {
        self.csv.flush()?;
        if let Some(j) = &mut self.jsonl {
            j.flush()?;
        }
        Ok(())
    }
}

/// Reads back a file written by [`RecordWriter`]: the header JSON and the
/// CSV records.
pub fn read_records(path: &Path) -> CliResult<(serde_json::Value, Vec<csv::StringRecord>, csv::StringRecord)> {
    let text = std::fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let header = serde_json::from_str(first.trim_start_matches('#').trim())?;
    let mut reader = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
    let columns = reader.headers()?.clone();
    let rows = reader.records().collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows, columns))
}
