//! CSV and JSON writers. CSV uses '.' decimals, shortest round-trip float
//! formatting, LF line endings and a mandatory header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
    width: usize,
}

impl CsvSink {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(dir.join(name))?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        writer.write_record(header)?;
        Ok(CsvSink {
            writer,
            width: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[Field]) -> Result<(), CliError> {
        debug_assert_eq!(fields.len(), self.width);
        self.writer.write_record(fields.iter().map(Field::render))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

/// One CSV cell.
pub enum Field<'a> {
    F(f64),
    I(i64),
    U(u64),
    S(&'a str),
    B(bool),
}

impl Field<'_> {
    fn render(&self) -> String {
        match self {
            Field::F(v) => fmt_f64(*v),
            Field::I(v) => v.to_string(),
            Field::U(v) => v.to_string(),
            Field::S(s) => s.to_string(),
            Field::B(b) => b.to_string(),
        }
    }
}

/// Shortest round-trip representation; non-finite values as nan/inf/-inf.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(path)
}
