use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::{SnrSample, SnrSeries};

pub const TRACE_HEADER: [&str; 2] = ["time_s", "snr_db"];

/// Reads a `time_s,snr_db` trace file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<SnrSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path)
}

/// Parses a trace from any reader; `path` only labels error messages.
pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<SnrSeries> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.is_empty() {
        return Err(Error::EmptySeries);
    }
    if header.iter().ne(TRACE_HEADER) {
        return Err(parse_err(
            1,
            format!("expected header 'time_s,snr_db', found '{}'", header.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut series = SnrSeries::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", record.len())));
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("{name} '{}': {e}", &record[i])))
        };
        let sample = SnrSample::new(field(0, "time_s")?, field(1, "snr_db")?);
        series.push(sample).map_err(|e| match e {
            Error::Ordering { .. } => e,
            other => parse_err(line, other.to_string()),
        })?;
    }
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series)
}

/// Writes `series` as a `time_s,snr_db` file. Values use the shortest
/// representation that parses back to the same number.
pub fn write_csv(path: impl AsRef<Path>, series: &SnrSeries) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_series(file, series).map_err(|e| Error::io(path, e))
}

pub fn write_series<W: Write>(writer: W, series: &SnrSeries) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TRACE_HEADER)?;
    for s in series.iter() {
        wtr.write_record([s.time.to_string(), s.snr_db.to_string()])?;
    }
    wtr.flush()
}
