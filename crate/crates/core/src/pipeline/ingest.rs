use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::smoothing::{TimeSeries, MIN_OBSERVATIONS};

/// Reads one observation per row. A non-numeric first row is taken as a
/// header. With several columns the last one holds the values and the others
/// (e.g. a time stamp) are ignored: design points are always `i/n`.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_series(file)
}

pub fn parse_series<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(row + 1, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        let Some(field) = record.iter().last() else { continue };
        if field.is_empty() && record.len() == 1 {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(Error::Parse { line, msg: format!("non-finite value '{field}'") }),
            Err(_) if row == 0 => {}
            Err(_) => return Err(Error::Parse { line, msg: format!("not a number: '{field}'") }),
        }
    }
    if values.len() < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations { got: values.len(), need: MIN_OBSERVATIONS });
    }
    TimeSeries::new(values)
}
