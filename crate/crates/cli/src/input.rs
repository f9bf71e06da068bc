//! CSV readers. Row numbers in errors count data rows from 1, so the header
//! line is not counted.

use std::fs::File;
use std::io::Read;

use parastat::debt::DebtRecord;
use parastat::Error;

use crate::error::CliError;

fn open(path: &str) -> Result<csv::Reader<File>, CliError> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(f))
}

fn column<R: Read>(r: &mut csv::Reader<R>, name: &str) -> Result<Option<usize>, CliError> {
    let headers = r.headers().map_err(|e| Error::MalformedInput { row: 0, message: e.to_string() })?;
    Ok(headers.iter().position(|h| h.eq_ignore_ascii_case(name)))
}

fn required<R: Read>(r: &mut csv::Reader<R>, name: &str) -> Result<usize, CliError> {
    column(r, name)?.ok_or_else(|| Error::InsufficientData(format!("missing column `{name}`")).into())
}

fn field(rec: &csv::StringRecord, idx: usize, name: &str, row: usize) -> Result<f64, CliError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::MalformedInput { row, message: format!("{name}: cannot parse `{raw}` as a number") }.into())
}

fn records<R: Read>(r: &mut csv::Reader<R>) -> impl Iterator<Item = (usize, Result<csv::StringRecord, CliError>)> + '_ {
    r.records().enumerate().map(|(i, rec)| {
        (i + 1, rec.map_err(|e| Error::MalformedInput { row: i + 1, message: e.to_string() }.into()))
    })
}

/// Columns `size`, `duration` and optionally `timestamp` (days).
pub fn read_debts(path: &str) -> Result<Vec<DebtRecord>, CliError> {
    let mut r = open(path)?;
    let size = required(&mut r, "size")?;
    let duration = required(&mut r, "duration")?;
    let stamp = column(&mut r, "timestamp")?;
    let mut out = Vec::new();
    for (row, rec) in records(&mut r) {
        let rec = rec?;
        let timestamp = match stamp {
            Some(i) if !rec.get(i).unwrap_or("").is_empty() => Some(field(&rec, i, "timestamp", row)?),
            _ => None,
        };
        out.push(DebtRecord {
            size: field(&rec, size, "size", row)?,
            duration: field(&rec, duration, "duration", row)?,
            timestamp,
        });
    }
    Ok(out)
}

/// Column `value`, with an optional strictly increasing integer column `t`.
pub fn read_series(path: &str) -> Result<Vec<f64>, CliError> {
    let mut r = open(path)?;
    let value = required(&mut r, "value")?;
    let t = column(&mut r, "t")?;
    let mut out = Vec::new();
    let mut last: Option<f64> = None;
    for (row, rec) in records(&mut r) {
        let rec = rec?;
        if let Some(ti) = t {
            let tv = field(&rec, ti, "t", row)?;
            if tv.fract() != 0.0 || last.is_some_and(|l| tv <= l) {
                return Err(Error::MalformedInput { row, message: format!("t = {tv} is not a strictly increasing integer") }.into());
            }
            last = Some(tv);
        }
        out.push(field(&rec, value, "value", row)?);
    }
    Ok(out)
}
