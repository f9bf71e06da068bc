//! Report serialization.
//!
//! Every JSON report is an envelope `{schema_version, command, warnings,
//! result}`. Floats are written with 17 significant digits in exponent form
//! so that two runs can be compared byte for byte; NaN and infinities become
//! `null`.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1.0.0";

struct Fixed;

impl Formatter for Fixed {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, Fixed);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out.push(b'\n');
    out
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: &'static str,
    command: &'a str,
    warnings: &'a [String],
    result: &'a T,
}

pub fn envelope<T: Serialize>(command: &str, warnings: &[String], result: &T) -> Vec<u8> {
    to_json(&Envelope { schema_version: SCHEMA_VERSION, command, warnings, result })
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema_version: &'static str,
    error: &'a CliError,
}

pub fn error_report(e: &CliError) -> Vec<u8> {
    to_json(&ErrorReport { schema_version: SCHEMA_VERSION, error: e })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten_into(&join(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten_into(&join(&i.to_string()), x, out)),
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

/// Generic `field,value` table with dotted paths into the result.
pub fn flat_csv<T: Serialize>(result: &T) -> Result<Vec<u8>, CliError> {
    let v = serde_json::to_value(result).map_err(|e| CliError::usage(e.to_string()))?;
    let mut rows = Vec::new();
    flatten_into("", &v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "value"]).map_err(csv_err)?;
    for (k, x) in rows {
        w.write_record([k, x]).map_err(csv_err)?;
    }
    finish(w)
}

pub fn csv_err(e: csv::Error) -> CliError {
    parastat::Error::Io(e.to_string()).into()
}

pub fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| parastat::Error::Io(e.to_string()).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_and_null() {
        let s = String::from_utf8(to_json(&[0.1, f64::NAN, 359.0])).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,null,3.5900000000000000e2]\n");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Some(0.1));
    }

    #[test]
    fn flattening_paths() {
        let v = serde_json::json!({"a": {"b": [1, 2.5]}, "c": null});
        let s = String::from_utf8(flat_csv(&v).unwrap()).unwrap();
        assert_eq!(s, "field,value\na.b.0,1\na.b.1,2.5000000000000000e0\nc,\n");
    }
}
