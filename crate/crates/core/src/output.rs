//! Deterministic float formatting and file writers.

use crate::error::Result;
use serde::Serialize;
use serde_json::Value;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Nine significant digits in scientific notation.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.8e}")
}

/// Round to nine significant digits.
pub fn round9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    fmt9(x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round9(x)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serialize with every float rounded to nine significant digits.
/// Non-finite floats become null.
pub fn to_json_value<T: Serialize>(data: &T) -> Result<Value> {
    let mut v = serde_json::to_value(data)?;
    round_value(&mut v);
    Ok(v)
}

pub fn write_json<T: Serialize>(path: &Path, data: &T) -> Result<()> {
    let v = to_json_value(data)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Write a CSV table with a header row and float cells.
pub fn write_csv_rows(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| fmt9(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(fmt9(std::f64::consts::PI), "3.14159265e0");
        assert_eq!(round9(1.0 / 3.0), 0.333333333);
        assert_eq!(fmt9(0.0), "0");
    }

    #[test]
    fn json_floats_rounded() {
        let v = to_json_value(&serde_json::json!({"a": [1.0f64 / 7.0, 2], "b": {"c": 2f64.sqrt()}})).unwrap();
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.142857143);
        assert_eq!(v["a"][1].as_i64().unwrap(), 2);
        assert_eq!(v["b"]["c"].as_f64().unwrap(), 1.41421356);
    }
}
