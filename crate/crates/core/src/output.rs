//! Deterministic text output: JSON and CSV with floats at 17 significant
//! digits, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Version tag written on the first line of every CSV file.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// `x` with 17 significant digits in the shortest of fixed or exponent
/// notation, trailing zeros dropped. Non-finite values give `None`.
pub fn fmt_f64(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(if x.is_sign_negative() { "-0".into() } else { "0".into() });
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        Some(strip_zeros(&format!("{x:.decimals$}")).to_string())
    } else {
        Some(format!("{}e{exp}", strip_zeros(mantissa)))
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV cell for an optional float; empty when missing or non-finite.
pub fn csv_cell(x: Option<f64>) -> String {
    x.and_then(fmt_f64).unwrap_or_default()
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n("  ", k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64");
                out.push_str(&fmt_f64(x).unwrap_or_else(|| "null".into()));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Short numeric arrays stay on one line.
            if items.iter().all(|i| i.is_number() || i.is_null()) && items.len() <= 4 {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with fixed float formatting; NaN and infinities become null.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::numerical(format!("serialization: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// Writes a CSV table preceded by a `#` line naming the table and schema
/// version. `trailer` lines are appended as `#` comments.
pub fn write_csv<W: Write>(
    w: W,
    table: &str,
    header: &[String],
    rows: &[Vec<String>],
    trailer: &[String],
) -> Result<()> {
    let io = |e: std::io::Error| Error::invalid(format!("write failed: {e}"));
    let mut w = w;
    writeln!(w, "# respoly {table} csv v{CSV_SCHEMA_VERSION}").map_err(io)?;
    {
        let mut c = csv::Writer::from_writer(&mut w);
        let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        c.write_record(header).map_err(csv_err)?;
        for row in rows {
            c.write_record(row).map_err(csv_err)?;
        }
        c.flush().map_err(io)?;
    }
    for line in trailer {
        writeln!(w, "# {line}").map_err(io)?;
    }
    Ok(())
}
