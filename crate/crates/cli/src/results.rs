//! Result files: one CSV row per (method, seed, N).

use std::fmt::Write as _;
use std::path::Path;

use invbq::experiment::{Method, ResultRow};

use crate::error::{CliError, Result};

pub const HEADER: &str =
    "function,method,measure,seed,N,mu_Z,sigma_Z,reference,rel_abs_err,wall_ms";

/// Scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus rows, LF-terminated.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.function,
            r.method,
            r.measure,
            r.seed,
            r.n,
            format_float(r.mu_z),
            format_float(r.sigma_z),
            format_float(r.reference),
            format_float(r.rel_abs_err),
            format_float(r.wall_ms),
        )
        .unwrap();
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, to_csv(rows)).map_err(|e| CliError::io(path, e))
}

/// Parses a result file, requiring the exact header.
pub fn parse_csv(path: &Path, text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        Some(h) => {
            return Err(CliError::format(
                path,
                format!("unexpected header '{h}', expected '{HEADER}'"),
            ))
        }
        None => return Err(CliError::format(path, "empty file")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let err = |m: String| CliError::format(path, format!("line {lineno}: {m}"));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(err(format!("expected 10 fields, found {}", fields.len())));
        }
        let float = |k: usize| -> Result<f64> {
            fields[k]
                .parse()
                .map_err(|_| err(format!("field {} is not a number: '{}'", k + 1, fields[k])))
        };
        let method: Method = fields[1]
            .parse()
            .map_err(|_| err(format!("unknown method '{}'", fields[1])))?;
        rows.push(ResultRow {
            function: fields[0].to_string(),
            method,
            measure: fields[2].to_string(),
            seed: fields[3]
                .parse()
                .map_err(|_| err(format!("bad seed '{}'", fields[3])))?,
            n: fields[4]
                .parse()
                .map_err(|_| err(format!("bad N '{}'", fields[4])))?,
            mu_z: float(5)?,
            sigma_z: float(6)?,
            reference: float(7)?,
            rel_abs_err: float(8)?,
            wall_ms: float(9)?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(path, &text)
}
