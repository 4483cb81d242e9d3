//! Across-seed statistics of result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use invbq::experiment::ResultRow;

use crate::results::format_float;

pub const HEADER: &str =
    "function,method,measure,N,seeds,mean_rel_abs_err,std_rel_abs_err,mean_sigma_Z,std_sigma_Z";

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub function: String,
    pub method: String,
    pub measure: String,
    pub n: usize,
    pub seeds: usize,
    pub mean_err: f64,
    pub std_err: f64,
    pub mean_sigma: f64,
    pub std_sigma: f64,
}

/// Mean and population standard deviation. Values are sorted first so the
/// result does not depend on input order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / n).sqrt())
}

/// One row per (function, method, measure, N).
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String, String, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((
                r.function.clone(),
                r.method.to_string(),
                r.measure.clone(),
                r.n,
            ))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((function, method, measure, n), rs)| {
            let errs: Vec<f64> = rs.iter().map(|r| r.rel_abs_err).collect();
            let sigmas: Vec<f64> = rs.iter().map(|r| r.sigma_z).collect();
            let (mean_err, std_err) = mean_std(&errs);
            let (mean_sigma, std_sigma) = mean_std(&sigmas);
            SummaryRow {
                function,
                method,
                measure,
                n,
                seeds: rs.len(),
                mean_err,
                std_err,
                mean_sigma,
                std_sigma,
            }
        })
        .collect()
}

pub fn to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.function,
            r.method,
            r.measure,
            r.n,
            r.seeds,
            format_float(r.mean_err),
            format_float(r.std_err),
            format_float(r.mean_sigma),
            format_float(r.std_sigma),
        )
        .unwrap();
    }
    out
}
