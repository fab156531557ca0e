//! Per-cell reports and the CSV output format.

use std::io::Write;

use crate::harness::HarnessError;
use crate::metrics::ErrorRates;
use crate::procedures::Method;

pub const CSV_HEADER: [&str; 12] = [
    "method",
    "sigma",
    "p",
    "fdr",
    "se_fdr",
    "fnr",
    "se_fnr",
    "mfdr",
    "mfnr",
    "mean_rejections",
    "replicates",
    "wall_time_s",
];

/// Aggregated results for one (method, Σ, p) grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub method: Method,
    pub sigma: String,
    pub p: f64,
    pub rates: ErrorRates,
    /// Whole-cell wall time; shared draws make per-method attribution
    /// meaningless, so every method row of a cell carries the same value.
    pub wall_time_s: f64,
}

/// Deterministic report order: sigma label, then p, then method name.
pub fn sort_reports(reports: &mut [CellReport]) {
    reports.sort_by(|a, b| {
        a.sigma
            .cmp(&b.sigma)
            .then(a.p.partial_cmp(&b.p).expect("p is finite"))
            .then(a.method.name().cmp(b.method.name()))
    });
}

/// Nine significant digits, positional for moderate exponents, scientific
/// otherwise (the printf `%.9g` convention with trailing zeros kept).
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let sci = format!("{:.8e}", x);
    let (_, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent parses");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Write reports in the fixed CSV schema (newline `\n`; fields quoted only
/// when needed, which block-diagonal sigma labels are).
pub fn write_csv<W: Write>(reports: &[CellReport], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        let rates = &r.rates;
        w.write_record([
            r.method.name().to_string(),
            r.sigma.clone(),
            format_sig9(r.p),
            format_sig9(rates.fdr),
            format_sig9(rates.se_fdr),
            format_sig9(rates.fnr),
            format_sig9(rates.se_fnr),
            format_sig9(rates.mfdr),
            format_sig9(rates.mfnr),
            format_sig9(rates.mean_rejections),
            rates.replicates.to_string(),
            format_sig9(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}
