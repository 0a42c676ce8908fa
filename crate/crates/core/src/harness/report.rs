//! CSV report tables, one row per instance.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::reductions::GapReport;

/// Fixed column order of every report table.
pub const CSV_COLUMNS: [&str; 14] = [
    "reduction",
    "seed",
    "universe_size",
    "subset_count",
    "greedy_size",
    "exact_size",
    "exact_optimal",
    "greedy_only",
    "witness_size",
    "witness_verified",
    "satisfiable_side",
    "ratio_exact_witness",
    "ratio_greedy_exact",
    "provenance",
];

#[derive(Serialize)]
struct Row<'a> {
    reduction: &'a str,
    seed: Option<&'a str>,
    universe_size: usize,
    subset_count: usize,
    greedy_size: usize,
    exact_size: Option<usize>,
    exact_optimal: Option<bool>,
    greedy_only: bool,
    witness_size: Option<usize>,
    witness_verified: Option<bool>,
    satisfiable_side: bool,
    ratio_exact_witness: Option<f64>,
    ratio_greedy_exact: Option<f64>,
    /// `key=value` pairs joined by `;`, keys sorted.
    provenance: String,
}

/// Absent optional fields are empty cells.
pub fn reports_to_csv(reports: &[GapReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if reports.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in reports {
        w.serialize(Row {
            reduction: &r.reduction,
            seed: r.provenance.get("seed").map(String::as_str),
            universe_size: r.universe_size,
            subset_count: r.subset_count,
            greedy_size: r.greedy_size,
            exact_size: r.exact_size,
            exact_optimal: r.exact_optimal,
            greedy_only: r.greedy_only,
            witness_size: r.witness_size,
            witness_verified: r.witness_verified,
            satisfiable_side: r.satisfiable_side,
            ratio_exact_witness: r.ratio_exact_witness,
            ratio_greedy_exact: r.ratio_greedy_exact,
            provenance: r
                .provenance
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";"),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_csv(path: &Path, reports: &[GapReport]) -> Result<()> {
    std::fs::write(path, reports_to_csv(reports)?)?;
    Ok(())
}
