//! Summary-table emission: one row per series with the crossover-fit
//! parameters, `/` standing in for fields that do not exist when a series
//! shows no crossover (such series get a single exponent, reported in the
//! H2 column).

use serde::{Deserialize, Serialize};

use crate::scalingfit::{detect_outlier_no_crossover, CrossoverFit};

/// One table row; `None` renders as the `/` sentinel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub code: String,
    pub h1: Option<f64>,
    pub h2: f64,
    pub s_cross: Option<f64>,
    pub o_min: Option<f64>,
}

/// Collapses a crossover fit into a row, applying the no-crossover policy:
/// flagged fits report only the single-line exponent.
pub fn summary_row(code: &str, fit: &CrossoverFit) -> SummaryRow {
    if detect_outlier_no_crossover(fit) {
        SummaryRow {
            code: code.to_string(),
            h1: None,
            h2: fit.single_h,
            s_cross: None,
            o_min: None,
        }
    } else {
        SummaryRow {
            code: code.to_string(),
            h1: Some(fit.h1),
            h2: fit.h2,
            s_cross: Some(fit.s_cross),
            o_min: Some(fit.o_min),
        }
    }
}

pub const TABLE_HEADER: &str = "code,H1,H2,s_cross,O_min";

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3}"),
        None => "/".to_string(),
    }
}

/// Renders rows as CSV with three-decimal numbers, matching the layout
/// `code,H1,H2,s_cross,O_min`. An empty list yields a header-only table.
pub fn emit_table(rows: &[SummaryRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.code,
            cell(r.h1),
            cell(Some(r.h2)),
            cell(r.s_cross),
            cell(r.o_min)
        ));
    }
    out
}

/// Full-precision machine record of the same fits, including every fitted
/// parameter and the no-crossover flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryJson {
    pub code: String,
    pub no_crossover: bool,
    pub fit: CrossoverFit,
}

pub fn emit_json(fits: &[(String, CrossoverFit)]) -> String {
    let rows: Vec<SummaryJson> = fits
        .iter()
        .map(|(code, fit)| SummaryJson {
            code: code.clone(),
            no_crossover: detect_outlier_no_crossover(fit),
            fit: fit.clone(),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("summary serializes")
}
