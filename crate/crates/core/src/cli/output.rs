//! Deterministic CSV / JSON data files.
//!
//! Floats are written with 17 significant digits in CSV; JSON uses the
//! shortest representation that parses back to the same `f64`. No
//! timestamps or host data end up in the files.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::Units;
use crate::amplitudes::CoincidenceDistribution;
use crate::experiments::DiscretePattern;
use crate::hbt::ContinuousPattern;

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub engine_version: &'static str,
    pub experiment: &'static str,
    pub parameters: Map<String, Value>,
    pub units: String,
    /// `|<a|b>|` of the splitter columns (`|s|` in the continuous case).
    pub normalization_overlap: f64,
}

impl Metadata {
    pub fn new(
        experiment: &'static str,
        parameters: Map<String, Value>,
        units: Units,
        normalization_overlap: f64,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            engine_version: env!("CARGO_PKG_VERSION"),
            experiment,
            parameters,
            units: units.to_string(),
            normalization_overlap,
        }
    }
}

pub fn discrete_csv(pattern: &DiscretePattern, units: Units) -> String {
    let mut out = String::from("detector,probability");
    let scaled = pattern.paper_units();
    if units == Units::Paper {
        out.push_str(",probability_paper_units");
    }
    out.push('\n');
    for (k, p) in pattern.counts.iter().enumerate() {
        write!(out, "{},{}", k + 1, fmt_f64(*p)).unwrap();
        if units == Units::Paper {
            write!(out, ",{}", fmt_f64(scaled[k])).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn discrete_json(
    meta: &Metadata,
    pattern: &DiscretePattern,
    dist: &CoincidenceDistribution,
    units: Units,
) -> String {
    let scaled = pattern.paper_units();
    let row: Vec<Value> = pattern
        .counts
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut entry = json!({ "detector": k + 1, "probability": p });
            if units == Units::Paper {
                entry["probability_paper_units"] = json!(scaled[k]);
            }
            entry
        })
        .collect();
    let pairs: Vec<Value> = dist
        .pairs()
        .map(|((j, k), p)| json!({ "j": j + 1, "k": k + 1, "probability": p }))
        .collect();
    let doc = json!({
        "metadata": meta,
        "reference": pattern.reference + 1,
        "row": row,
        "distribution": {
            "dim": dist.dim(),
            "bunched": dist.bunched(),
            "pairs": pairs,
        },
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json");
    text.push('\n');
    text
}

/// Density relative to its peak, for `--units paper`.
fn peak_normalized(pattern: &ContinuousPattern) -> Vec<f64> {
    let peak = pattern.peak();
    pattern
        .density()
        .iter()
        .map(|d| if peak > 0.0 { d / peak } else { 0.0 })
        .collect()
}

pub fn continuous_csv(pattern: &ContinuousPattern, units: Units, fringe: f64) -> String {
    let xs = pattern.grid();
    let d = pattern.density();
    let scaled = peak_normalized(pattern);
    let paper = units == Units::Paper;
    let mut out = String::new();
    match pattern.slice_x1() {
        Some(x1) => {
            out.push_str("x2,density");
            if paper {
                out.push_str(",separation_fringe_units,density_paper_units");
            }
            out.push('\n');
            for (i, &x2) in xs.iter().enumerate() {
                write!(out, "{},{}", fmt_f64(x2), fmt_f64(d[i])).unwrap();
                if paper {
                    write!(
                        out,
                        ",{},{}",
                        fmt_f64((x1 - x2) / fringe),
                        fmt_f64(scaled[i])
                    )
                    .unwrap();
                }
                out.push('\n');
            }
        }
        None => {
            out.push_str("x1,x2,density");
            if paper {
                out.push_str(",separation_fringe_units,density_paper_units");
            }
            out.push('\n');
            let n = xs.len();
            for (i, &x1) in xs.iter().enumerate() {
                for (j, &x2) in xs.iter().enumerate() {
                    let idx = i * n + j;
                    write!(out, "{},{},{}", fmt_f64(x1), fmt_f64(x2), fmt_f64(d[idx])).unwrap();
                    if paper {
                        write!(
                            out,
                            ",{},{}",
                            fmt_f64((x1 - x2) / fringe),
                            fmt_f64(scaled[idx])
                        )
                        .unwrap();
                    }
                    out.push('\n');
                }
            }
        }
    }
    out
}

pub fn continuous_json(
    meta: &Metadata,
    pattern: &ContinuousPattern,
    units: Units,
    fringe: f64,
) -> String {
    let xs = pattern.grid();
    let n = xs.len();
    let mut doc = json!({ "metadata": meta, "grid": xs });
    match pattern.slice_x1() {
        Some(x1) => {
            doc["slice_x1"] = json!(x1);
            doc["density"] = json!(pattern.density());
        }
        None => {
            let rows: Vec<&[f64]> = pattern.density().chunks(n).collect();
            doc["density"] = json!(rows);
        }
    }
    if units == Units::Paper {
        let scaled = peak_normalized(pattern);
        doc["fringe_width"] = json!(fringe);
        doc["density_paper_units"] = match pattern.slice_x1() {
            Some(_) => json!(scaled),
            None => json!(scaled.chunks(n).collect::<Vec<_>>()),
        };
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("json");
    text.push('\n');
    text
}
