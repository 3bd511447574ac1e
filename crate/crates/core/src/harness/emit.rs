use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::aggregate::SensitivityTable;
use super::ResultRow;
use crate::error::Result;

pub const ROWS_HEADER: &str = "image,distortion,strength,normalization,metric,score,error";
pub const MEDIANS_HEADER: &str = "distortion,metric,normalization,count,median,shading";
pub const RELATIVE_HEADER: &str = "distortion,metric,normalization,median,relative";

/// Label used for undistorted reference rows.
pub const REFERENCE_LABEL: &str = "reference";

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn number(value: Option<f64>) -> String {
    value.map(|v| format!("{v:?}")).unwrap_or_default()
}

pub fn rows_csv(rows: &[ResultRow]) -> String {
    let mut out = format!("{ROWS_HEADER}\n");
    for row in rows {
        let (score, error) = match &row.score {
            Ok(v) => (format!("{v:?}"), String::new()),
            Err(e) => (String::new(), csv_field(e)),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&row.image_id),
            row.distortion.map_or(REFERENCE_LABEL, |k| k.label()),
            row.strength,
            csv_field(&row.normalization),
            row.metric,
            score,
            error
        );
    }
    out
}

pub fn medians_csv(table: &SensitivityTable) -> String {
    let mut out = format!("{MEDIANS_HEADER}\n");
    for c in &table.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.distortion.map_or(REFERENCE_LABEL, |k| k.label()),
            c.metric,
            csv_field(&c.normalization),
            c.count,
            number(c.median),
            number(c.shading)
        );
    }
    out
}

/// Distorted cells only; a blank `relative` marks an undefined ratio.
pub fn relative_csv(table: &SensitivityTable) -> String {
    let mut out = format!("{RELATIVE_HEADER}\n");
    for c in table.cells.iter() {
        let Some(kind) = c.distortion else { continue };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            kind.label(),
            c.metric,
            csv_field(&c.normalization),
            number(c.median),
            number(c.relative)
        );
    }
    out
}

fn short(value: f64) -> String {
    if value.is_infinite() {
        "inf".to_string()
    } else {
        format!("{value:.3}")
    }
}

/// One table per normalization: a row per distortion, a column per metric,
/// each cell `median [shading]`.
pub fn table_markdown(table: &SensitivityTable) -> String {
    let kinds = table.distortions();
    let metrics = table.metrics();
    let mut out = String::new();
    for norm in &table.normalizations {
        let _ = writeln!(out, "## Normalization: {norm}\n");
        out.push_str("| Distortion |");
        for m in &metrics {
            let _ = write!(out, " {} |", m.name().to_uppercase());
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(metrics.len()));
        out.push('\n');
        for &kind in &kinds {
            let _ = write!(out, "| {} |", kind.title());
            for &m in &metrics {
                match table.cell(Some(kind), m, norm) {
                    Some(c) => match (c.median, c.shading) {
                        (Some(med), Some(s)) => {
                            let _ = write!(out, " {} [{:.2}] |", short(med), s);
                        }
                        (Some(med), None) => {
                            let _ = write!(out, " {} |", short(med));
                        }
                        _ => out.push_str(" n/a |"),
                    },
                    None => out.push_str(" |"),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Writes `rows.csv`, `medians.csv`, `relative.csv` and `table.md`.
pub fn write_outputs(dir: &Path, rows: &[ResultRow], table: &SensitivityTable) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("rows.csv"), rows_csv(rows))?;
    fs::write(dir.join("medians.csv"), medians_csv(table))?;
    fs::write(dir.join("relative.csv"), relative_csv(table))?;
    fs::write(dir.join("table.md"), table_markdown(table))?;
    Ok(())
}
