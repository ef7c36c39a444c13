use std::io::Write;

use super::{OutputFormat, PairDump, ReportError, SubsetReport, COUNT_COLUMNS, SYNTACTIC_COLUMNS};
use crate::lexical::LexicalScores;

/// `12.34%` for ratios, `18.65` for tree edit distances.
pub fn format_cell(column: &str, value: f64) -> String {
    if COUNT_COLUMNS.contains(&column) {
        format!("{value:.2}")
    } else {
        format!("{:.2}%", value * 100.0)
    }
}

fn rank(column: &str) -> usize {
    if column.starts_with("semantic.") {
        return 0;
    }
    SYNTACTIC_COLUMNS
        .iter()
        .chain(LexicalScores::COLUMNS.iter())
        .position(|c| *c == column)
        .map_or(usize::MAX, |i| i + 1)
}

/// Union of metric columns over all rows, in canonical order.
fn columns(reports: &[SubsetReport]) -> Vec<&str> {
    let mut cols: Vec<&str> = Vec::new();
    for r in reports {
        for c in r.skipped.keys().chain(r.metrics.keys()) {
            if !cols.contains(&c.as_str()) {
                cols.push(c);
            }
        }
    }
    // stable, so semantic columns keep their configured order
    cols.sort_by_key(|c| rank(c));
    cols
}

fn render_csv(reports: &[SubsetReport]) -> Result<String, ReportError> {
    let cols = columns(reports);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["subset".to_string(), "count".to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    header.extend(cols.iter().map(|c| format!("skipped.{c}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in reports {
        let mut row = vec![r.subset.clone(), r.count.to_string()];
        row.extend(
            cols.iter()
                .map(|c| r.metrics.get(*c).map(|v| format_cell(c, *v)).unwrap_or_default()),
        );
        row.extend(
            cols.iter()
                .map(|c| r.skipped.get(*c).map(|n| n.to_string()).unwrap_or_default()),
        );
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> ReportError {
    ReportError::Io(std::io::Error::other(e))
}

fn md_row(cells: &[String]) -> String {
    format!(
        "| {} |\n",
        cells
            .iter()
            .map(|c| c.replace('|', "\\|"))
            .collect::<Vec<_>>()
            .join(" | ")
    )
}

fn render_markdown(reports: &[SubsetReport]) -> String {
    let cols = columns(reports);
    let mut out = String::new();
    let mut header = vec!["subset".to_string(), "count".to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    out.push_str(&md_row(&header));
    out.push_str(&md_row(&vec!["---".to_string(); header.len()]));
    for r in reports {
        let mut row = vec![r.subset.clone(), r.count.to_string()];
        row.extend(cols.iter().map(|c| {
            r.metrics
                .get(*c)
                .map_or_else(|| "-".to_string(), |v| format_cell(c, *v))
        }));
        out.push_str(&md_row(&row));
    }
    let skipped: Vec<&SubsetReport> = reports.iter().filter(|r| r.skipped.values().any(|&n| n > 0)).collect();
    if !skipped.is_empty() {
        out.push_str("\nSkipped pairs:\n\n");
        out.push_str(&md_row(&header));
        out.push_str(&md_row(&vec!["---".to_string(); header.len()]));
        for r in skipped {
            let mut row = vec![r.subset.clone(), r.count.to_string()];
            row.extend(cols.iter().map(|c| r.skipped.get(*c).copied().unwrap_or(0).to_string()));
            out.push_str(&md_row(&row));
        }
    }
    out
}

pub fn render_report(reports: &[SubsetReport], format: OutputFormat) -> Result<String, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::Empty);
    }
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(reports)? + "\n"),
        OutputFormat::Csv => render_csv(reports),
        OutputFormat::Markdown => Ok(render_markdown(reports)),
    }
}

/// JSONL, one [`PairDump`] per line.
pub fn write_pair_dump<W: Write>(mut w: W, dump: &[PairDump]) -> Result<(), ReportError> {
    for d in dump {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
