//! Accuracy/attention tables rendered as aligned text or CSV.
//!
//! Two tables: per task, ID and OOD accuracy with mean attention score; then
//! per task, OOD accuracy with the mean score of correctly and wrongly
//! answered samples. Accuracy is printed with 2 decimals, scores with 4, and
//! `-` marks a missing value.

use std::fmt;
use std::str::FromStr;

use refattn_core::{Split, TaskId};

use crate::evaluate::{EvalReport, SplitReport};

pub const OVERVIEW_HEADER: [&str; 5] = ["Task", "ID Acc", "ID Attn", "OOD Acc", "OOD Attn"];
pub const OUTCOME_HEADER: [&str; 4] = ["Task", "OOD Acc", "Attn (Correct)", "Attn (Error)"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" | "table-text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?} (text or csv)")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Text => "text",
            ReportFormat::Csv => "csv",
        })
    }
}

fn acc(e: Option<&SplitReport>) -> String {
    e.map_or("-".into(), |e| format!("{:.2}", e.exact_match_pct))
}

fn attn(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.4}"))
}

fn tasks(report: &EvalReport) -> Vec<TaskId> {
    TaskId::ALL
        .into_iter()
        .filter(|&t| report.entries.iter().any(|e| e.task == t))
        .collect()
}

pub fn overview_rows(report: &EvalReport) -> Vec<Vec<String>> {
    tasks(report)
        .into_iter()
        .map(|t| {
            let id = report.entry(t, Split::Id);
            let ood = report.entry(t, Split::Ood);
            vec![
                t.title().to_string(),
                acc(id),
                attn(id.and_then(|e| e.mean_attention)),
                acc(ood),
                attn(ood.and_then(|e| e.mean_attention)),
            ]
        })
        .collect()
}

pub fn outcome_rows(report: &EvalReport) -> Vec<Vec<String>> {
    tasks(report)
        .into_iter()
        .filter_map(|t| report.entry(t, Split::Ood))
        .map(|e| vec![e.task.title().to_string(), acc(Some(e)), attn(e.correct.mean), attn(e.error.mean)])
        .collect()
}

fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(k, (c, &w))| if k == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("-|-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

/// Both tables, separated by a blank line.
pub fn render(report: &EvalReport, format: ReportFormat) -> String {
    let table = match format {
        ReportFormat::Text => text_table,
        ReportFormat::Csv => csv_table,
    };
    format!(
        "{}\n{}",
        table(&OVERVIEW_HEADER, &overview_rows(report)),
        table(&OUTCOME_HEADER, &outcome_rows(report))
    )
}
