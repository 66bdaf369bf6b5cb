//! Rollout heatmaps: the numeric matrix as CSV and an SVG with the reference
//! cells of every answer token outlined in red.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use refattn_core::{Error as CoreError, RolloutMatrix, Sample};

use crate::error::{io_err, Result};

const CELL: usize = 16;
const MARGIN: usize = 24;

/// Matrix rows as comma-separated values. Floats are written in their
/// shortest round-trip form, so parsing the grid gives back the exact matrix.
pub fn grid_csv(r: &RolloutMatrix) -> String {
    let mut out = String::new();
    for row in r.influence().outer_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// (row, column) of every reference cell, in sequence coordinates.
pub fn reference_cells(s: &Sample, prefix_len: usize) -> Vec<(usize, usize)> {
    s.mask
        .iter()
        .enumerate()
        .flat_map(|(i, refs)| {
            let row = prefix_len + s.target_position(i) - 1;
            refs.iter().map(move |&p| (row, prefix_len + p))
        })
        .collect()
}

fn check_shape(s: &Sample, r: &RolloutMatrix, prefix_len: usize) -> Result<()> {
    if r.seq_len() != prefix_len + s.seq_len() {
        return Err(CoreError::Shape(format!(
            "rollout covers {} positions, sample needs {}",
            r.seq_len(),
            prefix_len + s.seq_len()
        ))
        .into());
    }
    Ok(())
}

fn escape(c: char) -> String {
    match c {
        '<' => "&lt;".into(),
        '>' => "&gt;".into(),
        '&' => "&amp;".into(),
        '"' => "&quot;".into(),
        '\'' => "&apos;".into(),
        c => c.to_string(),
    }
}

pub fn svg(s: &Sample, r: &RolloutMatrix, prefix_len: usize) -> Result<String> {
    check_shape(s, r, prefix_len)?;
    let n = r.seq_len();
    let size = MARGIN + n * CELL;
    let labels: Vec<char> = std::iter::repeat_n('.', prefix_len)
        .chain(s.sequence().iter().map(|t| t.as_char()))
        .collect();
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="monospace" font-size="11">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{size}" height="{size}" fill="white"/>"#).unwrap();
    for (k, &c) in labels.iter().enumerate() {
        let mid = MARGIN + k * CELL + CELL / 2;
        writeln!(out, r#"<text x="{mid}" y="16" text-anchor="middle">{}</text>"#, escape(c)).unwrap();
        writeln!(out, r#"<text x="12" y="{}" text-anchor="middle">{}</text>"#, mid + 4, escape(c)).unwrap();
    }
    for (q, row) in r.influence().outer_iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v <= 0.0 {
                continue;
            }
            // square root keeps small weights visible
            let shade = (255.0 * (1.0 - v.clamp(0.0, 1.0).sqrt())).round() as u8;
            writeln!(
                out,
                r#"<rect class="cell" x="{}" y="{}" width="{CELL}" height="{CELL}" fill="rgb({shade},{shade},255)"/>"#,
                MARGIN + k * CELL,
                MARGIN + q * CELL
            )
            .unwrap();
        }
    }
    for (q, k) in reference_cells(s, prefix_len) {
        writeln!(
            out,
            r#"<rect class="ref" data-row="{q}" data-col="{k}" x="{}" y="{}" width="{CELL}" height="{CELL}" fill="none" stroke="red" stroke-width="2"/>"#,
            MARGIN + k * CELL,
            MARGIN + q * CELL
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Write `<out>.csv` and `<out>.svg`; returns both paths.
pub fn write_heatmap(s: &Sample, r: &RolloutMatrix, prefix_len: usize, out: &Path) -> Result<(PathBuf, PathBuf)> {
    check_shape(s, r, prefix_len)?;
    let csv_path = out.with_extension("csv");
    let svg_path = out.with_extension("svg");
    fs::write(&csv_path, grid_csv(r)).map_err(io_err(&csv_path))?;
    fs::write(&svg_path, svg(s, r, prefix_len)?).map_err(io_err(&svg_path))?;
    Ok((csv_path, svg_path))
}
