//! Dataset files: one JSON sample per line.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use refattn_core::{parse_sample, serialize_sample, Sample};

use crate::error::{io_err, HarnessError, Result};

/// Serialize samples, one per line. No samples means an empty file.
pub fn to_jsonl(samples: &[Sample]) -> Result<String> {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serialize_sample(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_dataset(path: &Path, samples: &[Sample]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(to_jsonl(samples)?.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Parse a dataset file. Blank lines are skipped; errors carry the line number.
pub fn read_dataset(path: &Path) -> Result<Vec<Sample>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            parse_sample(l).map_err(|source| HarnessError::Record {
                path: path.to_path_buf(),
                line: n + 1,
                source,
            })
        })
        .collect()
}
